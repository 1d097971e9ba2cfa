// Copyright 2026 The mavqa Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mavqa/model/rs.hpp"

#include <fmt/format.h>

namespace mavqa::model {

PredictorHead make_predictor(ParamSet& ps, const Initializer& init, const std::string& name, std::size_t in,
                             std::size_t hidden, std::size_t out) {
    return {make_linear(ps, init, name + ".l1", in, hidden), make_linear(ps, init, name + ".l2", hidden, hidden),
            make_linear(ps, init, name + ".l3", hidden, out)};
}

RSModel make_rs_model(ParamSet& ps, const Initializer& init, const RSConfig& cfg, const std::string& prefix) {
    RSModel m;
    m.cfg = cfg;
    auto encoder = [&](const std::string& name) {
        return RSEncoder{make_feature_encoder(ps, init, name + ".visual", cfg.visual_features, cfg.width,
                                              cfg.segments, cfg.blocks),
                         make_feature_encoder(ps, init, name + ".audio", cfg.audio_features, cfg.width, cfg.segments,
                                              cfg.blocks)};
    };
    m.rhythm = encoder(prefix + ".rhythm");
    m.source = encoder(prefix + ".source");
    m.rhythm_head = make_predictor(ps, init, prefix + ".rhythm_head", 2 * cfg.width, cfg.hidden, cfg.rhythm_outputs);
    m.source_head = make_predictor(ps, init, prefix + ".source_head", 2 * cfg.width, cfg.hidden, cfg.source_outputs);
    return m;
}

ag::Var avg_pool(ag::Var tokens) {
    if (tokens.value().rank() != 2 || tokens.value().rows() == 0)
        throw DimensionError("avg_pool of an empty sequence");
    return ag::mean_rows(tokens);
}

ag::Var predictor_forward(ag::Tape& tape, ag::Var xv_avg, ag::Var xa_avg, const PredictorHead& head) {
    const std::size_t w = xv_avg.value().size() + xa_avg.value().size();
    if (w != head.l1.in)
        throw DimensionError(fmt::format("predictor expects {} pooled values, got {}", head.l1.in, w));
    ag::Var x = ag::concat_cols(xv_avg, xa_avg);
    x = ag::relu(apply(tape, head.l1, x));
    x = ag::relu(apply(tape, head.l2, x));
    return apply(tape, head.l3, x);
}

Tensor predictor_forward(const Tensor& xv_avg, const Tensor& xa_avg, const PredictorHead& head) {
    ag::Tape tape;
    ag::Var v = tape.constant(xv_avg.reshaped({1, xv_avg.size()}));
    ag::Var a = tape.constant(xa_avg.reshaped({1, xa_avg.size()}));
    const Tensor& y = predictor_forward(tape, v, a, head).value();
    return y.reshaped({y.size()});
}

RSPooled rs_forward(ag::Tape& tape, const RSModel& m, const ClipFeatures& f) {
    RSPooled out;
    out.pooled[0] = avg_pool(encode_features(tape, m.rhythm.visual, f.segment_frames));
    out.pooled[1] = avg_pool(encode_features(tape, m.rhythm.audio, f.segment_audio));
    out.pooled[2] = avg_pool(encode_features(tape, m.source.visual, f.segment_frames));
    out.pooled[3] = avg_pool(encode_features(tape, m.source.audio, f.segment_audio));
    out.rhythm = predictor_forward(tape, out.pooled[0], out.pooled[1], m.rhythm_head);
    out.source = predictor_forward(tape, out.pooled[2], out.pooled[3], m.source_head);
    return out;
}

ag::Var rs_loss(ag::Tape& tape, const RSModel& m, const RSExample& ex) {
    const auto out = rs_forward(tape, m, *ex.features);
    if (ex.targets.rhythm.size() != m.cfg.rhythm_outputs || ex.targets.source.size() != m.cfg.source_outputs)
        throw DimensionError(fmt::format("label lengths {}/{} do not match predictor outputs {}/{}",
                                         ex.targets.rhythm.size(), ex.targets.source.size(), m.cfg.rhythm_outputs,
                                         m.cfg.source_outputs));
    ag::Var yr = tape.constant(ex.targets.rhythm.reshaped({1, m.cfg.rhythm_outputs}));
    ag::Var ys = tape.constant(ex.targets.source.reshaped({1, m.cfg.source_outputs}));
    return ag::add(ag::mse(out.rhythm, yr), ag::mse(out.source, ys));
}

double pretrain_step(ParamSet& params, const RSModel& m, std::span<const RSExample> batch, OptimState& opt) {
    if (batch.empty()) throw std::invalid_argument("empty pretraining batch");
    params.zero_grad();
    double total = 0;
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (const auto& ex : batch) {
        ag::Tape tape;
        ag::Var loss = rs_loss(tape, m, ex);
        total += loss.value()[0];
        tape.backward(ag::scale(loss, inv));
    }
    adam_step(params, opt);
    return total * inv;
}

std::size_t freeze(ParamSet& params, const std::string& prefix) { return params.freeze_prefix(prefix); }

std::array<Tensor, 4> rs_embeddings(const RSModel& m, const ClipFeatures& f) {
    ag::Tape tape;
    const auto out = rs_forward(tape, m, f);
    std::array<Tensor, 4> r;
    for (std::size_t i = 0; i < 4; ++i) r[i] = out.pooled[i].value().reshaped({out.pooled[i].value().size()});
    return r;
}

}  // namespace mavqa::model

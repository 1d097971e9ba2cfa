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

#include "mavqa/model/xmodal.hpp"

#include <cmath>

#include <fmt/format.h>

namespace mavqa::model {

std::string_view modality_name(Modality m) {
    switch (m) {
        case Modality::kVisual: return "visual";
        case Modality::kAudio: return "audio";
        case Modality::kLanguage: return "language";
    }
    return "?";
}

std::size_t EncoderConfig::width(Modality m) const {
    switch (m) {
        case Modality::kVisual: return d_visual;
        case Modality::kAudio: return d_audio;
        case Modality::kLanguage: return d_language;
    }
    return 0;
}

std::vector<std::size_t> EncoderConfig::boundaries() const {
    std::vector<std::size_t> out;
    if (blocks == 0 || inject_every == 0) return out;
    if (final_boundary_only) {
        if (blocks % inject_every == 0) out.push_back(blocks - 1);
        return out;
    }
    for (std::size_t b = inject_every; b <= blocks; b += inject_every) out.push_back(b - 1);
    return out;
}

CrossModalAdapter make_adapter(ParamSet& ps, const Initializer& init, const std::string& name, std::size_t d_source,
                               std::size_t d_target, std::size_t hidden) {
    CrossModalAdapter a;
    a.d_source = d_source;
    a.d = d_target;
    a.h = hidden;
    auto add = [&](const char* tag, Shape s, std::size_t fan_in) {
        const std::string n = name + "." + tag;
        return &ps.add(n, init.uniform_fan_in(n, std::move(s), fan_in));
    };
    if (d_source != d_target) a.project = add("project", {d_source, d_target}, d_source);
    a.wq = add("wq", {d_target, d_target}, d_target);
    a.wk = add("wk", {d_target, d_target}, d_target);
    a.wv = add("wv", {d_target, d_target}, d_target);
    a.w1 = add("w1", {d_target, hidden}, d_target);
    a.b1 = add("b1", {hidden}, d_target);
    a.w2 = add("w2", {hidden, d_target}, hidden);
    a.b2 = add("b2", {d_target}, hidden);
    return a;
}

EncoderStack make_encoder_stack(ParamSet& ps, const Initializer& init, const EncoderConfig& cfg,
                                const std::string& prefix) {
    EncoderStack s;
    s.cfg = cfg;
    s.encoders[0] = make_feature_encoder(ps, init, prefix + ".visual", cfg.visual_features, cfg.d_visual,
                                         cfg.visual_tokens, cfg.blocks);
    s.encoders[1] = make_feature_encoder(ps, init, prefix + ".audio", cfg.audio_features, cfg.d_audio,
                                         cfg.audio_tokens, cfg.blocks);
    s.encoders[2] = make_token_encoder(ps, init, prefix + ".language", cfg.vocab, cfg.d_language,
                                       cfg.language_tokens, cfg.blocks);
    for (std::size_t m = 0; m < kModalities; ++m)
        s.out_norm[m] = make_layer_norm(ps, fmt::format("{}.{}.out_norm", prefix, modality_name(static_cast<Modality>(m))),
                                        cfg.width(static_cast<Modality>(m)));
    for (std::size_t b : cfg.boundaries()) {
        AdapterGrid grid;
        for (std::size_t t = 0; t < kModalities; ++t)
            for (std::size_t src = 0; src < kModalities; ++src) {
                if (t == src) continue;
                const auto mt = static_cast<Modality>(t), ms = static_cast<Modality>(src);
                grid[t][src] = make_adapter(
                    ps, init, fmt::format("{}.adapter{}.{}_from_{}", prefix, b, modality_name(mt), modality_name(ms)),
                    cfg.width(ms), cfg.width(mt), cfg.adapter_hidden);
            }
        s.adapters.push_back(std::move(grid));
    }
    return s;
}

namespace {

void check_width(ag::Var x, std::size_t d, const char* what) {
    const Tensor& v = x.value();
    if (v.rank() != 2 || v.cols() != d)
        throw DimensionError(fmt::format("{} has shape {}, adapter width is {}", what, shape_str(v.shape()), d));
    if (v.rows() == 0) throw DimensionError(fmt::format("{} has no tokens", what));
}

}  // namespace

ag::Var attention_scores(ag::Tape& tape, ag::Var query, ag::Var kv, const CrossModalAdapter& ad) {
    check_width(query, ad.d, "query");
    check_width(kv, ad.d, "key/value sequence");
    ag::Var q = ag::matmul(query, tape.param(*ad.wq));
    ag::Var k = ag::matmul(kv, tape.param(*ad.wk));
    return ag::softmax_rows(ag::scale(ag::matmul_nt(q, k), 1.0 / std::sqrt(static_cast<double>(ad.d))));
}

ag::Var cross_modal_attention(ag::Tape& tape, ag::Var query, ag::Var kv, const CrossModalAdapter& ad) {
    ag::Var s = attention_scores(tape, query, kv, ad);
    return ag::matmul(s, ag::matmul(kv, tape.param(*ad.wv)));
}

ag::Var adapter_forward(ag::Tape& tape, ag::Var attended, const CrossModalAdapter& ad) {
    check_width(attended, ad.d, "attended sequence");
    ag::Var h = ag::relu(ag::add_bias(ag::matmul(attended, tape.param(*ad.w1)), tape.param(*ad.b1)));
    return ag::add_bias(ag::matmul(h, tape.param(*ad.w2)), tape.param(*ad.b2));
}

ag::Var fuse(ag::Var own, ag::Var za, ag::Var zb) {
    const auto& s = own.value().shape();
    if (za.value().shape() != s || zb.value().shape() != s)
        throw DimensionError(fmt::format("fuse: shapes {}, {}, {} differ", shape_str(s), shape_str(za.value().shape()),
                                         shape_str(zb.value().shape())));
    return ag::add(ag::add(own, za), zb);
}

ag::Var dimension_project(ag::Tape& tape, ag::Var x, Parameter* project) {
    if (project == nullptr) return x;
    return ag::matmul(x, tape.param(*project));
}

std::array<ag::Var, kModalities> encoder_forward(ag::Tape& tape, const EncoderStack& stack,
                                                 std::array<ag::Var, kModalities> x, bool interactive) {
    const auto bounds = stack.cfg.boundaries();
    std::size_t next = 0;
    for (std::size_t b = 0; b < stack.cfg.blocks; ++b) {
        for (std::size_t m = 0; m < kModalities; ++m) x[m] = apply(tape, stack.encoders[m].blocks[b], x[m]);
        if (next < bounds.size() && bounds[next] == b) {
            if (interactive) {
                const AdapterGrid& grid = stack.adapters[next];
                std::array<ag::Var, kModalities> fused;
                for (std::size_t t = 0; t < kModalities; ++t) {
                    ag::Var z[2];
                    std::size_t k = 0;
                    for (std::size_t src = 0; src < kModalities; ++src) {
                        if (src == t) continue;
                        const CrossModalAdapter& ad = grid[t][src];
                        ag::Var kv = dimension_project(tape, x[src], ad.project);
                        z[k++] = adapter_forward(tape, cross_modal_attention(tape, x[t], kv, ad), ad);
                    }
                    fused[t] = fuse(x[t], z[0], z[1]);
                }
                x = fused;
            }
            ++next;
        }
    }
    for (std::size_t m = 0; m < kModalities; ++m) x[m] = apply(tape, stack.out_norm[m], x[m]);
    return x;
}

std::array<ag::Var, kModalities> encoder_forward(ag::Tape& tape, const EncoderStack& stack, const EncoderInputs& in,
                                                 bool interactive) {
    std::array<ag::Var, kModalities> x = {embed_features(tape, stack.encoders[0], in.visual),
                                          embed_features(tape, stack.encoders[1], in.audio),
                                          embed_tokens(tape, stack.encoders[2], in.question)};
    return encoder_forward(tape, stack, x, interactive);
}

Tensor attention_scores(const TokenSequence& query, const TokenSequence& kv, const CrossModalAdapter& ad) {
    ag::Tape tape;
    return attention_scores(tape, tape.constant(query.tokens), tape.constant(kv.tokens), ad).value();
}

Tensor cross_modal_attention(const TokenSequence& query, const TokenSequence& kv, const CrossModalAdapter& ad) {
    ag::Tape tape;
    return cross_modal_attention(tape, tape.constant(query.tokens), tape.constant(kv.tokens), ad).value();
}

Tensor adapter_forward(const Tensor& attended, const CrossModalAdapter& ad) {
    ag::Tape tape;
    return adapter_forward(tape, tape.constant(attended), ad).value();
}

TokenSequence fuse(const TokenSequence& own, const Tensor& za, const Tensor& zb) {
    ag::Tape tape;
    return {own.modality, fuse(tape.constant(own.tokens), tape.constant(za), tape.constant(zb)).value()};
}

Tensor dimension_project(const Tensor& x, Parameter* project) {
    ag::Tape tape;
    return dimension_project(tape, tape.constant(x), project).value();
}

std::array<TokenSequence, kModalities> encoder_forward(const TokenSequence& visual, const TokenSequence& audio,
                                                       const TokenSequence& language, const EncoderStack& stack,
                                                       bool interactive) {
    ag::Tape tape;
    std::array<ag::Var, kModalities> x;
    const TokenSequence* in[kModalities] = {&visual, &audio, &language};
    for (std::size_t m = 0; m < kModalities; ++m) {
        if (in[m]->modality != static_cast<Modality>(m))
            throw std::invalid_argument(fmt::format("encoder_forward: argument {} is a {} sequence", m,
                                                    modality_name(in[m]->modality)));
        if (in[m]->tokens.rank() != 2 || in[m]->tokens.rows() == 0)
            throw DimensionError(fmt::format("{} sequence is empty", modality_name(in[m]->modality)));
        if (in[m]->tokens.cols() != stack.cfg.width(in[m]->modality))
            throw DimensionError(fmt::format("{} tokens have width {}, encoder width is {}",
                                             modality_name(in[m]->modality), in[m]->tokens.cols(),
                                             stack.cfg.width(in[m]->modality)));
        x[m] = tape.constant(in[m]->tokens);
    }
    auto out = encoder_forward(tape, stack, x, interactive);
    return {TokenSequence{Modality::kVisual, out[0].value()}, TokenSequence{Modality::kAudio, out[1].value()},
            TokenSequence{Modality::kLanguage, out[2].value()}};
}

}  // namespace mavqa::model

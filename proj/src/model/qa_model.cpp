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

#include "mavqa/model/qa_model.hpp"

#include <fmt/format.h>

namespace mavqa::model {

namespace {

struct Field {
    const char* name;
    std::size_t ModelConfig::*top = nullptr;
    std::size_t EncoderConfig::*xm = nullptr;
    std::size_t RSConfig::*rs = nullptr;
};

const Field kFields[] = {
    {"roi_width", &ModelConfig::roi_width},
    {"fusion_width", &ModelConfig::fusion_width},
    {"fusion_heads", &ModelConfig::fusion_heads},
    {"fusion_gate", &ModelConfig::fusion_gate},
    {"fusion_mix", &ModelConfig::fusion_mix},
    {"answers", &ModelConfig::answers},
    {"xmodal/d_visual", nullptr, &EncoderConfig::d_visual},
    {"xmodal/d_audio", nullptr, &EncoderConfig::d_audio},
    {"xmodal/d_language", nullptr, &EncoderConfig::d_language},
    {"xmodal/blocks", nullptr, &EncoderConfig::blocks},
    {"xmodal/inject_every", nullptr, &EncoderConfig::inject_every},
    {"xmodal/adapter_hidden", nullptr, &EncoderConfig::adapter_hidden},
    {"xmodal/visual_features", nullptr, &EncoderConfig::visual_features},
    {"xmodal/audio_features", nullptr, &EncoderConfig::audio_features},
    {"xmodal/visual_tokens", nullptr, &EncoderConfig::visual_tokens},
    {"xmodal/audio_tokens", nullptr, &EncoderConfig::audio_tokens},
    {"xmodal/language_tokens", nullptr, &EncoderConfig::language_tokens},
    {"xmodal/vocab", nullptr, &EncoderConfig::vocab},
    {"rs/width", nullptr, nullptr, &RSConfig::width},
    {"rs/blocks", nullptr, nullptr, &RSConfig::blocks},
    {"rs/hidden", nullptr, nullptr, &RSConfig::hidden},
    {"rs/segments", nullptr, nullptr, &RSConfig::segments},
    {"rs/visual_features", nullptr, nullptr, &RSConfig::visual_features},
    {"rs/audio_features", nullptr, nullptr, &RSConfig::audio_features},
    {"rs/rhythm_outputs", nullptr, nullptr, &RSConfig::rhythm_outputs},
    {"rs/source_outputs", nullptr, nullptr, &RSConfig::source_outputs},
};

std::size_t& field(ModelConfig& c, const Field& f) {
    if (f.top) return c.*f.top;
    if (f.xm) return c.xmodal.*f.xm;
    return c.rs.*f.rs;
}

}  // namespace

void put_config(Checkpoint& ck, const ModelConfig& cfg) {
    ModelConfig c = cfg;
    for (const auto& f : kFields) ck.put_scalar(std::string("config/") + f.name, static_cast<double>(field(c, f)));
    ck.put_scalar("config/xmodal/final_boundary_only", cfg.xmodal.final_boundary_only ? 1.0 : 0.0);
}

ModelConfig get_config(const Checkpoint& ck) {
    ModelConfig c;
    for (const auto& f : kFields)
        field(c, f) = static_cast<std::size_t>(ck.get_scalar(std::string("config/") + f.name));
    c.xmodal.final_boundary_only = ck.get_scalar("config/xmodal/final_boundary_only") != 0.0;
    return c;
}

QAModel::QAModel(const ModelConfig& c, std::uint64_t s) : cfg(c), seed(s) {
    const Initializer init(seed);
    xmodal = make_encoder_stack(params, init, cfg.xmodal, "xm");
    rs = make_rs_model(params, init, cfg.rs, "rs");
    const std::array<std::size_t, kModules> widths = {cfg.xmodal.d_visual, cfg.xmodal.d_audio, cfg.rs.width,
                                                      cfg.rs.width,        cfg.rs.width,       cfg.rs.width,
                                                      cfg.roi_width};
    head = make_fusion_head(params, init, widths, cfg.xmodal.d_language, cfg.fusion_width, cfg.answers,
                            cfg.fusion_heads, cfg.fusion_gate != 0, cfg.fusion_mix, "head");
}

ClipCache make_cache(const QAModel& m, ClipFeatures features) {
    ClipCache c;
    c.rs = rs_embeddings(m.rs, features);
    c.features = std::move(features);
    return c;
}

void refresh_cache(const QAModel& m, std::vector<ClipCache>& caches) {
    for (auto& c : caches) c.rs = rs_embeddings(m.rs, c.features);
}

HeadOutput forward(ag::Tape& tape, const QAModel& m, const ClipCache& clip, const std::vector<std::size_t>& question,
                   const Ablation& ablation) {
    if (clip.features.roi.size() != m.cfg.roi_width)
        throw DimensionError(fmt::format("RoI vector has {} values, model expects {}", clip.features.roi.size(),
                                         m.cfg.roi_width));
    EncoderInputs in{clip.features.patches, clip.features.mel_tokens, question};
    const auto fused = encoder_forward(tape, m.xmodal, in, !ablation.mie);
    ModuleBank bank;
    bank[0] = avg_pool(fused[0]);
    bank[1] = avg_pool(fused[1]);
    for (std::size_t i = 0; i < 4; ++i) bank[2 + i] = tape.constant(clip.rs[i].reshaped({1, clip.rs[i].size()}));
    bank[6] = tape.constant(clip.features.roi.reshaped({1, clip.features.roi.size()}));
    ag::Var gate_input;
    if (m.cfg.fusion_gate == 2) {
        // the question alone, without any exchange with the clip
        const auto& enc = m.xmodal.encoders[2];
        ag::Var x = embed_tokens(tape, enc, question);
        for (const auto& blk : enc.blocks) x = apply(tape, blk, x);
        gate_input = avg_pool(apply(tape, m.xmodal.out_norm[2], x));
    }
    return answer_logits(tape, m.head, bank, avg_pool(fused[2]), ablation, gate_input);
}

void save_model(const QAModel& m, Checkpoint& ck) {
    put_config(ck, m.cfg);
    // Two 32-bit halves: a double holds only 53 bits exactly.
    ck.put_scalar("config/seed_hi", static_cast<double>(m.seed >> 32));
    ck.put_scalar("config/seed_lo", static_cast<double>(m.seed & 0xffffffffULL));
    ck.put_params(m.params);
}

std::unique_ptr<QAModel> load_model(const Checkpoint& ck) {
    const auto seed = (static_cast<std::uint64_t>(ck.get_scalar("config/seed_hi")) << 32) |
                      static_cast<std::uint64_t>(ck.get_scalar("config/seed_lo"));
    auto m = std::make_unique<QAModel>(get_config(ck), seed);
    ck.load_params(m->params);
    return m;
}

}  // namespace mavqa::model

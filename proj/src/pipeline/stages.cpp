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

#include "mavqa/pipeline/stages.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "mavqa/annotate/source.hpp"
#include "mavqa/vision/roi.hpp"

namespace mavqa::pipeline {

model::FeatureConfig feature_config(const RunConfig& cfg) {
    model::FeatureConfig f;
    f.segment_seconds = cfg.rhythm.segment_seconds;
    f.band = cfg.rhythm.band;
    return f;
}

model::ModelConfig model_config(const RunConfig& cfg, const synth::Dataset& ds, const Catalog& catalog) {
    if (ds.specs.empty()) throw std::invalid_argument("dataset has no clips");
    const auto& spec = ds.specs.front();
    const auto f = feature_config(cfg);
    model::ModelConfig m = cfg.model;
    m.answers = ds.answers.size();
    m.xmodal.vocab = ds.vocabulary.size();
    m.xmodal.visual_features = f.visual_width();
    m.xmodal.audio_features = f.audio_width();
    m.xmodal.visual_tokens = f.patch_grid * f.patch_grid;
    m.xmodal.language_tokens = 16;
    for (const auto& s : ds.samples) m.xmodal.language_tokens = std::max(m.xmodal.language_tokens, s.tokens.size());
    const auto segments = static_cast<std::size_t>(spec.duration / f.segment_seconds + 1e-9);
    m.xmodal.audio_tokens = segments;
    m.rs.segments = segments;
    m.rs.visual_features = f.segment_visual_width();
    m.rs.audio_features = model::segment_audio_width(f, spec.sample_rate);
    m.rs.rhythm_outputs = segments - 1;
    m.rs.source_outputs = catalog.instruments.size();
    m.roi_width = 4 * catalog.detection_classes().size();
    return m;
}

std::vector<model::ClipFeatures> extract_all(const synth::Dataset& ds, const Catalog& catalog, const RunConfig& cfg) {
    const vision::ColorGlyphDetector det(catalog);
    const auto f = feature_config(cfg);
    std::vector<model::ClipFeatures> out;
    out.reserve(ds.specs.size());
    for (std::size_t i = 0; i < ds.specs.size(); ++i) out.push_back(model::extract_features(synth::load_clip(ds, catalog, i), det, f));
    return out;
}

std::vector<model::ClipCache> make_caches(const model::QAModel& m, std::vector<model::ClipFeatures> features) {
    std::vector<model::ClipCache> out;
    out.reserve(features.size());
    for (auto& f : features) out.push_back(model::make_cache(m, std::move(f)));
    return out;
}

std::vector<model::RSTargets> annotate_clips(const synth::Dataset& ds, const Catalog& catalog, std::size_t count,
                                             const RunConfig& cfg) {
    const annotate::StubBandSeparator sep(catalog.bands());
    const annotate::SourceConfig scfg{cfg.rhythm.segment_seconds, cfg.presence_threshold};
    std::vector<model::RSTargets> out;
    for (std::size_t i = 0; i < std::min(count, ds.specs.size()); ++i) {
        const auto clip = synth::load_clip(ds, catalog, i);
        out.push_back(model::rs_targets(annotate::rhythm_labels(clip.audio, cfg.rhythm),
                                        annotate::source_timeline(clip.audio, sep, scfg)));
    }
    return out;
}

std::vector<double> pretrain_encoders(model::QAModel& m, std::vector<model::ClipCache>& caches,
                                      const synth::Dataset& ds, const Catalog& catalog, const RunConfig& cfg) {
    const std::size_t n = cfg.pretrain_clips == 0 ? caches.size() : std::min(cfg.pretrain_clips, caches.size());
    const auto targets = annotate_clips(ds, catalog, n, cfg);
    OptimState opt;
    const auto losses =
        model::pretrain(m, std::span<const model::ClipCache>(caches).first(n), targets, cfg.pretrain, opt);
    model::freeze(m.params);
    model::refresh_cache(m, caches);
    spdlog::info("pretrained on {} clips, {} steps, loss {:.5f} -> {:.5f}", n, losses.size(), losses.front(),
                 losses.back());
    return losses;
}

void save_encoders(const model::QAModel& m, Checkpoint& ck) {
    model::put_config(ck, m.cfg);
    for (const auto& p : m.params)
        if (p.name.starts_with("rs.")) ck.put("param/" + p.name, p.value);
}

void load_encoders(model::QAModel& m, const Checkpoint& ck) {
    std::size_t n = 0;
    for (auto& p : m.params) {
        if (!p.name.starts_with("rs.")) continue;
        const Tensor& t = ck.get("param/" + p.name);
        if (t.shape() != p.value.shape())
            throw CheckpointError(fmt::format("encoder parameter '{}' has shape {} in checkpoint, model expects {}",
                                              p.name, shape_str(t.shape()), shape_str(p.value.shape())));
        p.value = t;
        ++n;
    }
    if (n == 0) throw CheckpointError("model has no rhythm/source encoder parameters");
    model::freeze(m.params);
}

nlohmann::json epochs_json(const std::vector<model::EpochRecord>& records) {
    auto j = nlohmann::json::array();
    for (const auto& r : records) j.push_back({{"epoch", r.epoch}, {"lr", r.lr}, {"loss", r.loss}});
    return j;
}

}  // namespace mavqa::pipeline

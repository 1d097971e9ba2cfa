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

#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "mavqa/model/features.hpp"
#include "mavqa/model/fusion.hpp"
#include "mavqa/model/rs.hpp"
#include "mavqa/model/xmodal.hpp"
#include "mavqa/numerics/checkpoint.hpp"

namespace mavqa::model {

struct ModelConfig {
    EncoderConfig xmodal;
    RSConfig rs;
    std::size_t roi_width = 24;
    std::size_t fusion_width = 32;
    std::size_t fusion_heads = 4;
    /// Elementwise gate on the attended vector: 0 none, 1 driven by the fused
    /// question vector, 2 by the question encoded without the other modalities.
    std::size_t fusion_gate = 0;
    std::size_t fusion_mix = 0;  // hidden width before the classifier; 0 for none
    std::size_t answers = 18;
};

void put_config(Checkpoint& ck, const ModelConfig& cfg);
/// Throws CheckpointError when a field is missing.
ModelConfig get_config(const Checkpoint& ck);

/// Interactive encoder, pretraining encoders and answer head over one ParamSet.
/// Not copyable or movable: modules point into the parameter storage.
struct QAModel {
    QAModel(const ModelConfig& cfg, std::uint64_t seed);
    QAModel(const QAModel&) = delete;
    QAModel& operator=(const QAModel&) = delete;

    ModelConfig cfg;
    std::uint64_t seed;
    ParamSet params;
    EncoderStack xmodal;
    RSModel rs;
    FusionHead head;
};

/// Per-clip inputs that do not depend on the question: extracted features and
/// the frozen pretraining encoders' pooled outputs.
struct ClipCache {
    ClipFeatures features;
    std::array<Tensor, 4> rs;
};

ClipCache make_cache(const QAModel& m, ClipFeatures features);
/// Recomputes the pooled pretraining outputs after the encoders change.
void refresh_cache(const QAModel& m, std::vector<ClipCache>& caches);

HeadOutput forward(ag::Tape& tape, const QAModel& m, const ClipCache& clip, const std::vector<std::size_t>& question,
                   const Ablation& ablation = {});

void save_model(const QAModel& m, Checkpoint& ck);
std::unique_ptr<QAModel> load_model(const Checkpoint& ck);

}  // namespace mavqa::model

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

#include <cstddef>
#include <vector>

#include <json.hpp>

#include "mavqa/catalog.hpp"
#include "mavqa/model/features.hpp"
#include "mavqa/model/qa_model.hpp"
#include "mavqa/model/train.hpp"
#include "mavqa/numerics/checkpoint.hpp"
#include "mavqa/pipeline/config.hpp"
#include "mavqa/synth/dataset.hpp"

// Building blocks shared by the command-line stages and the acceptance run.

namespace mavqa::pipeline {

model::FeatureConfig feature_config(const RunConfig& cfg);

/// The run's model hyperparameters completed with the dataset's vocabulary,
/// answer space and feature widths.
model::ModelConfig model_config(const RunConfig& cfg, const synth::Dataset& ds, const Catalog& catalog);

/// Features of every clip, in dataset order.
std::vector<model::ClipFeatures> extract_all(const synth::Dataset& ds, const Catalog& catalog, const RunConfig& cfg);

std::vector<model::ClipCache> make_caches(const model::QAModel& m, std::vector<model::ClipFeatures> features);

/// Rhythm and source annotations of the first `count` clips, as regression targets.
std::vector<model::RSTargets> annotate_clips(const synth::Dataset& ds, const Catalog& catalog, std::size_t count,
                                             const RunConfig& cfg);

/// Pretrains the rhythm and source encoders on the first clips, freezes them
/// and refreshes the caches. Returns the per-step losses.
std::vector<double> pretrain_encoders(model::QAModel& m, std::vector<model::ClipCache>& caches,
                                      const synth::Dataset& ds, const Catalog& catalog, const RunConfig& cfg);

/// Config, seed and the rhythm/source parameters only.
void save_encoders(const model::QAModel& m, Checkpoint& ck);
/// Copies rhythm/source parameters from a checkpoint written by
/// save_encoders and freezes them. Throws CheckpointError on a shape mismatch.
void load_encoders(model::QAModel& m, const Checkpoint& ck);

nlohmann::json epochs_json(const std::vector<model::EpochRecord>& records);

}  // namespace mavqa::pipeline

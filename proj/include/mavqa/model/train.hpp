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
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mavqa/annotate/rhythm.hpp"
#include "mavqa/annotate/source.hpp"
#include "mavqa/model/qa_model.hpp"
#include "mavqa/numerics/optim.hpp"
#include "mavqa/synth/qa.hpp"

namespace mavqa::model {

RSTargets rs_targets(const annotate::RhythmTimeline& rhythm, const annotate::SourceTimeline& source);

struct PretrainConfig {
    std::size_t epochs = 40;
    std::size_t batch = 10;
    double lr = 1e-3;
    std::uint64_t seed = 7;
};

/// Loss of every step, in order. Shuffles example order per epoch.
std::vector<double> pretrain(QAModel& m, std::span<const ClipCache> clips, std::span<const RSTargets> targets,
                             const PretrainConfig& cfg, OptimState& opt);

struct TrainConfig {
    std::size_t epochs = 30;
    std::size_t batch = 16;
    double lr = 1e-4;
    int decay_every = 5;
    double decay_factor = 0.5;
    std::uint64_t seed = 7;
};

/// Mean cross-entropy over the batch, then one Adam step at the state's LR.
/// Throws std::out_of_range for an answer outside the model's vocabulary.
double finetune_step(QAModel& m, std::span<const ClipCache> clips, std::span<const synth::QASample* const> batch,
                     OptimState& opt, const Ablation& ablation = {});

struct EpochRecord {
    int epoch = 0;
    double lr = 0.0;
    double loss = 0.0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Runs `cfg.epochs` epochs starting at `opt.epoch`; the LR follows
/// lr_at_epoch. Rhythm and source encoders must already be frozen.
std::vector<EpochRecord> finetune(QAModel& m, std::span<const ClipCache> clips,
                                  std::span<const synth::QASample> samples, const TrainConfig& cfg, OptimState& opt,
                                  const Ablation& ablation = {}, const EpochCallback& on_epoch = {});

struct CategoryStats {
    std::size_t total = 0;
    std::size_t correct = 0;
    std::array<double, kModules> importance{};
    double accuracy() const { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
};

struct EvalReport {
    std::size_t total = 0;
    std::size_t correct = 0;
    std::map<synth::Category, CategoryStats> categories;
    double accuracy() const { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
};

EvalReport evaluate(const QAModel& m, std::span<const ClipCache> clips, std::span<const synth::QASample> samples,
                    const Ablation& ablation = {});

nlohmann::json to_json(const EvalReport& r);
/// Rows per question category over the seven modules.
nlohmann::json importance_json(const EvalReport& r);

}  // namespace mavqa::model

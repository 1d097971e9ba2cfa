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
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mavqa/model/features.hpp"
#include "mavqa/model/layers.hpp"
#include "mavqa/numerics/optim.hpp"

// Rhythm and source encoders, pretrained to regress annotation labels from
// pooled visual and audio encodings, then frozen.

namespace mavqa::model {

struct RSConfig {
    std::size_t width = 24;
    std::size_t blocks = 2;
    std::size_t hidden = 48;  // predictor hidden widths
    std::size_t segments = 10;
    std::size_t visual_features = 192;
    std::size_t audio_features = 120;
    std::size_t rhythm_outputs = 9;  // boundary labels
    std::size_t source_outputs = 4;  // instrument classes
};

/// One visual and one audio branch.
struct RSEncoder {
    ModalityEncoder visual, audio;
};

/// Three linear layers, ReLU between, over concat(visual avg, audio avg).
struct PredictorHead {
    Linear l1, l2, l3;
};

struct RSModel {
    RSConfig cfg;
    RSEncoder rhythm, source;
    PredictorHead rhythm_head, source_head;
};

RSModel make_rs_model(ParamSet& ps, const Initializer& init, const RSConfig& cfg, const std::string& prefix = "rs");
PredictorHead make_predictor(ParamSet& ps, const Initializer& init, const std::string& name, std::size_t in,
                             std::size_t hidden, std::size_t out);

/// Column mean of a token matrix as a [1 x d] row.
ag::Var avg_pool(ag::Var tokens);
ag::Var predictor_forward(ag::Tape& tape, ag::Var xv_avg, ag::Var xa_avg, const PredictorHead& head);
Tensor predictor_forward(const Tensor& xv_avg, const Tensor& xa_avg, const PredictorHead& head);

/// Regression targets: boundary labels, and per-class active-segment totals divided by n.
struct RSTargets {
    Tensor rhythm;
    Tensor source;
};

struct RSExample {
    const ClipFeatures* features = nullptr;
    RSTargets targets;
};

struct RSPooled {
    std::array<ag::Var, 4> pooled;  // rhythm-visual, rhythm-audio, source-visual, source-audio
    ag::Var rhythm, source;         // predictions
};

RSPooled rs_forward(ag::Tape& tape, const RSModel& m, const ClipFeatures& f);

/// Sum of the two mean squared errors for one example.
ag::Var rs_loss(ag::Tape& tape, const RSModel& m, const RSExample& ex);

/// Mean example loss over the batch and one Adam step. Returns the loss
/// measured before the step.
double pretrain_step(ParamSet& params, const RSModel& m, std::span<const RSExample> batch, OptimState& opt);

/// Marks every parameter under `prefix` frozen. Calling it twice changes nothing.
std::size_t freeze(ParamSet& params, const std::string& prefix = "rs.");

/// Pooled encodings of a clip as four [d] vectors, for caching.
std::array<Tensor, 4> rs_embeddings(const RSModel& m, const ClipFeatures& f);

}  // namespace mavqa::model

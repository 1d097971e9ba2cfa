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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mavqa/model/layers.hpp"

// Final attention layer: the question attends over seven module vectors and
// the attended vector is classified into the answer vocabulary.

namespace mavqa::model {

inline constexpr std::size_t kModules = 7;

enum class Slot : std::uint8_t {
    kXmodalVisual,
    kXmodalAudio,
    kRhythmVisual,
    kRhythmAudio,
    kSourceVisual,
    kSourceAudio,
    kRoi,
};

std::string_view slot_name(Slot s);
const std::array<std::string, kModules>& slot_names();

/// Modules removed from the bank. Removing the interactive encoder also
/// runs the three encoders without adapters.
struct Ablation {
    bool mie = false;
    bool rhythm = false;
    bool source = false;
    bool roi = false;

    bool empty() const { return !mie && !rhythm && !source && !roi; }
    bool removes(Slot s) const;
    std::string label() const;
};

/// Comma-separated subset of {mie, rhy, src, rois}; empty string for none.
/// Throws std::invalid_argument naming an unknown module.
Ablation parse_ablation(std::string_view list);

/// One attention head over the bank.
struct FusionAttention {
    Linear query;             // question width -> d_head
    Parameter* wk = nullptr;  // [d x d_head]
    Parameter* wv = nullptr;  // [d x d_head]
    std::size_t d_head = 0;
};

struct FusionHead {
    /// Per-slot input normalization. The RoI slot has none: its pooled
    /// detection counts are absolute and normalizing them erases the count.
    std::array<std::optional<LayerNormParams>, kModules> norm;
    std::array<Linear, kModules> project;  // module width -> d, after norm
    std::vector<FusionAttention> heads;    // outputs concatenated to width d
    /// Optional elementwise modulation of the attended vector by a linear map of the question.
    std::optional<Linear> gate;  // question width -> d
    /// Optional hidden layer over [attended | question]; absent when mix is 0.
    std::optional<Linear> mix;
    Linear classifier;  // d (or mix width) -> answers
    std::size_t d = 0;
};

/// `heads` must divide `d`. With `gate` the attended vector is multiplied
/// elementwise by (G q + g). With `mix` > 0 the classifier then reads
/// relu(W [attended | question] + b) instead of the attended vector.
FusionHead make_fusion_head(ParamSet& ps, const Initializer& init, const std::array<std::size_t, kModules>& widths,
                            std::size_t question_width, std::size_t d, std::size_t answers, std::size_t heads = 1,
                            bool gate = false, std::size_t mix = 0, const std::string& prefix = "head");

/// Module vectors as [1 x width] rows; an empty slot must be ablated.
using ModuleBank = std::array<std::optional<ag::Var>, kModules>;

struct HeadOutput {
    ag::Var logits;                     // [1 x answers]
    std::vector<ag::Var> head_weights;  // [1 x 7] per attention head
    /// Attention over the bank, averaged across heads.
    std::array<double, kModules> weights() const;
};

/// `gate_input` feeds the gate when valid; otherwise the gate reads `question`.
HeadOutput answer_logits(ag::Tape& tape, const FusionHead& head, const ModuleBank& bank, ag::Var question,
                         const Ablation& ablation = {}, ag::Var gate_input = {});

/// Mean of attention rows. Throws std::invalid_argument when `rows` is empty.
std::array<double, kModules> importance_scores(const std::vector<std::array<double, kModules>>& rows);

}  // namespace mavqa::model

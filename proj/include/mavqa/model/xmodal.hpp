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
#include <string_view>
#include <vector>

#include "mavqa/model/layers.hpp"

namespace mavqa::model {

enum class Modality : std::uint8_t { kVisual = 0, kAudio = 1, kLanguage = 2 };
inline constexpr std::size_t kModalities = 3;
std::string_view modality_name(Modality m);

struct TokenSequence {
    Modality modality;
    Tensor tokens;  // [T x d]
};

/// One directed exchange: the target modality's tokens query the source's.
struct CrossModalAdapter {
    Parameter* project = nullptr;  // [d_source x d_target], null when the widths match
    Parameter *wq = nullptr, *wk = nullptr, *wv = nullptr;  // [d x d]
    Parameter *w1 = nullptr, *b1 = nullptr;                 // [d x h], [h]
    Parameter *w2 = nullptr, *b2 = nullptr;                 // [h x d], [d]
    std::size_t d_source = 0, d = 0, h = 0;
};

CrossModalAdapter make_adapter(ParamSet& ps, const Initializer& init, const std::string& name, std::size_t d_source,
                               std::size_t d_target, std::size_t hidden);

struct EncoderConfig {
    std::size_t d_visual = 32, d_audio = 32, d_language = 32;
    std::size_t blocks = 6;
    std::size_t inject_every = 3;
    std::size_t adapter_hidden = 32;
    /// Fire adapters only after the last block instead of at every boundary.
    bool final_boundary_only = false;

    std::size_t visual_features = 48, audio_features = 64;
    std::size_t visual_tokens = 16, audio_tokens = 10, language_tokens = 16;
    std::size_t vocab = 1;

    std::size_t width(Modality m) const;
    /// Block indices after which adapters fire.
    std::vector<std::size_t> boundaries() const;
};

/// Adapters at one boundary, indexed [target][source]; the diagonal is unused.
using AdapterGrid = std::array<std::array<CrossModalAdapter, kModalities>, kModalities>;

struct EncoderStack {
    EncoderConfig cfg;
    std::array<ModalityEncoder, kModalities> encoders;
    std::array<LayerNormParams, kModalities> out_norm;  // applied to the final sequences
    std::vector<AdapterGrid> adapters;  // one grid per boundary
};

EncoderStack make_encoder_stack(ParamSet& ps, const Initializer& init, const EncoderConfig& cfg,
                                const std::string& prefix = "xm");

// Tape forms. `kv` must already be at the adapter's target width.
ag::Var attention_scores(ag::Tape& tape, ag::Var query, ag::Var kv, const CrossModalAdapter& ad);
ag::Var cross_modal_attention(ag::Tape& tape, ag::Var query, ag::Var kv, const CrossModalAdapter& ad);
ag::Var adapter_forward(ag::Tape& tape, ag::Var attended, const CrossModalAdapter& ad);
ag::Var fuse(ag::Var own, ag::Var za, ag::Var zb);
ag::Var dimension_project(ag::Tape& tape, ag::Var x, Parameter* project);

struct EncoderInputs {
    Tensor visual;                    // [T_v x visual_features]
    Tensor audio;                     // [T_a x audio_features]
    std::vector<std::size_t> question;  // token ids
};

/// Runs the three block lists in lockstep. With `interactive` false the
/// adapters are skipped and the encoders run independently.
std::array<ag::Var, kModalities> encoder_forward(ag::Tape& tape, const EncoderStack& stack, const EncoderInputs& in,
                                                 bool interactive = true);

/// Same, starting from already-embedded sequences.
std::array<ag::Var, kModalities> encoder_forward(ag::Tape& tape, const EncoderStack& stack,
                                                 std::array<ag::Var, kModalities> x, bool interactive = true);

// Tensor forms for inspection and tests.
Tensor attention_scores(const TokenSequence& query, const TokenSequence& kv, const CrossModalAdapter& ad);
Tensor cross_modal_attention(const TokenSequence& query, const TokenSequence& kv, const CrossModalAdapter& ad);
Tensor adapter_forward(const Tensor& attended, const CrossModalAdapter& ad);
TokenSequence fuse(const TokenSequence& own, const Tensor& za, const Tensor& zb);
Tensor dimension_project(const Tensor& x, Parameter* project);
std::array<TokenSequence, kModalities> encoder_forward(const TokenSequence& visual, const TokenSequence& audio,
                                                       const TokenSequence& language, const EncoderStack& stack,
                                                       bool interactive = true);

}  // namespace mavqa::model

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
#include <optional>
#include <string>
#include <vector>

#include "mavqa/numerics/autograd.hpp"
#include "mavqa/numerics/params.hpp"

// Building blocks shared by every encoder. Modules hold pointers into a
// ParamSet and bind them onto a tape per forward pass.

namespace mavqa::model {

struct Linear {
    Parameter* w = nullptr;  // [in x out]
    Parameter* b = nullptr;  // [out], may be null
    std::size_t in = 0, out = 0;
};

Linear make_linear(ParamSet& ps, const Initializer& init, const std::string& name, std::size_t in, std::size_t out,
                   bool bias = true);
ag::Var apply(ag::Tape& tape, const Linear& l, ag::Var x);

struct LayerNormParams {
    Parameter* gain = nullptr;
    Parameter* bias = nullptr;
};

LayerNormParams make_layer_norm(ParamSet& ps, const std::string& name, std::size_t d);
ag::Var apply(ag::Tape& tape, const LayerNormParams& ln, ag::Var x);

/// Pre-norm single-head block: x + attn(ln1 x), then + ffn(ln2 .).
struct TransformerBlock {
    LayerNormParams ln1, ln2;
    Parameter *wq = nullptr, *wk = nullptr, *wv = nullptr, *wo = nullptr;
    Linear ff1, ff2;
    std::size_t d = 0;
};

TransformerBlock make_block(ParamSet& ps, const Initializer& init, const std::string& name, std::size_t d);
ag::Var apply(ag::Tape& tape, const TransformerBlock& blk, ag::Var x);

/// Input embedding (a linear map over feature rows, or a lookup table over
/// token ids) plus learned positions, followed by a block list.
struct ModalityEncoder {
    std::optional<Linear> embed;
    Parameter* table = nullptr;  // [vocab x d] when tokens are ids
    Parameter* pos = nullptr;    // [max_tokens x d]
    std::vector<TransformerBlock> blocks;
    std::size_t d = 0;
    std::size_t max_tokens = 0;
};

ModalityEncoder make_feature_encoder(ParamSet& ps, const Initializer& init, const std::string& name,
                                     std::size_t in_width, std::size_t d, std::size_t max_tokens,
                                     std::size_t blocks);
ModalityEncoder make_token_encoder(ParamSet& ps, const Initializer& init, const std::string& name,
                                   std::size_t vocab, std::size_t d, std::size_t max_tokens, std::size_t blocks);

/// Embedded input rows with positions added, before any block.
ag::Var embed_features(ag::Tape& tape, const ModalityEncoder& enc, const Tensor& features);
ag::Var embed_tokens(ag::Tape& tape, const ModalityEncoder& enc, const std::vector<std::size_t>& ids);

/// Embedding followed by every block.
ag::Var encode_features(ag::Tape& tape, const ModalityEncoder& enc, const Tensor& features);

}  // namespace mavqa::model

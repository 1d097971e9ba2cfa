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

#include "mavqa/model/layers.hpp"

#include <cmath>

#include <fmt/format.h>

#include "mavqa/numerics/tensor.hpp"

namespace mavqa::model {

Linear make_linear(ParamSet& ps, const Initializer& init, const std::string& name, std::size_t in, std::size_t out,
                   bool bias) {
    Linear l;
    l.in = in;
    l.out = out;
    l.w = &ps.add(name + ".w", init.uniform_fan_in(name + ".w", {in, out}, in));
    if (bias) l.b = &ps.add(name + ".b", init.uniform_fan_in(name + ".b", {out}, in));
    return l;
}

ag::Var apply(ag::Tape& tape, const Linear& l, ag::Var x) {
    ag::Var y = ag::matmul(x, tape.param(*l.w));
    return l.b ? ag::add_bias(y, tape.param(*l.b)) : y;
}

LayerNormParams make_layer_norm(ParamSet& ps, const std::string& name, std::size_t d) {
    Tensor ones({d});
    ones.fill(1.0);
    return {&ps.add(name + ".gain", std::move(ones)), &ps.add(name + ".bias", Tensor({d}))};
}

ag::Var apply(ag::Tape& tape, const LayerNormParams& ln, ag::Var x) {
    return ag::layer_norm(x, tape.param(*ln.gain), tape.param(*ln.bias));
}

TransformerBlock make_block(ParamSet& ps, const Initializer& init, const std::string& name, std::size_t d) {
    TransformerBlock b;
    b.d = d;
    b.ln1 = make_layer_norm(ps, name + ".ln1", d);
    b.ln2 = make_layer_norm(ps, name + ".ln2", d);
    auto square = [&](const char* tag) {
        const std::string n = name + "." + tag;
        return &ps.add(n, init.uniform_fan_in(n, {d, d}, d));
    };
    b.wq = square("wq");
    b.wk = square("wk");
    b.wv = square("wv");
    b.wo = square("wo");
    b.ff1 = make_linear(ps, init, name + ".ff1", d, 2 * d);
    b.ff2 = make_linear(ps, init, name + ".ff2", 2 * d, d);
    return b;
}

ag::Var apply(ag::Tape& tape, const TransformerBlock& blk, ag::Var x) {
    ag::Var h = apply(tape, blk.ln1, x);
    ag::Var q = ag::matmul(h, tape.param(*blk.wq));
    ag::Var k = ag::matmul(h, tape.param(*blk.wk));
    ag::Var v = ag::matmul(h, tape.param(*blk.wv));
    ag::Var att = ag::softmax_rows(ag::scale(ag::matmul_nt(q, k), 1.0 / std::sqrt(static_cast<double>(blk.d))));
    x = ag::add(x, ag::matmul(ag::matmul(att, v), tape.param(*blk.wo)));
    ag::Var f = ag::relu(apply(tape, blk.ff1, apply(tape, blk.ln2, x)));
    return ag::add(x, apply(tape, blk.ff2, f));
}

namespace {

Parameter* make_positions(ParamSet& ps, const Initializer& init, const std::string& name, std::size_t max_tokens,
                          std::size_t d) {
    return &ps.add(name + ".pos", init.uniform_fan_in(name + ".pos", {max_tokens, d}, max_tokens));
}

std::vector<std::size_t> first_rows(std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    return idx;
}

void check_count(const ModalityEncoder& enc, std::size_t n) {
    if (n == 0) throw DimensionError("encoder input has no tokens");
    if (n > enc.max_tokens)
        throw DimensionError(fmt::format("encoder input has {} tokens, limit is {}", n, enc.max_tokens));
}

}  // namespace

ModalityEncoder make_feature_encoder(ParamSet& ps, const Initializer& init, const std::string& name,
                                     std::size_t in_width, std::size_t d, std::size_t max_tokens,
                                     std::size_t blocks) {
    ModalityEncoder e;
    e.d = d;
    e.max_tokens = max_tokens;
    e.embed = make_linear(ps, init, name + ".embed", in_width, d);
    e.pos = make_positions(ps, init, name, max_tokens, d);
    for (std::size_t i = 0; i < blocks; ++i) e.blocks.push_back(make_block(ps, init, fmt::format("{}.block{}", name, i), d));
    return e;
}

ModalityEncoder make_token_encoder(ParamSet& ps, const Initializer& init, const std::string& name,
                                   std::size_t vocab, std::size_t d, std::size_t max_tokens, std::size_t blocks) {
    ModalityEncoder e;
    e.d = d;
    e.max_tokens = max_tokens;
    e.table = &ps.add(name + ".words", init.uniform_fan_in(name + ".words", {vocab, d}, vocab));
    e.pos = make_positions(ps, init, name, max_tokens, d);
    for (std::size_t i = 0; i < blocks; ++i) e.blocks.push_back(make_block(ps, init, fmt::format("{}.block{}", name, i), d));
    return e;
}

ag::Var embed_features(ag::Tape& tape, const ModalityEncoder& enc, const Tensor& features) {
    if (!enc.embed) throw std::logic_error("encoder takes token ids, not features");
    if (features.rank() != 2 || features.cols() != enc.embed->in)
        throw DimensionError(fmt::format("encoder expects [T x {}] features, got {}", enc.embed->in,
                                         shape_str(features.shape())));
    check_count(enc, features.rows());
    ag::Var x = apply(tape, *enc.embed, tape.constant(features));
    return ag::add(x, ag::gather_rows(tape.param(*enc.pos), first_rows(features.rows())));
}

ag::Var embed_tokens(ag::Tape& tape, const ModalityEncoder& enc, const std::vector<std::size_t>& ids) {
    if (!enc.table) throw std::logic_error("encoder takes features, not token ids");
    check_count(enc, ids.size());
    const std::size_t vocab = enc.table->value.rows();
    for (auto id : ids)
        if (id >= vocab) throw DimensionError(fmt::format("token id {} outside vocabulary of {}", id, vocab));
    ag::Var x = ag::gather_rows(tape.param(*enc.table), ids);
    return ag::add(x, ag::gather_rows(tape.param(*enc.pos), first_rows(ids.size())));
}

ag::Var encode_features(ag::Tape& tape, const ModalityEncoder& enc, const Tensor& features) {
    ag::Var x = embed_features(tape, enc, features);
    for (const auto& b : enc.blocks) x = apply(tape, b, x);
    return x;
}

}  // namespace mavqa::model

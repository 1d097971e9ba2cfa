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
#include <cstdint>
#include <deque>
#include <span>
#include <stdexcept>
#include <vector>

#include "mavqa/numerics/params.hpp"
#include "mavqa/numerics/tensor.hpp"

// Reverse-mode tape over the small op vocabulary the models need. One tape
// records one forward pass; backward() walks it once and accumulates into
// the gradient slots of the bound parameters.

namespace mavqa::ag {

enum class Op : std::uint8_t {
    kConstant,
    kParam,
    kMatmul,
    kMatmulNT,
    kAdd,
    kAddBias,
    kMul,
    kRelu,
    kScale,
    kSoftmaxRows,
    kLayerNorm,
    kMeanRows,
    kConcatCols,
    kConcatRows,
    kGatherRows,
    kMse,
    kSoftmaxXent,
    kArgmaxOneHot,  // forward only
    kCount,
};

const char* op_name(Op op);

class UnsupportedOpError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class Tape;

/// Handle to a tape node.
struct Var {
    Tape* tape = nullptr;
    std::uint32_t id = 0;

    const Tensor& value() const;
    bool valid() const { return tape != nullptr; }
};

class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Tensor value);
    /// Binds a parameter. Its value is copied onto the tape; gradients flow
    /// back into `p.grad` unless the parameter is frozen.
    Var param(Parameter& p);

    const Tensor& value(Var v) const { return nodes_[v.id].value; }
    /// Gradient of the last backward() loss with respect to `v`; zeros if unreached.
    Tensor grad(Var v) const;
    bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }

    /// d(loss)/d(everything). `loss` must hold a single element.
    void backward(Var loss);

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Op op = Op::kConstant;
        Tensor value;
        Tensor grad;
        std::uint32_t in[2] = {0, 0};
        std::uint8_t n_in = 0;
        bool requires_grad = false;
        Parameter* param = nullptr;
        double attr = 0.0;
        std::vector<double> aux;
        std::vector<std::uint32_t> links;  // concat_rows inputs
        std::vector<std::size_t> index;    // gather indices / xent target
    };

    Var push(Node n);
    Node& node(Var v) { return nodes_[v.id]; }
    Tensor& grad_slot(std::uint32_t id);

    void backprop_node(std::uint32_t id);

    std::deque<Node> nodes_;

    friend Var matmul(Var, Var);
    friend Var matmul_nt(Var, Var);
    friend Var add(Var, Var);
    friend Var add_bias(Var, Var);
    friend Var mul(Var, Var);
    friend Var relu(Var);
    friend Var scale(Var, double);
    friend Var softmax_rows(Var);
    friend Var layer_norm(Var, Var, Var, double);
    friend Var mean_rows(Var);
    friend Var concat_cols(Var, Var);
    friend Var concat_rows(std::span<const Var>);
    friend Var gather_rows(Var, std::vector<std::size_t>);
    friend Var mse(Var, Var);
    friend Var softmax_cross_entropy(Var, std::size_t);
    friend Var argmax_one_hot(Var);
};

Var matmul(Var a, Var b);
/// a * b^T
Var matmul_nt(Var a, Var b);
Var add(Var a, Var b);
Var add_bias(Var x, Var b);
/// Elementwise product of equal shapes.
Var mul(Var a, Var b);
inline Var linear(Var x, Var w, Var b) { return add_bias(matmul(x, w), b); }
Var relu(Var x);
Var scale(Var x, double s);
Var softmax_rows(Var x);
Var layer_norm(Var x, Var gamma, Var beta, double eps = 1e-5);
/// Column mean of [T x d], as [1 x d].
Var mean_rows(Var x);
Var concat_cols(Var a, Var b);
Var concat_rows(std::span<const Var> parts);
Var gather_rows(Var table, std::vector<std::size_t> idx);
/// Mean squared error over all elements, shape [1].
Var mse(Var pred, Var target);
/// -log softmax(logits)[target] for a single row of logits, shape [1].
Var softmax_cross_entropy(Var logits, std::size_t target);
/// One-hot of the row-wise argmax. Not differentiable.
Var argmax_one_hot(Var x);

}  // namespace mavqa::ag

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

#include "mavqa/numerics/autograd.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/format.h>

#include "mavqa/numerics/ops.hpp"
#include "mavqa/simd/kernels.hpp"

namespace mavqa::ag {

const char* op_name(Op op) {
    switch (op) {
        case Op::kConstant: return "constant";
        case Op::kParam: return "param";
        case Op::kMatmul: return "matmul";
        case Op::kMatmulNT: return "matmul_nt";
        case Op::kAdd: return "add";
        case Op::kAddBias: return "add_bias";
        case Op::kMul: return "mul";
        case Op::kRelu: return "relu";
        case Op::kScale: return "scale";
        case Op::kSoftmaxRows: return "softmax_rows";
        case Op::kLayerNorm: return "layer_norm";
        case Op::kMeanRows: return "mean_rows";
        case Op::kConcatCols: return "concat_cols";
        case Op::kConcatRows: return "concat_rows";
        case Op::kGatherRows: return "gather_rows";
        case Op::kMse: return "mse";
        case Op::kSoftmaxXent: return "softmax_cross_entropy";
        case Op::kArgmaxOneHot: return "argmax_one_hot";
        case Op::kCount: break;
    }
    return "?";
}

const Tensor& Var::value() const { return tape->value(*this); }

namespace {

Tape* same_tape(Var a, Var b) {
    if (a.tape == nullptr || a.tape != b.tape) throw std::logic_error("vars from different tapes");
    return a.tape;
}

}  // namespace

Var Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::constant(Tensor value) {
    Node n;
    n.op = Op::kConstant;
    n.value = std::move(value);
    return push(std::move(n));
}

Var Tape::param(Parameter& p) {
    Node n;
    n.op = Op::kParam;
    n.value = p.value;
    n.param = &p;
    n.requires_grad = !p.frozen;
    return push(std::move(n));
}

Tensor& Tape::grad_slot(std::uint32_t id) {
    Node& n = nodes_[id];
    if (n.grad.empty()) n.grad = Tensor(n.value.shape());
    return n.grad;
}

Tensor Tape::grad(Var v) const {
    const Node& n = nodes_[v.id];
    return n.grad.empty() ? Tensor(n.value.shape()) : n.grad;
}

void Tape::backward(Var loss) {
    if (loss.tape != this) throw std::logic_error("backward: loss belongs to another tape");
    if (nodes_[loss.id].value.size() != 1)
        throw DimensionError("backward: loss must be a single element, got " +
                             shape_str(nodes_[loss.id].value.shape()));
    for (auto& n : nodes_) n.grad = Tensor();
    if (!nodes_[loss.id].requires_grad) return;
    grad_slot(loss.id).fill(1.0);
    for (std::int64_t id = loss.id; id >= 0; --id) {
        const Node& n = nodes_[static_cast<std::size_t>(id)];
        if (!n.requires_grad || n.grad.empty()) continue;
        backprop_node(static_cast<std::uint32_t>(id));
    }
}

// Each case pushes n.grad into the gradient slots of the node's inputs.
void Tape::backprop_node(std::uint32_t id) {
    Node& n = nodes_[id];
    const auto& k = simd::kernels();
    const Tensor& g = n.grad;
    auto wants = [&](int i) { return nodes_[n.in[i]].requires_grad; };

    switch (n.op) {
        case Op::kConstant:
            return;
        case Op::kParam:
            if (n.param && !n.param->frozen)
                k.axpy(1.0, g.ptr(), n.param->grad.ptr(), g.size());
            return;
        case Op::kMatmul: {
            const Tensor& a = nodes_[n.in[0]].value;
            const Tensor& b = nodes_[n.in[1]].value;
            const std::size_t m = a.rows(), kk = a.cols(), nn = b.cols();
            if (wants(0)) k.gemm_nt(m, kk, nn, g.ptr(), nn, b.ptr(), nn, grad_slot(n.in[0]).ptr(), kk, true);
            if (wants(1)) k.gemm_tn(kk, nn, m, a.ptr(), kk, g.ptr(), nn, grad_slot(n.in[1]).ptr(), nn, true);
            return;
        }
        case Op::kMatmulNT: {
            const Tensor& a = nodes_[n.in[0]].value;
            const Tensor& b = nodes_[n.in[1]].value;
            const std::size_t m = a.rows(), kk = a.cols(), nn = b.rows();
            if (wants(0)) k.gemm_nn(m, kk, nn, g.ptr(), nn, b.ptr(), kk, grad_slot(n.in[0]).ptr(), kk, true);
            if (wants(1)) k.gemm_tn(nn, kk, m, g.ptr(), nn, a.ptr(), kk, grad_slot(n.in[1]).ptr(), kk, true);
            return;
        }
        case Op::kAdd:
            for (int i = 0; i < 2; ++i)
                if (wants(i)) k.axpy(1.0, g.ptr(), grad_slot(n.in[i]).ptr(), g.size());
            return;
        case Op::kAddBias: {
            if (wants(0)) k.axpy(1.0, g.ptr(), grad_slot(n.in[0]).ptr(), g.size());
            if (wants(1)) {
                Tensor& gb = grad_slot(n.in[1]);
                for (std::size_t r = 0; r < g.rows(); ++r) k.axpy(1.0, g.row(r).data(), gb.ptr(), gb.size());
            }
            return;
        }
        case Op::kMul: {
            const Tensor& a = nodes_[n.in[0]].value;
            const Tensor& b = nodes_[n.in[1]].value;
            if (wants(0)) {
                Tensor& ga = grad_slot(n.in[0]);
                for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * b[i];
            }
            if (wants(1)) {
                Tensor& gb = grad_slot(n.in[1]);
                for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * a[i];
            }
            return;
        }
        case Op::kRelu: {
            if (!wants(0)) return;
            Tensor& gx = grad_slot(n.in[0]);
            for (std::size_t i = 0; i < g.size(); ++i)
                if (n.value[i] > 0.0) gx[i] += g[i];
            return;
        }
        case Op::kScale:
            if (wants(0)) k.axpy(n.attr, g.ptr(), grad_slot(n.in[0]).ptr(), g.size());
            return;
        case Op::kSoftmaxRows: {
            if (!wants(0)) return;
            Tensor& gx = grad_slot(n.in[0]);
            const Tensor& y = n.value;
            for (std::size_t r = 0; r < y.rows(); ++r) {
                auto yr = y.row(r);
                auto gr = g.row(r);
                auto out = gx.row(r);
                const double s = k.dot(yr.data(), gr.data(), yr.size());
                for (std::size_t j = 0; j < yr.size(); ++j) out[j] += yr[j] * (gr[j] - s);
            }
            return;
        }
        case Op::kLayerNorm: {
            // aux holds xhat (rows x d) followed by rstd per row.
            const std::size_t rows = n.value.rows(), d = n.value.cols();
            const double* xhat = n.aux.data();
            const double* rstd = n.aux.data() + rows * d;
            const Tensor& gamma = nodes_[n.in[1]].value;
            if (n.links.size() == 1 && nodes_[n.links[0]].requires_grad) {
                Tensor& gb = grad_slot(n.links[0]);
                for (std::size_t r = 0; r < rows; ++r) k.axpy(1.0, g.row(r).data(), gb.ptr(), d);
            }
            if (wants(1)) {
                Tensor& gg = grad_slot(n.in[1]);
                for (std::size_t r = 0; r < rows; ++r)
                    for (std::size_t j = 0; j < d; ++j) gg[j] += g.at(r, j) * xhat[r * d + j];
            }
            if (wants(0)) {
                Tensor& gx = grad_slot(n.in[0]);
                std::vector<double> gh(d);
                for (std::size_t r = 0; r < rows; ++r) {
                    double mean_gh = 0.0, mean_ghx = 0.0;
                    for (std::size_t j = 0; j < d; ++j) {
                        gh[j] = g.at(r, j) * gamma[j];
                        mean_gh += gh[j];
                        mean_ghx += gh[j] * xhat[r * d + j];
                    }
                    mean_gh /= static_cast<double>(d);
                    mean_ghx /= static_cast<double>(d);
                    for (std::size_t j = 0; j < d; ++j)
                        gx.at(r, j) += rstd[r] * (gh[j] - mean_gh - xhat[r * d + j] * mean_ghx);
                }
            }
            return;
        }
        case Op::kMeanRows: {
            if (!wants(0)) return;
            Tensor& gx = grad_slot(n.in[0]);
            const double inv = 1.0 / static_cast<double>(gx.rows());
            for (std::size_t r = 0; r < gx.rows(); ++r) k.axpy(inv, g.ptr(), gx.row(r).data(), g.size());
            return;
        }
        case Op::kConcatCols: {
            const std::size_t ca = nodes_[n.in[0]].value.cols();
            const std::size_t cb = nodes_[n.in[1]].value.cols();
            for (std::size_t r = 0; r < g.rows(); ++r) {
                auto gr = g.row(r);
                if (wants(0)) k.axpy(1.0, gr.data(), grad_slot(n.in[0]).row(r).data(), ca);
                if (wants(1)) k.axpy(1.0, gr.data() + ca, grad_slot(n.in[1]).row(r).data(), cb);
            }
            return;
        }
        case Op::kConcatRows: {
            std::size_t offset = 0;
            for (auto src : n.links) {
                const std::size_t len = nodes_[src].value.size();
                if (nodes_[src].requires_grad) k.axpy(1.0, g.ptr() + offset, grad_slot(src).ptr(), len);
                offset += len;
            }
            return;
        }
        case Op::kGatherRows: {
            if (!wants(0)) return;
            Tensor& gt = grad_slot(n.in[0]);
            for (std::size_t i = 0; i < n.index.size(); ++i)
                k.axpy(1.0, g.row(i).data(), gt.row(n.index[i]).data(), gt.cols());
            return;
        }
        case Op::kMse: {
            const Tensor& p = nodes_[n.in[0]].value;
            const Tensor& t = nodes_[n.in[1]].value;
            const double c = 2.0 * g[0] / static_cast<double>(p.size());
            if (wants(0)) {
                Tensor& gp = grad_slot(n.in[0]);
                for (std::size_t i = 0; i < p.size(); ++i) gp[i] += c * (p[i] - t[i]);
            }
            if (wants(1)) {
                Tensor& gt = grad_slot(n.in[1]);
                for (std::size_t i = 0; i < p.size(); ++i) gt[i] -= c * (p[i] - t[i]);
            }
            return;
        }
        case Op::kSoftmaxXent: {
            if (!wants(0)) return;
            Tensor& gl = grad_slot(n.in[0]);
            for (std::size_t j = 0; j < n.aux.size(); ++j)
                gl[j] += g[0] * (n.aux[j] - (j == n.index[0] ? 1.0 : 0.0));
            return;
        }
        case Op::kArgmaxOneHot:
        case Op::kCount:
            break;
    }
    throw UnsupportedOpError(fmt::format("backward: no gradient rule for op '{}' (node {})", op_name(n.op), id));
}

Var matmul(Var a, Var b) {
    Tape* t = same_tape(a, b);
    Tape::Node n;
    n.op = Op::kMatmul;
    n.value = ops::matmul(a.value(), b.value());
    n.in[0] = a.id;
    n.in[1] = b.id;
    n.n_in = 2;
    n.requires_grad = t->requires_grad(a) || t->requires_grad(b);
    return t->push(std::move(n));
}

Var matmul_nt(Var a, Var b) {
    Tape* t = same_tape(a, b);
    Tape::Node n;
    n.op = Op::kMatmulNT;
    n.value = ops::matmul_nt(a.value(), b.value());
    n.in[0] = a.id;
    n.in[1] = b.id;
    n.n_in = 2;
    n.requires_grad = t->requires_grad(a) || t->requires_grad(b);
    return t->push(std::move(n));
}

Var add(Var a, Var b) {
    Tape* t = same_tape(a, b);
    Tape::Node n;
    n.op = Op::kAdd;
    n.value = ops::add(a.value(), b.value());
    n.in[0] = a.id;
    n.in[1] = b.id;
    n.n_in = 2;
    n.requires_grad = t->requires_grad(a) || t->requires_grad(b);
    return t->push(std::move(n));
}

Var mul(Var a, Var b) {
    Tape* t = same_tape(a, b);
    Tape::Node n;
    n.op = Op::kMul;
    n.value = ops::mul(a.value(), b.value());
    n.in[0] = a.id;
    n.in[1] = b.id;
    n.n_in = 2;
    n.requires_grad = t->requires_grad(a) || t->requires_grad(b);
    return t->push(std::move(n));
}

Var add_bias(Var x, Var b) {
    Tape* t = same_tape(x, b);
    Tape::Node n;
    n.op = Op::kAddBias;
    n.value = ops::add_bias(x.value(), b.value());
    n.in[0] = x.id;
    n.in[1] = b.id;
    n.n_in = 2;
    n.requires_grad = t->requires_grad(x) || t->requires_grad(b);
    return t->push(std::move(n));
}

Var relu(Var x) {
    Tape::Node n;
    n.op = Op::kRelu;
    n.value = ops::relu(x.value());
    n.in[0] = x.id;
    n.n_in = 1;
    n.requires_grad = x.tape->requires_grad(x);
    return x.tape->push(std::move(n));
}

Var scale(Var x, double s) {
    Tape::Node n;
    n.op = Op::kScale;
    n.value = ops::scale(x.value(), s);
    n.attr = s;
    n.in[0] = x.id;
    n.n_in = 1;
    n.requires_grad = x.tape->requires_grad(x);
    return x.tape->push(std::move(n));
}

Var softmax_rows(Var x) {
    Tape::Node n;
    n.op = Op::kSoftmaxRows;
    n.value = ops::softmax_rows(x.value());
    n.in[0] = x.id;
    n.n_in = 1;
    n.requires_grad = x.tape->requires_grad(x);
    return x.tape->push(std::move(n));
}

Var layer_norm(Var x, Var gamma, Var beta, double eps) {
    Tape* t = same_tape(x, gamma);
    same_tape(x, beta);
    const Tensor& xv = x.value();
    Tape::Node n;
    n.op = Op::kLayerNorm;
    n.value = ops::layer_norm(xv, gamma.value(), beta.value(), eps);
    const std::size_t rows = xv.rows(), d = xv.cols();
    n.aux.resize(rows * d + rows);
    for (std::size_t r = 0; r < rows; ++r) {
        auto in = xv.row(r);
        double mean = 0.0;
        for (double v : in) mean += v;
        mean /= static_cast<double>(d);
        double var = 0.0;
        for (double v : in) var += (v - mean) * (v - mean);
        var /= static_cast<double>(d);
        const double rstd = 1.0 / std::sqrt(var + eps);
        for (std::size_t j = 0; j < d; ++j) n.aux[r * d + j] = (in[j] - mean) * rstd;
        n.aux[rows * d + r] = rstd;
    }
    n.in[0] = x.id;
    n.in[1] = gamma.id;
    n.links = {beta.id};
    n.n_in = 2;
    n.requires_grad = t->requires_grad(x) || t->requires_grad(gamma) || t->requires_grad(beta);
    return t->push(std::move(n));
}

Var mean_rows(Var x) {
    Tape::Node n;
    n.op = Op::kMeanRows;
    const Tensor pooled = ops::avg_pool(x.value());
    n.value = pooled.reshaped({1, pooled.size()});
    n.in[0] = x.id;
    n.n_in = 1;
    n.requires_grad = x.tape->requires_grad(x);
    return x.tape->push(std::move(n));
}

Var concat_cols(Var a, Var b) {
    Tape* t = same_tape(a, b);
    Tape::Node n;
    n.op = Op::kConcatCols;
    n.value = ops::concat_cols(a.value(), b.value());
    n.in[0] = a.id;
    n.in[1] = b.id;
    n.n_in = 2;
    n.requires_grad = t->requires_grad(a) || t->requires_grad(b);
    return t->push(std::move(n));
}

Var concat_rows(std::span<const Var> parts) {
    if (parts.empty()) throw DimensionError("concat_rows: nothing to concatenate");
    Tape* t = parts.front().tape;
    std::vector<Tensor> values;
    values.reserve(parts.size());
    Tape::Node n;
    n.op = Op::kConcatRows;
    for (const auto& p : parts) {
        same_tape(parts.front(), p);
        values.push_back(p.value());
        n.links.push_back(p.id);
        n.requires_grad = n.requires_grad || t->requires_grad(p);
    }
    n.value = ops::concat_rows(values);
    return t->push(std::move(n));
}

Var gather_rows(Var table, std::vector<std::size_t> idx) {
    Tape::Node n;
    n.op = Op::kGatherRows;
    n.value = ops::gather_rows(table.value(), idx);
    n.index = std::move(idx);
    n.in[0] = table.id;
    n.n_in = 1;
    n.requires_grad = table.tape->requires_grad(table);
    return table.tape->push(std::move(n));
}

Var mse(Var pred, Var target) {
    Tape* t = same_tape(pred, target);
    Tape::Node n;
    n.op = Op::kMse;
    n.value = Tensor::scalar(ops::mse_loss(pred.value(), target.value()));
    n.in[0] = pred.id;
    n.in[1] = target.id;
    n.n_in = 2;
    n.requires_grad = t->requires_grad(pred) || t->requires_grad(target);
    return t->push(std::move(n));
}

Var softmax_cross_entropy(Var logits, std::size_t target) {
    const Tensor& z = logits.value();
    if (z.rows() != 1) throw DimensionError("softmax_cross_entropy: expects one row, got " + shape_str(z.shape()));
    if (target >= z.cols())
        throw DimensionError(fmt::format("softmax_cross_entropy: target {} outside {} classes", target, z.cols()));
    Tape::Node n;
    n.op = Op::kSoftmaxXent;
    const Tensor p = ops::softmax_rows(z);
    n.aux.assign(p.data().begin(), p.data().end());
    n.value = Tensor::scalar(-std::log(std::max(p[target], 1e-300)));
    n.index = {target};
    n.in[0] = logits.id;
    n.n_in = 1;
    n.requires_grad = logits.tape->requires_grad(logits);
    return logits.tape->push(std::move(n));
}

Var argmax_one_hot(Var x) {
    const Tensor& xv = x.value();
    Tensor y = Tensor::matrix(xv.rows(), xv.cols());
    for (std::size_t r = 0; r < xv.rows(); ++r) y.at(r, ops::argmax(xv.row(r))) = 1.0;
    Tape::Node n;
    n.op = Op::kArgmaxOneHot;
    n.value = std::move(y);
    n.in[0] = x.id;
    n.n_in = 1;
    n.requires_grad = x.tape->requires_grad(x);
    return x.tape->push(std::move(n));
}

}  // namespace mavqa::ag

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

#include "mavqa/numerics/ops.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "mavqa/simd/kernels.hpp"

namespace mavqa::ops {
namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (a.shape() != b.shape())
        throw DimensionError(fmt::format("{}: shape mismatch {} vs {}", what, shape_str(a.shape()),
                                         shape_str(b.shape())));
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows())
        throw DimensionError(fmt::format("matmul: inner extents differ, {} x {}", shape_str(a.shape()),
                                         shape_str(b.shape())));
    Tensor c = Tensor::matrix(a.rows(), b.cols());
    simd::kernels().gemm_nn(a.rows(), b.cols(), a.cols(), a.ptr(), a.cols(), b.ptr(), b.cols(), c.ptr(),
                            c.cols(), false);
    return c;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.cols())
        throw DimensionError(fmt::format("matmul_nt: inner extents differ, {} x {}^T", shape_str(a.shape()),
                                         shape_str(b.shape())));
    Tensor c = Tensor::matrix(a.rows(), b.rows());
    simd::kernels().gemm_nt(a.rows(), b.rows(), a.cols(), a.ptr(), a.cols(), b.ptr(), b.cols(), c.ptr(),
                            c.cols(), false);
    return c;
}

Tensor softmax_rows(const Tensor& x) {
    Tensor y = Tensor::matrix(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto in = x.row(r);
        auto out = y.row(r);
        const double mx = *std::max_element(in.begin(), in.end());
        double sum = 0.0;
        for (std::size_t j = 0; j < in.size(); ++j) {
            out[j] = std::exp(in[j] - mx);
            sum += out[j];
        }
        const double inv = 1.0 / sum;
        for (auto& v : out) v *= inv;
    }
    return y;
}

Tensor add_bias(const Tensor& x, const Tensor& b) {
    if (b.size() != x.cols())
        throw DimensionError(fmt::format("bias {} does not match {} columns of {}", shape_str(b.shape()),
                                         x.cols(), shape_str(x.shape())));
    Tensor y = x.rank() == 2 ? x : x.reshaped({x.rows(), x.cols()});
    for (std::size_t r = 0; r < y.rows(); ++r) {
        auto row = y.row(r);
        for (std::size_t j = 0; j < row.size(); ++j) row[j] += b[j];
    }
    return y;
}

Tensor linear_forward(const Tensor& x, const Tensor& w, const Tensor& b) {
    return add_bias(matmul(x, w), b);
}

double mse_loss(const Tensor& pred, const Tensor& target) {
    if (pred.size() != target.size() || pred.cols() != target.cols())
        throw DimensionError(fmt::format("mse: shape mismatch {} vs {}", shape_str(pred.shape()),
                                         shape_str(target.shape())));
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        s += d * d;
    }
    return s / static_cast<double>(pred.size());
}

Tensor relu(const Tensor& x) {
    Tensor y = x;
    for (auto& v : y.data()) v = v > 0.0 ? v : 0.0;
    return y;
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    Tensor y = a;
    simd::kernels().axpy(1.0, b.ptr(), y.ptr(), y.size());
    return y;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    Tensor y = a;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] *= b[i];
    return y;
}

Tensor scale(const Tensor& x, double s) {
    Tensor y = x;
    for (auto& v : y.data()) v *= s;
    return y;
}

Tensor avg_pool(const Tensor& tokens) {
    if (tokens.empty()) throw DimensionError("avg_pool: empty token sequence");
    const std::size_t t = tokens.rows();
    Tensor y({tokens.cols()});
    for (std::size_t r = 0; r < t; ++r) simd::kernels().axpy(1.0, tokens.row(r).data(), y.ptr(), y.size());
    const double inv = 1.0 / static_cast<double>(t);
    for (auto& v : y.data()) v *= inv;
    return y;
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
    const std::size_t d = x.cols();
    if (gamma.size() != d || beta.size() != d)
        throw DimensionError(fmt::format("layer_norm: affine {} / {} vs width {}", shape_str(gamma.shape()),
                                         shape_str(beta.shape()), d));
    Tensor y = Tensor::matrix(x.rows(), d);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto in = x.row(r);
        auto out = y.row(r);
        double mean = 0.0;
        for (double v : in) mean += v;
        mean /= static_cast<double>(d);
        double var = 0.0;
        for (double v : in) var += (v - mean) * (v - mean);
        var /= static_cast<double>(d);
        const double rstd = 1.0 / std::sqrt(var + eps);
        for (std::size_t j = 0; j < d; ++j) out[j] = gamma[j] * (in[j] - mean) * rstd + beta[j];
    }
    return y;
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows())
        throw DimensionError(fmt::format("concat_cols: row counts differ, {} vs {}", shape_str(a.shape()),
                                         shape_str(b.shape())));
    Tensor y = Tensor::matrix(a.rows(), a.cols() + b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        auto out = y.row(r);
        std::copy(a.row(r).begin(), a.row(r).end(), out.begin());
        std::copy(b.row(r).begin(), b.row(r).end(), out.begin() + static_cast<std::ptrdiff_t>(a.cols()));
    }
    return y;
}

Tensor concat_rows(std::span<const Tensor> parts) {
    if (parts.empty()) throw DimensionError("concat_rows: nothing to concatenate");
    const std::size_t d = parts.front().cols();
    std::size_t rows = 0;
    for (const auto& p : parts) {
        if (p.cols() != d)
            throw DimensionError(fmt::format("concat_rows: widths differ, {} vs {}", d, p.cols()));
        rows += p.rows();
    }
    std::vector<double> data;
    data.reserve(rows * d);
    for (const auto& p : parts) data.insert(data.end(), p.data().begin(), p.data().end());
    return Tensor({rows, d}, std::move(data));
}

Tensor gather_rows(const Tensor& table, std::span<const std::size_t> idx) {
    if (idx.empty()) throw DimensionError("gather_rows: empty index list");
    Tensor y = Tensor::matrix(idx.size(), table.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= table.rows())
            throw DimensionError(fmt::format("gather_rows: index {} outside {}", idx[i], shape_str(table.shape())));
        std::copy(table.row(idx[i]).begin(), table.row(idx[i]).end(), y.row(i).begin());
    }
    return y;
}

Tensor transpose(const Tensor& x) {
    Tensor y = Tensor::matrix(x.cols(), x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = 0; c < x.cols(); ++c) y.at(c, r) = x.at(r, c);
    return y;
}

std::size_t argmax(std::span<const double> v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace mavqa::ops

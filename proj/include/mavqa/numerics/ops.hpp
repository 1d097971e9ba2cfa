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
#include <span>

#include "mavqa/numerics/tensor.hpp"

// Forward-only tensor ops. The autodiff tape computes its forward values with
// these same functions, so inference and training share one code path.

namespace mavqa::ops {

/// [m x k] * [k x n]. Rank-1 operands act as a single row.
Tensor matmul(const Tensor& a, const Tensor& b);

/// [m x k] * [n x k]^T
Tensor matmul_nt(const Tensor& a, const Tensor& b);

/// Row-wise softmax with per-row max subtraction.
Tensor softmax_rows(const Tensor& x);

/// x W + b, b broadcast over rows.
Tensor linear_forward(const Tensor& x, const Tensor& w, const Tensor& b);

/// Mean of squared differences over all elements.
double mse_loss(const Tensor& pred, const Tensor& target);

Tensor relu(const Tensor& x);
Tensor add(const Tensor& a, const Tensor& b);
/// Elementwise product.
Tensor mul(const Tensor& a, const Tensor& b);
Tensor add_bias(const Tensor& x, const Tensor& b);
Tensor scale(const Tensor& x, double s);

/// Column-wise mean of a [T x d] token matrix, returned as a rank-1 [d].
Tensor avg_pool(const Tensor& tokens);

/// Row-wise layer normalisation followed by the affine map gamma * xhat + beta.
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-5);

Tensor concat_cols(const Tensor& a, const Tensor& b);
Tensor concat_rows(std::span<const Tensor> parts);

/// Rows of `table` picked by index.
Tensor gather_rows(const Tensor& table, std::span<const std::size_t> idx);

Tensor transpose(const Tensor& x);

std::size_t argmax(std::span<const double> v);

}  // namespace mavqa::ops

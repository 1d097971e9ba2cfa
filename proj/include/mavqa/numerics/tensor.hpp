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
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mavqa {

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& s);

/// Raised when operand extents do not conform.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised on non-finite values where the numerics cannot continue.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dense row-major float64 tensor. Rank-1 tensors behave as a single row
/// wherever a matrix is expected.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape);
    Tensor(Shape shape, std::vector<double> data);

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
    static Tensor matrix(std::size_t rows, std::size_t cols) { return Tensor({rows, cols}); }
    static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
    static Tensor vector(std::vector<double> values);
    static Tensor scalar(double v) { return Tensor({1}, {v}); }
    static Tensor identity(std::size_t n);

    const Shape& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    // Matrix view: rank-2 is [rows, cols]; rank-1 is [1, n].
    std::size_t rows() const;
    std::size_t cols() const;

    std::span<double> data() & { return data_; }
    std::span<const double> data() const& { return data_; }
    std::span<const double> data() && = delete;  // would dangle
    double* ptr() { return data_.data(); }
    const double* ptr() const { return data_.data(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }
    double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols(), cols()}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols(), cols()}; }

    /// Same data, different extents. Product of extents must match.
    Tensor reshaped(Shape shape) const;

    void fill(double v);
    bool all_finite() const;

    friend bool operator==(const Tensor& a, const Tensor& b) {
        return a.shape_ == b.shape_ && a.data_ == b.data_;
    }

private:
    Shape shape_;
    std::vector<double> data_;
};

std::size_t shape_numel(const Shape& s);

}  // namespace mavqa

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

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mavqa/numerics/tensor.hpp"

namespace mavqa {

/// A learnable tensor with its gradient slot. Frozen parameters never receive
/// gradient and are skipped by the optimizer.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;
    bool frozen = false;
};

/// Named parameter registry. Addresses of registered parameters are stable
/// for the lifetime of the set, so modules may hold `Parameter*`.
class ParamSet {
public:
    ParamSet() = default;
    ParamSet(const ParamSet&) = delete;
    ParamSet& operator=(const ParamSet&) = delete;
    ParamSet(ParamSet&&) = default;
    ParamSet& operator=(ParamSet&&) = default;

    Parameter& add(std::string name, Tensor init);

    Parameter& get(std::string_view name);
    const Parameter& get(std::string_view name) const;
    bool contains(std::string_view name) const { return index_.find(name) != index_.end(); }

    std::size_t size() const { return params_.size(); }
    std::size_t scalar_count() const;

    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }

    void zero_grad();
    /// Marks every parameter whose name starts with `prefix` frozen. Returns the count.
    std::size_t freeze_prefix(std::string_view prefix);

private:
    std::deque<Parameter> params_;
    std::map<std::string, std::size_t, std::less<>> index_;
};

/// Deterministic initialiser: each parameter draws from its own stream keyed
/// by (seed, name), so creation order never changes the values.
class Initializer {
public:
    explicit Initializer(std::uint64_t seed) : seed_(seed) {}

    /// uniform(-1/sqrt(fan_in), +1/sqrt(fan_in))
    Tensor uniform_fan_in(std::string_view name, Shape shape, std::size_t fan_in) const;
    Tensor uniform(std::string_view name, Shape shape, double bound) const;

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
};

std::uint64_t fnv1a64(std::string_view s);
/// SplitMix64 finalizer; derives independent child seeds.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace mavqa

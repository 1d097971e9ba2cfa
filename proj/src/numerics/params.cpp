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

#include "mavqa/numerics/params.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace mavqa {

Parameter& ParamSet::add(std::string name, Tensor init) {
    if (contains(name)) throw std::invalid_argument("duplicate parameter '" + name + "'");
    Tensor grad(init.shape());
    index_.emplace(name, params_.size());
    params_.push_back(Parameter{std::move(name), std::move(init), std::move(grad), false});
    return params_.back();
}

Parameter& ParamSet::get(std::string_view name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("no parameter '" + std::string(name) + "'");
    return params_[it->second];
}

const Parameter& ParamSet::get(std::string_view name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("no parameter '" + std::string(name) + "'");
    return params_[it->second];
}

std::size_t ParamSet::scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.value.size();
    return n;
}

void ParamSet::zero_grad() {
    for (auto& p : params_) p.grad.fill(0.0);
}

std::size_t ParamSet::freeze_prefix(std::string_view prefix) {
    std::size_t n = 0;
    for (auto& p : params_)
        if (std::string_view(p.name).starts_with(prefix)) {
            p.frozen = true;
            ++n;
        }
    return n;
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Tensor Initializer::uniform(std::string_view name, Shape shape, double bound) const {
    Tensor t(std::move(shape));
    std::mt19937_64 rng(seed_ ^ fnv1a64(name));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& v : t.data()) v = dist(rng);
    return t;
}

Tensor Initializer::uniform_fan_in(std::string_view name, Shape shape, std::size_t fan_in) const {
    return uniform(name, std::move(shape), 1.0 / std::sqrt(static_cast<double>(fan_in)));
}

}  // namespace mavqa

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
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mavqa/numerics/optim.hpp"
#include "mavqa/numerics/params.hpp"
#include "mavqa/numerics/tensor.hpp"

// Checkpoint layout (all integers little-endian):
//
//   "AMUS"            4 bytes magic
//   version           u32
//   repeated until EOF:
//     name_len        u32
//     name            name_len bytes (UTF-8)
//     rank            u32
//     extents         rank x u64
//     payload         prod(extents) x f64
//
// Records are written in name order, so identical contents give identical
// bytes.

namespace mavqa {

inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Checkpoint {
public:
    void put(const std::string& name, Tensor value);
    void put_scalar(const std::string& name, double v) { put(name, Tensor::scalar(v)); }

    bool has(const std::string& name) const { return records_.count(name) != 0; }
    const Tensor& get(const std::string& name) const;
    double get_scalar(const std::string& name) const;
    double get_scalar_or(const std::string& name, double fallback) const;

    const std::map<std::string, Tensor>& records() const { return records_; }

    std::vector<std::uint8_t> serialize() const;
    static Checkpoint deserialize(std::span<const std::uint8_t> bytes);

    void save(const std::filesystem::path& path) const;
    static Checkpoint load(const std::filesystem::path& path);

    /// Parameter values under `prefix`, plus a "frozen/<name>" flag record per frozen parameter.
    void put_params(const ParamSet& params, const std::string& prefix = "param/");
    /// Copies matching records into `params`; every parameter must be present with its shape.
    void load_params(ParamSet& params, const std::string& prefix = "param/") const;

    void put_optimizer(const OptimState& opt, const std::string& prefix = "adam/");
    void load_optimizer(OptimState& opt, const std::string& prefix = "adam/") const;

private:
    std::map<std::string, Tensor> records_;
};

}  // namespace mavqa

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
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "mavqa/annotate/rhythm.hpp"
#include "mavqa/model/qa_model.hpp"
#include "mavqa/model/train.hpp"

namespace mavqa::pipeline {

/// Invalid run configuration; the message names the offending key.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Everything a run needs besides its inputs. Every key has a default, so an
/// empty file is a valid configuration.
struct RunConfig {
    std::uint64_t seed = 7;  // model initialisation and example order
    std::filesystem::path run_dir = "runs/default";

    struct Data {
        std::filesystem::path classes = "config/classes.json";
        std::size_t clips = 200;
        std::uint64_t seed = 7;
        std::size_t per_category = 1;
    } data;

    annotate::RhythmConfig rhythm;
    double presence_threshold = 0.25;

    /// Tunable model fields. Vocabulary, answer count and feature widths are
    /// filled from the dataset when the model is built.
    model::ModelConfig model;

    model::PretrainConfig pretrain;
    std::size_t pretrain_clips = 50;  // 0 for every training clip

    model::TrainConfig train;
};

RunConfig default_run_config();

/// Parses TOML text over the defaults. Unknown keys, wrong types and
/// out-of-range values raise ConfigError.
RunConfig parse_run_config(std::string_view toml_text, std::string_view source = "<string>");
RunConfig load_run_config(const std::filesystem::path& path);

/// Command-line seed: replaces the data, initialisation and training seeds.
void override_seed(RunConfig& cfg, std::uint64_t seed);

/// Canonical form: same configuration, same bytes.
nlohmann::json to_json(const RunConfig& cfg);
/// SHA-1 of the canonical JSON dump, lowercase hex.
std::string config_hash(const RunConfig& cfg);

/// Lowercase hex SHA-1 of a byte string or a file.
std::string sha1_hex(std::string_view bytes);
std::string sha1_file(const std::filesystem::path& path);

}  // namespace mavqa::pipeline

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

#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "mavqa/pipeline/config.hpp"

using namespace mavqa;
using namespace mavqa::pipeline;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_run_config(text, "run.toml");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("an empty file gives the defaults") {
    CHECK(to_json(parse_run_config("")) == to_json(default_run_config()));
}

TEST_CASE("the shipped configuration spells out the defaults") {
    const auto path = std::filesystem::path(MAVQA_SOURCE_DIR) / "config" / "run.toml";
    CHECK(to_json(load_run_config(path)) == to_json(default_run_config()));
}

TEST_CASE("keys override defaults") {
    const auto c = parse_run_config(R"(
seed = 99
[annotation]
segment_seconds = 5
threshold_fraction = 0.3
[model]
fusion_heads = 2
[train]
lr = 1e-4
epochs = 3
)");
    CHECK(c.seed == 99);
    CHECK(c.rhythm.segment_seconds == 5.0);
    CHECK(c.rhythm.threshold_fraction == 0.3);
    CHECK(c.model.fusion_heads == 2);
    CHECK(c.train.lr == 1e-4);
    CHECK(c.train.epochs == 3);
    CHECK(c.data.clips == default_run_config().data.clips);
}

TEST_CASE("errors name the offending key") {
    CHECK(error_of("[model]\nwidth = 3\n").starts_with("model.width: unknown"));
    CHECK(error_of("[train]\nepochs = \"ten\"\n").starts_with("train.epochs: expected an integer"));
    CHECK(error_of("[train]\nlr = 0\n").starts_with("train.lr: value 0 out of range"));
    CHECK(error_of("[annotation]\nthreshold_fraction = 1.5\n").starts_with("annotation.threshold_fraction"));
    CHECK(error_of("[annotation]\nthreshold_fraction = 0\n").starts_with("annotation.threshold_fraction"));
    CHECK(error_of("[data]\nclips = -4\n").starts_with("data.clips"));
    CHECK(error_of("[data]\nclasses = 3\n").starts_with("data.classes: expected a string"));
    CHECK(error_of("[model]\nfusion_gate = 3\n").starts_with("model.fusion_gate"));
    CHECK(error_of("[annotation]\nmin_bpm = 300\n").starts_with("annotation.min_bpm"));
    CHECK(error_of("[model]\nfusion_width = 30\nfusion_heads = 4\n").starts_with("model.fusion_heads"));
    // Syntax errors carry the source position.
    CHECK(error_of("[model\n").starts_with("run.toml:1:"));
}

TEST_CASE("a missing configuration file is a configuration error") {
    CHECK_THROWS_AS(load_run_config("/nonexistent/run.toml"), ConfigError);
}

TEST_CASE("seed override reaches every seeded stage") {
    auto c = default_run_config();
    override_seed(c, 1234);
    CHECK(c.seed == 1234);
    CHECK(c.data.seed == 1234);
    CHECK(c.pretrain.seed == 1234);
    CHECK(c.train.seed == 1234);
}

TEST_CASE("config hash tracks content but not the run directory") {
    auto a = default_run_config(), b = default_run_config();
    b.run_dir = "elsewhere";
    CHECK(config_hash(a) == config_hash(b));
    b.train.epochs = 29;
    CHECK(config_hash(a) != config_hash(b));
    CHECK(config_hash(a).size() == 40);
}

TEST_CASE("sha1 matches published digests") {
    CHECK(sha1_hex("") == "da39a3ee5e6b4b0d3255bfef95601890afd80709");
    CHECK(sha1_hex("abc") == "a9993e364706816aba3e25717850c26c9cd0d89d");
    const auto p = std::filesystem::temp_directory_path() / "mavqa_sha1_test.txt";
    std::ofstream(p, std::ios::binary) << "abc";
    CHECK(sha1_file(p) == sha1_hex("abc"));
    std::filesystem::remove(p);
}

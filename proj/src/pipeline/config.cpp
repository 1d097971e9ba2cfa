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

#include "mavqa/pipeline/config.hpp"

#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <variant>
#include <vector>

#include <fmt/format.h>
#include <openssl/sha.h>
#include <toml.hpp>

namespace mavqa::pipeline {
namespace {

static_assert(std::is_same_v<std::size_t, std::uint64_t>, "seeds and counts share one integer slot");

// One configurable scalar.
struct Key {
    const char* name;
    std::variant<double*, std::size_t*, int*, std::filesystem::path*> target;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool lo_open = false;  // value must exceed lo
};

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<Key> keys(RunConfig& c) {
    auto& x = c.model.xmodal;
    auto& rs = c.model.rs;
    return {
        {"seed", &c.seed},
        {"run_dir", &c.run_dir},
        {"data.classes", &c.data.classes},
        {"data.clips", &c.data.clips, 1},
        {"data.seed", &c.data.seed},
        {"data.per_category", &c.data.per_category, 1},
        {"annotation.segment_seconds", &c.rhythm.segment_seconds, 0, kInf, true},
        {"annotation.threshold_fraction", &c.rhythm.threshold_fraction, 0, 1, true},
        {"annotation.min_bpm", &c.rhythm.band.min_bpm, 0, kInf, true},
        {"annotation.max_bpm", &c.rhythm.band.max_bpm, 0, kInf, true},
        {"annotation.presence_threshold", &c.presence_threshold, 0, 1, true},
        {"model.d_visual", &x.d_visual, 1},
        {"model.d_audio", &x.d_audio, 1},
        {"model.d_language", &x.d_language, 1},
        {"model.blocks", &x.blocks, 1},
        {"model.inject_every", &x.inject_every, 1},
        {"model.adapter_hidden", &x.adapter_hidden, 1},
        {"model.rs_width", &rs.width, 1},
        {"model.rs_blocks", &rs.blocks, 1},
        {"model.rs_hidden", &rs.hidden, 1},
        {"model.fusion_width", &c.model.fusion_width, 1},
        {"model.fusion_heads", &c.model.fusion_heads, 1},
        {"model.fusion_gate", &c.model.fusion_gate, 0, 2},
        {"model.fusion_mix", &c.model.fusion_mix, 0},
        {"pretrain.lr", &c.pretrain.lr, 0, kInf, true},
        {"pretrain.epochs", &c.pretrain.epochs, 1},
        {"pretrain.batch", &c.pretrain.batch, 1},
        {"pretrain.clips", &c.pretrain_clips, 0},
        {"train.lr", &c.train.lr, 0, kInf, true},
        {"train.epochs", &c.train.epochs, 1},
        {"train.batch", &c.train.batch, 1},
        {"train.decay_every", &c.train.decay_every, 1},
        {"train.decay_factor", &c.train.decay_factor, 0, 1, true},
    };
}

void check_range(const Key& k, double v) {
    if (v < k.lo || (k.lo_open && v == k.lo) || v > k.hi) {
        const std::string lo = k.lo == -kInf ? "" : fmt::format("{} {}", k.lo_open ? ">" : ">=", k.lo);
        const std::string hi = k.hi == kInf ? "" : fmt::format("<= {}", k.hi);
        throw ConfigError(fmt::format("{}: value {} out of range (must be {}{}{})", k.name, v, lo,
                                      lo.empty() || hi.empty() ? "" : " and ", hi));
    }
}

void assign(const Key& k, const toml::node& node) {
    std::visit(
        [&](auto* p) {
            using T = std::remove_pointer_t<decltype(p)>;
            if constexpr (std::is_same_v<T, std::filesystem::path>) {
                auto s = node.value<std::string>();
                if (!node.is_string() || !s) throw ConfigError(fmt::format("{}: expected a string", k.name));
                *p = *s;
            } else if constexpr (std::is_same_v<T, double>) {
                auto v = node.value<double>();
                if (!(node.is_floating_point() || node.is_integer()) || !v)
                    throw ConfigError(fmt::format("{}: expected a number", k.name));
                check_range(k, *v);
                *p = *v;
            } else {
                auto v = node.value<std::int64_t>();
                if (!node.is_integer() || !v) throw ConfigError(fmt::format("{}: expected an integer", k.name));
                if (*v < 0) throw ConfigError(fmt::format("{}: value {} must not be negative", k.name, *v));
                check_range(k, static_cast<double>(*v));
                *p = static_cast<T>(*v);
            }
        },
        k.target);
}

void walk(const toml::table& t, const std::string& prefix, std::vector<Key>& known) {
    for (const auto& [name, node] : t) {
        const std::string full = prefix.empty() ? std::string(name.str()) : prefix + "." + std::string(name.str());
        if (const auto* sub = node.as_table()) {
            walk(*sub, full, known);
            continue;
        }
        auto it = std::find_if(known.begin(), known.end(), [&](const Key& k) { return full == k.name; });
        if (it == known.end()) throw ConfigError(fmt::format("{}: unknown configuration key", full));
        assign(*it, node);
    }
}

void check_consistency(const RunConfig& c) {
    if (c.rhythm.band.min_bpm >= c.rhythm.band.max_bpm)
        throw ConfigError(fmt::format("annotation.min_bpm: {} must be below annotation.max_bpm {}",
                                      c.rhythm.band.min_bpm, c.rhythm.band.max_bpm));
    if (c.model.fusion_width % c.model.fusion_heads != 0)
        throw ConfigError(fmt::format("model.fusion_heads: {} does not divide model.fusion_width {}",
                                      c.model.fusion_heads, c.model.fusion_width));
}

}  // namespace

RunConfig default_run_config() {
    RunConfig c;
    c.model.xmodal.d_visual = c.model.xmodal.d_audio = c.model.xmodal.d_language = 16;
    c.model.xmodal.adapter_hidden = 16;
    c.model.fusion_width = 32;
    c.model.fusion_heads = 4;
    c.model.fusion_gate = 2;
    c.train.lr = 2e-3;
    c.train.batch = 8;
    return c;
}

RunConfig parse_run_config(std::string_view text, std::string_view source) {
    RunConfig c = default_run_config();
    toml::table t;
    try {
        t = toml::parse(text, source);
    } catch (const toml::parse_error& e) {
        const auto& b = e.source().begin;
        throw ConfigError(fmt::format("{}:{}:{}: {}", source, b.line, b.column, e.description()));
    }
    auto known = keys(c);
    walk(t, "", known);
    check_consistency(c);
    c.pretrain.seed = c.train.seed = c.seed;
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot read config file {}", path.string()));
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str(), path.string());
}

void override_seed(RunConfig& cfg, std::uint64_t seed) {
    cfg.seed = seed;
    cfg.data.seed = seed;
    cfg.pretrain.seed = seed;
    cfg.train.seed = seed;
}

nlohmann::json to_json(const RunConfig& cfg) {
    RunConfig copy = cfg;
    nlohmann::json j = nlohmann::json::object();
    for (const auto& k : keys(copy)) {
        nlohmann::json v;
        std::visit(
            [&](auto* p) {
                using T = std::remove_pointer_t<decltype(p)>;
                if constexpr (std::is_same_v<T, std::filesystem::path>) v = p->generic_string();
                else v = *p;
            },
            k.target);
        j[nlohmann::json::json_pointer("/" + [&] {
            std::string s = k.name;
            std::replace(s.begin(), s.end(), '.', '/');
            return s;
        }())] = v;
    }
    return j;
}

std::string sha1_hex(std::string_view bytes) {
    unsigned char md[SHA_DIGEST_LENGTH];
    SHA1(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), md);
    std::string out;
    for (unsigned char b : md) out += fmt::format("{:02x}", b);
    return out;
}

std::string sha1_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return sha1_hex(ss.str());
}

std::string config_hash(const RunConfig& cfg) {
    auto j = to_json(cfg);
    j.erase("run_dir");  // where results go does not change them
    return sha1_hex(j.dump());
}

}  // namespace mavqa::pipeline

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

#include "mavqa/catalog.hpp"

#include <fstream>
#include <stdexcept>

namespace mavqa {
namespace {

Rgb rgb_from(const nlohmann::json& j) {
    const auto v = j.get<std::vector<double>>();
    if (v.size() != 3) throw std::invalid_argument("glyph_rgb must have three components");
    for (double c : v)
        if (c < 0 || c > 1) throw std::invalid_argument("glyph_rgb components must lie in [0, 1]");
    return {v[0], v[1], v[2]};
}

}  // namespace

std::vector<std::string> Catalog::detection_classes() const {
    std::vector<std::string> out = instrument_names();
    for (const auto& r : roles) out.push_back(r.name);
    return out;
}

std::vector<Rgb> Catalog::palette() const {
    std::vector<Rgb> out;
    for (const auto& c : instruments) out.push_back(c.glyph);
    for (const auto& r : roles) out.push_back(r.glyph);
    return out;
}

std::vector<annotate::Band> Catalog::bands() const {
    std::vector<annotate::Band> out;
    for (const auto& c : instruments) out.push_back({c.name, c.lo_hz, c.hi_hz});
    return out;
}

std::vector<std::string> Catalog::instrument_names() const {
    std::vector<std::string> out;
    for (const auto& c : instruments) out.push_back(c.name);
    return out;
}

std::size_t Catalog::role_index(const std::string& name) const {
    for (std::size_t i = 0; i < roles.size(); ++i)
        if (roles[i].name == name) return instruments.size() + i;
    throw std::out_of_range("catalog has no role '" + name + "'");
}

Catalog default_catalog() {
    return catalog_from_json(nlohmann::json::parse(R"({
      "classes": [
        {"name": "cello",   "band_hz": [100, 250],   "glyph_rgb": [0.86, 0.20, 0.18]},
        {"name": "violin",  "band_hz": [300, 700],   "glyph_rgb": [0.20, 0.78, 0.25]},
        {"name": "flute",   "band_hz": [800, 1600],  "glyph_rgb": [0.22, 0.35, 0.92]},
        {"name": "trumpet", "band_hz": [1800, 3200], "glyph_rgb": [0.95, 0.85, 0.15]}
      ],
      "roles": [
        {"name": "player",    "glyph_rgb": [0.85, 0.30, 0.85]},
        {"name": "conductor", "glyph_rgb": [0.20, 0.85, 0.88]}
      ]
    })"));
}

Catalog catalog_from_json(const nlohmann::json& j) {
    Catalog cat;
    const auto bands = annotate::bands_from_json(j);
    const auto& cls = j.at("classes");
    for (std::size_t i = 0; i < bands.size(); ++i)
        cat.instruments.push_back({bands[i].name, bands[i].lo_hz, bands[i].hi_hz, rgb_from(cls[i].at("glyph_rgb"))});
    if (j.contains("roles"))
        for (const auto& r : j.at("roles")) cat.roles.push_back({r.at("name").get<std::string>(), rgb_from(r.at("glyph_rgb"))});
    // validates band disjointness
    annotate::StubBandSeparator check(cat.bands());
    return cat;
}

Catalog load_catalog(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open class list " + path.string());
    return catalog_from_json(nlohmann::json::parse(f));
}

}  // namespace mavqa

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

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mavqa/annotate/source.hpp"

namespace mavqa {

using Rgb = std::array<double, 3>;

struct InstrumentClass {
    std::string name;
    double lo_hz;
    double hi_hz;
    Rgb glyph;
};

/// Non-instrument detection classes (players, conductors).
struct Role {
    std::string name;
    Rgb glyph;
};

/// Instrument taxonomy shared by the generator, the separator and the detector.
struct Catalog {
    std::vector<InstrumentClass> instruments;
    std::vector<Role> roles;

    /// Instruments first, then roles.
    std::vector<std::string> detection_classes() const;
    std::vector<Rgb> palette() const;
    std::vector<annotate::Band> bands() const;
    std::vector<std::string> instrument_names() const;
    std::size_t role_index(const std::string& name) const;  // index into detection_classes()
};

/// The four-instrument catalog shipped in config/classes.json.
Catalog default_catalog();
Catalog catalog_from_json(const nlohmann::json& j);
Catalog load_catalog(const std::filesystem::path& path);

}  // namespace mavqa

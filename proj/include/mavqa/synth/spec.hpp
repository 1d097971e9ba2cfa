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
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "mavqa/catalog.hpp"

namespace mavqa::synth {

class SpecError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Axis-aligned filled rectangle planted in frames [first_frame, end_frame).
struct Glyph {
    std::size_t cls;  // detection class index (instruments, then roles)
    int x, y, w, h;   // pixels, top-left origin
    std::size_t first_frame;
    std::size_t end_frame;
};

/// Everything needed to render one clip and answer questions about it.
struct ClipSpec {
    std::uint64_t seed = 0;
    double duration = 60.0;
    double segment_seconds = 6.0;
    double sample_rate = 11025.0;
    std::size_t frame_size = 64;  // square frames
    double fps = 1.0;

    std::vector<double> tempo;             // BPM per segment
    double click_phase = 0.0;              // seconds to the first click
    std::vector<std::vector<int>> active;  // [segment][instrument] in {0, 1}
    std::vector<double> tone_hz;           // per instrument
    std::vector<Glyph> glyphs;

    std::size_t segments() const;
    std::size_t frames() const;
};

struct GenConfig {
    double min_bpm = 50.0;
    double max_bpm = 180.0;
    int max_jumps = 2;
    /// every jump exceeds this fraction of the fastest tempo in the clip
    double min_jump_fraction = 0.35;
    std::size_t max_simultaneous = 3;
    std::size_t max_instrument_glyphs = 5;
    std::size_t max_players = 2;
    double conductor_probability = 0.5;
    /// probability of planting two equally long non-leading sources, when possible
    double tie_probability = 0.4;
    double duration = 60.0;
    double segment_seconds = 6.0;
    double sample_rate = 11025.0;
    std::size_t frame_size = 64;
};

/// Throws SpecError naming the first inconsistency.
void validate(const ClipSpec& spec, const Catalog& catalog);

/// A random valid spec. Every question template is answerable on it.
ClipSpec random_spec(std::uint64_t seed, const Catalog& catalog, const GenConfig& cfg = {});

/// Per-instrument number of active segments.
std::vector<int> source_totals(const ClipSpec& spec);
/// Instruments with a positive total.
std::vector<std::size_t> sounding(const ClipSpec& spec);
/// Number of glyphs of detection class `cls`.
std::size_t glyph_count(const ClipSpec& spec, std::size_t cls);

nlohmann::json to_json(const ClipSpec& spec);
ClipSpec spec_from_json(const nlohmann::json& j);

}  // namespace mavqa::synth

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

#include "mavqa/synth/spec.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

namespace mavqa::synth {
namespace {

constexpr double kBandMinBpm = 40.0;
constexpr double kBandMaxBpm = 200.0;
constexpr int kGlyphGap = 2;
constexpr int kMinGlyph = 6;
constexpr int kMaxGlyph = 12;

bool boxes_clash(const Glyph& a, const Glyph& b, int gap) {
    const bool frames_meet = a.first_frame < b.end_frame && b.first_frame < a.end_frame;
    if (!frames_meet) return false;
    return a.x < b.x + b.w + gap && b.x < a.x + a.w + gap && a.y < b.y + b.h + gap && b.y < a.y + a.h + gap;
}

template <typename Rng>
int uniform_int(Rng& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

template <typename Rng>
double uniform_real(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

template <typename Rng>
std::vector<double> random_tempo(Rng& rng, std::size_t n, const GenConfig& cfg) {
    for (;;) {
        const int jumps = std::min<int>(uniform_int(rng, 0, cfg.max_jumps), static_cast<int>(n) - 1);
        std::vector<std::size_t> bounds(n - 1);
        std::iota(bounds.begin(), bounds.end(), 1);
        std::shuffle(bounds.begin(), bounds.end(), rng);
        bounds.resize(static_cast<std::size_t>(jumps));
        std::sort(bounds.begin(), bounds.end());

        std::vector<double> levels(static_cast<std::size_t>(jumps) + 1);
        for (auto& t : levels) t = std::round(uniform_real(rng, cfg.min_bpm, cfg.max_bpm) * 10.0) / 10.0;
        const double fastest = *std::max_element(levels.begin(), levels.end());
        bool ok = true;
        for (std::size_t i = 0; i + 1 < levels.size(); ++i)
            ok = ok && std::abs(levels[i] - levels[i + 1]) > cfg.min_jump_fraction * fastest;
        if (!ok) continue;

        std::vector<double> tempo(n);
        std::size_t level = 0;
        for (std::size_t s = 0; s < n; ++s) {
            if (level < bounds.size() && s == bounds[level]) ++level;
            tempo[s] = levels[level];
        }
        return tempo;
    }
}

// Contiguous activity runs with a unique longest source and bounded overlap.
template <typename Rng>
std::vector<std::vector<int>> random_activity(Rng& rng, std::size_t n, std::size_t classes, const GenConfig& cfg) {
    const int k = uniform_int(rng, 1, static_cast<int>(std::min<std::size_t>(4, classes)));
    std::vector<std::size_t> order(classes);
    std::iota(order.begin(), order.end(), 0);
    for (;;) {
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<int> dur(static_cast<std::size_t>(k));
        for (auto& d : dur) d = uniform_int(rng, 1, static_cast<int>(n));
        if (k >= 3 && uniform_real(rng, 0.0, 1.0) < cfg.tie_probability) dur[2] = dur[1];
        const int longest = *std::max_element(dur.begin(), dur.end());
        if (std::count(dur.begin(), dur.end(), longest) != 1) continue;

        std::vector<std::vector<int>> active(n, std::vector<int>(classes, 0));
        for (int i = 0; i < k; ++i) {
            const int start = uniform_int(rng, 0, static_cast<int>(n) - dur[static_cast<std::size_t>(i)]);
            for (int s = start; s < start + dur[static_cast<std::size_t>(i)]; ++s)
                active[static_cast<std::size_t>(s)][order[static_cast<std::size_t>(i)]] = 1;
        }
        bool ok = true;
        for (const auto& row : active)
            ok = ok && static_cast<std::size_t>(std::accumulate(row.begin(), row.end(), 0)) <= cfg.max_simultaneous;
        if (ok) return active;
    }
}

template <typename Rng>
bool place(Rng& rng, Glyph& g, std::vector<Glyph>& placed, int size, int x_lo, int x_hi) {
    for (int attempt = 0; attempt < 200; ++attempt) {
        g.w = uniform_int(rng, kMinGlyph, kMaxGlyph);
        g.h = uniform_int(rng, kMinGlyph, kMaxGlyph);
        if (x_hi - g.w < x_lo) continue;
        g.x = uniform_int(rng, x_lo, x_hi - g.w);
        g.y = uniform_int(rng, 1, size - 1 - g.h);
        if (std::none_of(placed.begin(), placed.end(), [&](const Glyph& o) { return boxes_clash(g, o, kGlyphGap); })) {
            placed.push_back(g);
            return true;
        }
    }
    return false;
}

}  // namespace

std::size_t ClipSpec::segments() const {
    return static_cast<std::size_t>(std::floor(duration / segment_seconds + 1e-9));
}

std::size_t ClipSpec::frames() const { return static_cast<std::size_t>(std::llround(duration * fps)); }

void validate(const ClipSpec& s, const Catalog& cat) {
    if (!(s.duration > 0) || !(s.segment_seconds > 0) || s.segment_seconds > s.duration)
        throw SpecError(fmt::format("segment length {} s does not fit a {} s clip", s.segment_seconds, s.duration));
    if (!(s.sample_rate > 0) || !(s.fps > 0) || s.frame_size < 8) throw SpecError("bad sample rate, fps or frame size");
    const std::size_t n = s.segments(), c = cat.instruments.size();
    if (s.tempo.size() != n)
        throw SpecError(fmt::format("tempo schedule has {} entries for {} segments", s.tempo.size(), n));
    for (std::size_t i = 0; i < n; ++i)
        if (s.tempo[i] < kBandMinBpm || s.tempo[i] > kBandMaxBpm)
            throw SpecError(fmt::format("segment {} tempo {} BPM outside [{}, {}]", i, s.tempo[i], kBandMinBpm,
                                        kBandMaxBpm));
    if (s.click_phase < 0 || s.click_phase >= s.duration) throw SpecError("click phase outside the clip");
    if (s.active.size() != n) throw SpecError(fmt::format("source schedule has {} rows for {} segments", s.active.size(), n));
    for (const auto& row : s.active) {
        if (row.size() != c) throw SpecError(fmt::format("source schedule row has {} entries for {} classes", row.size(), c));
        for (int v : row)
            if (v != 0 && v != 1) throw SpecError("source schedule entries must be 0 or 1");
    }
    if (s.tone_hz.size() != c) throw SpecError("one tone frequency per instrument required");
    for (std::size_t i = 0; i < c; ++i)
        if (s.tone_hz[i] < cat.instruments[i].lo_hz || s.tone_hz[i] >= cat.instruments[i].hi_hz)
            throw SpecError(fmt::format("{} tone {} Hz outside its band", cat.instruments[i].name, s.tone_hz[i]));
    const int size = static_cast<int>(s.frame_size);
    const std::size_t classes = cat.instruments.size() + cat.roles.size();
    for (std::size_t i = 0; i < s.glyphs.size(); ++i) {
        const auto& g = s.glyphs[i];
        if (g.cls >= classes) throw SpecError(fmt::format("glyph {} has class {} of {}", i, g.cls, classes));
        if (g.w <= 0 || g.h <= 0 || g.x < 0 || g.y < 0 || g.x + g.w > size || g.y + g.h > size)
            throw SpecError(fmt::format("glyph {} box ({}, {}, {}, {}) leaves the frame", i, g.x, g.y, g.w, g.h));
        if (g.first_frame >= g.end_frame || g.end_frame > s.frames())
            throw SpecError(fmt::format("glyph {} frame range [{}, {}) invalid", i, g.first_frame, g.end_frame));
        for (std::size_t j = 0; j < i; ++j)
            if (boxes_clash(g, s.glyphs[j], 0)) throw SpecError(fmt::format("glyphs {} and {} overlap", j, i));
    }
}

ClipSpec random_spec(std::uint64_t seed, const Catalog& cat, const GenConfig& cfg) {
    if (cat.instruments.size() < 2) throw SpecError("generator needs at least two instrument classes");
    std::mt19937_64 rng(seed);
    ClipSpec s;
    s.seed = seed;
    s.duration = cfg.duration;
    s.segment_seconds = cfg.segment_seconds;
    s.sample_rate = cfg.sample_rate;
    s.frame_size = cfg.frame_size;
    const std::size_t n = s.segments(), c = cat.instruments.size();
    if (n < 2) throw SpecError("generator needs at least two segments");

    s.tempo = random_tempo(rng, n, cfg);
    s.click_phase = uniform_real(rng, 0.0, 60.0 / s.tempo[0]);
    s.active = random_activity(rng, n, c, cfg);
    for (const auto& inst : cat.instruments) {
        const double centre = 0.5 * (inst.lo_hz + inst.hi_hz), span = inst.hi_hz - inst.lo_hz;
        s.tone_hz.push_back(std::round(centre + uniform_real(rng, -0.1, 0.1) * span));
    }

    const auto heard = sounding(s);
    const int size = static_cast<int>(s.frame_size), mid = size / 2;
    for (;;) {
        std::vector<Glyph> placed;
        std::vector<std::size_t> classes;
        // one sounding instrument is visible exactly once; the rest are free
        const std::size_t unique = heard[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(heard.size()) - 1))];
        classes.push_back(unique);
        const int extra = uniform_int(rng, 0, static_cast<int>(cfg.max_instrument_glyphs) - 1);
        for (int i = 0; i < extra; ++i) {
            std::size_t k;
            do k = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(c) - 1));
            while (k == unique);
            classes.push_back(k);
        }
        const int players = uniform_int(rng, 0, static_cast<int>(cfg.max_players));
        for (int i = 0; i < players; ++i) classes.push_back(cat.role_index("player"));
        if (uniform_real(rng, 0.0, 1.0) < cfg.conductor_probability) classes.push_back(cat.role_index("conductor"));

        bool ok = true;
        for (std::size_t k : classes) {
            Glyph g{k, 0, 0, 0, 0, 0, s.frames()};
            if (k < c) {
                // instruments sit wholly in one half so left/right is unambiguous
                const bool left = uniform_int(rng, 0, 1) == 0;
                ok = place(rng, g, placed, size, left ? 1 : mid + 1, left ? mid - 1 : size - 1);
            } else {
                ok = place(rng, g, placed, size, 1, size - 1);
            }
            if (!ok) break;
        }
        if (!ok) continue;
        s.glyphs = std::move(placed);
        break;
    }
    validate(s, cat);
    return s;
}

std::vector<int> source_totals(const ClipSpec& spec) {
    std::vector<int> totals(spec.active.empty() ? 0 : spec.active.front().size(), 0);
    for (const auto& row : spec.active)
        for (std::size_t c = 0; c < row.size(); ++c) totals[c] += row[c];
    return totals;
}

std::vector<std::size_t> sounding(const ClipSpec& spec) {
    std::vector<std::size_t> out;
    const auto totals = source_totals(spec);
    for (std::size_t c = 0; c < totals.size(); ++c)
        if (totals[c] > 0) out.push_back(c);
    return out;
}

std::size_t glyph_count(const ClipSpec& spec, std::size_t cls) {
    return static_cast<std::size_t>(
        std::count_if(spec.glyphs.begin(), spec.glyphs.end(), [&](const Glyph& g) { return g.cls == cls; }));
}

nlohmann::json to_json(const ClipSpec& s) {
    nlohmann::json glyphs = nlohmann::json::array();
    for (const auto& g : s.glyphs)
        glyphs.push_back({{"class", g.cls},
                          {"box", {g.x, g.y, g.w, g.h}},
                          {"frames", {g.first_frame, g.end_frame}}});
    return {{"seed", s.seed},           {"duration", s.duration},   {"segment_seconds", s.segment_seconds},
            {"sample_rate", s.sample_rate}, {"frame_size", s.frame_size}, {"fps", s.fps},
            {"tempo", s.tempo},         {"click_phase", s.click_phase}, {"active", s.active},
            {"tone_hz", s.tone_hz},     {"glyphs", glyphs}};
}

ClipSpec spec_from_json(const nlohmann::json& j) {
    ClipSpec s;
    s.seed = j.at("seed").get<std::uint64_t>();
    s.duration = j.at("duration").get<double>();
    s.segment_seconds = j.at("segment_seconds").get<double>();
    s.sample_rate = j.at("sample_rate").get<double>();
    s.frame_size = j.at("frame_size").get<std::size_t>();
    s.fps = j.at("fps").get<double>();
    s.tempo = j.at("tempo").get<std::vector<double>>();
    s.click_phase = j.at("click_phase").get<double>();
    s.active = j.at("active").get<std::vector<std::vector<int>>>();
    s.tone_hz = j.at("tone_hz").get<std::vector<double>>();
    for (const auto& g : j.at("glyphs")) {
        const auto box = g.at("box").get<std::vector<int>>();
        const auto fr = g.at("frames").get<std::vector<std::size_t>>();
        if (box.size() != 4 || fr.size() != 2) throw SpecError("glyph needs a 4-element box and a 2-element frame range");
        s.glyphs.push_back({g.at("class").get<std::size_t>(), box[0], box[1], box[2], box[3], fr[0], fr[1]});
    }
    return s;
}

}  // namespace mavqa::synth

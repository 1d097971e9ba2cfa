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

#include "mavqa/annotate/source.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "mavqa/audio/spectral.hpp"

namespace mavqa::annotate {

std::vector<Band> bands_from_json(const nlohmann::json& j) {
    std::vector<Band> bands;
    for (const auto& c : j.at("classes")) {
        const auto hz = c.at("band_hz").get<std::vector<double>>();
        if (hz.size() != 2) throw std::invalid_argument("band_hz must hold [lo, hi]");
        bands.push_back({c.at("name").get<std::string>(), hz[0], hz[1]});
    }
    return bands;
}

std::vector<Band> load_bands(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open class list " + path.string());
    return bands_from_json(nlohmann::json::parse(f));
}

StubBandSeparator::StubBandSeparator(std::vector<Band> bands) : bands_(std::move(bands)) {
    if (bands_.empty()) throw std::invalid_argument("band separator needs at least one class");
    for (const auto& b : bands_) {
        if (!(b.lo_hz >= 0 && b.hi_hz > b.lo_hz))
            throw std::invalid_argument(fmt::format("band '{}' [{}, {}) is empty", b.name, b.lo_hz, b.hi_hz));
        names_.push_back(b.name);
    }
    for (std::size_t i = 0; i < bands_.size(); ++i)
        for (std::size_t j = i + 1; j < bands_.size(); ++j) {
            const auto &a = bands_[i], &b = bands_[j];
            if (a.lo_hz < b.hi_hz && b.lo_hz < a.hi_hz)
                throw std::invalid_argument(fmt::format("bands '{}' [{}, {}) and '{}' [{}, {}) overlap", a.name,
                                                        a.lo_hz, a.hi_hz, b.name, b.lo_hz, b.hi_hz));
            if (a.name == b.name) throw std::invalid_argument("duplicate class name '" + a.name + "'");
        }
}

std::vector<SourceScore> StubBandSeparator::separate(const audio::AudioClip& segment) const {
    const auto cfg = audio::StftConfig::for_rate(segment.sample_rate);
    const Tensor mag = audio::magnitude_spectrogram(segment, cfg);
    const std::size_t bins = mag.cols();
    // Per-bin median power over frames: sustained tones survive, isolated
    // transients such as clicks, which occupy a minority of frames, do not.
    std::vector<double> energy(bins, 0.0), column(mag.rows());
    for (std::size_t b = 0; b < bins; ++b) {
        for (std::size_t f = 0; f < mag.rows(); ++f) column[f] = mag.at(f, b) * mag.at(f, b);
        auto mid = column.begin() + static_cast<std::ptrdiff_t>(column.size() / 2);
        std::nth_element(column.begin(), mid, column.end());
        energy[b] = *mid;
    }
    double total = 0.0;
    for (double e : energy) total += e;

    std::vector<SourceScore> out;
    out.reserve(bands_.size());
    const double bin_hz = segment.sample_rate / static_cast<double>(cfg.window);
    for (std::size_t c = 0; c < bands_.size(); ++c) {
        double in_band = 0.0;
        for (std::size_t b = 0; b < bins; ++b) {
            const double hz = static_cast<double>(b) * bin_hz;
            if (hz >= bands_[c].lo_hz && hz < bands_[c].hi_hz) in_band += energy[b];
        }
        out.push_back({c, total > 0.0 ? in_band / total : 0.0});
    }
    return out;
}

std::vector<SourceScore> separate_sources(const audio::AudioClip& segment, const SourceSeparator& sep,
                                          double threshold) {
    if (segment.empty()) throw std::invalid_argument("separate_sources: empty segment");
    std::vector<SourceScore> present;
    for (const auto& s : sep.separate(segment)) {
        if (s.cls >= sep.classes().size())
            throw std::runtime_error(fmt::format("separator reported class index {} outside its {} classes", s.cls,
                                                 sep.classes().size()));
        if (s.confidence >= threshold) present.push_back(s);
    }
    std::sort(present.begin(), present.end(), [](const auto& a, const auto& b) { return a.cls < b.cls; });
    return present;
}

SourceTimeline source_timeline(const audio::AudioClip& clip, const SourceSeparator& sep, const SourceConfig& cfg) {
    const auto segments = audio::segment_audio(clip, cfg.segment_seconds);
    if (segments.empty()) throw std::invalid_argument("source timeline: clip yields zero segments");
    SourceTimeline t;
    t.segment_seconds = cfg.segment_seconds;
    t.classes = sep.classes();
    t.counts.assign(segments.size(), std::vector<int>(t.classes.size(), 0));
    t.totals.assign(t.classes.size(), 0);
    for (std::size_t i = 0; i < segments.size(); ++i) {
        try {
            for (const auto& s : separate_sources(segments[i], sep, cfg.presence_threshold)) t.counts[i][s.cls] = 1;
        } catch (const std::exception& e) {
            spdlog::warn("segment {}: separator failed ({}); marked unknown", i, e.what());
            t.unknown.push_back(i);
            std::fill(t.counts[i].begin(), t.counts[i].end(), 0);
        }
    }
    for (const auto& row : t.counts)
        for (std::size_t c = 0; c < row.size(); ++c) t.totals[c] += row[c];
    return t;
}

nlohmann::json to_json(const SourceTimeline& t) {
    nlohmann::json totals = nlohmann::json::object();
    for (std::size_t c = 0; c < t.classes.size(); ++c) totals[t.classes[c]] = t.totals[c];
    nlohmann::json j = {{"segment_seconds", t.segment_seconds},
                        {"classes", t.classes},
                        {"counts", t.counts},
                        {"totals", totals}};
    if (!t.unknown.empty()) j["unknown_segments"] = t.unknown;
    return j;
}

}  // namespace mavqa::annotate

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

#include "mavqa/annotate/rhythm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "mavqa/audio/spectral.hpp"

namespace mavqa::annotate {

std::optional<double> estimate_bpm_from_envelope(const std::vector<double>& env, double fps, const TempoBand& band) {
    if (!(band.min_bpm > 0) || !(band.max_bpm > band.min_bpm))
        throw std::invalid_argument(fmt::format("tempo band [{}, {}] is empty", band.min_bpm, band.max_bpm));
    const auto lag_lo = static_cast<std::size_t>(std::ceil(60.0 * fps / band.max_bpm));
    const auto lag_hi = static_cast<std::size_t>(std::floor(60.0 * fps / band.min_bpm));
    if (lag_lo < 1 || lag_hi < lag_lo) throw std::invalid_argument("tempo band maps to no frame lag");
    if (env.size() < lag_hi + 2)
        throw std::invalid_argument(fmt::format("clip too short for tempo estimation: {} envelope frames, need {}",
                                                env.size(), lag_hi + 2));
    if (std::all_of(env.begin(), env.end(), [](double v) { return v == 0.0; })) return std::nullopt;

    // Clicks land on whole frames, so two beats one period apart can sit a
    // frame closer or further than the true period. A short triangular blur
    // lets those pairs still meet at the nearest integer lag.
    std::vector<double> smooth(env.size(), 0.0);
    constexpr int kHalf = 2;
    for (std::size_t i = 0; i < env.size(); ++i)
        for (int k = -kHalf; k <= kHalf; ++k) {
            const auto j = static_cast<std::ptrdiff_t>(i) + k;
            if (j >= 0 && j < static_cast<std::ptrdiff_t>(env.size()))
                smooth[i] += (kHalf + 1 - std::abs(k)) * env[static_cast<std::size_t>(j)];
        }
    // Long inputs are scored as the sum of autocorrelations over half-overlapping
    // windows of four slowest-beat periods. Within a fixed window the shorter
    // of two octave-related lags keeps more overlapping terms and so wins,
    // which a single whole-clip autocorrelation cannot guarantee.
    const std::size_t win = std::max<std::size_t>(4 * lag_hi, lag_hi + 2);
    std::vector<double> r(lag_hi + 2, 0.0);
    auto accumulate = [&](std::size_t begin, std::size_t len) {
        const std::vector<double> part(smooth.begin() + static_cast<std::ptrdiff_t>(begin),
                                       smooth.begin() + static_cast<std::ptrdiff_t>(begin + len));
        const auto ac = audio::autocorrelation(part, lag_hi + 1);
        for (std::size_t k = 0; k < r.size(); ++k) r[k] += ac[k];
    };
    if (smooth.size() <= win) {
        accumulate(0, smooth.size());
    } else {
        for (std::size_t b = 0;; b += win / 2) {
            const std::size_t begin = std::min(b, smooth.size() - win);
            accumulate(begin, win);
            if (begin + win >= smooth.size()) break;
        }
    }
    // >= walks toward the longer lag on ties, i.e. the slower tempo
    std::size_t best = lag_lo;
    for (std::size_t lag = lag_lo; lag <= lag_hi; ++lag)
        if (r[lag] >= r[best]) best = lag;
    if (r[best] <= 0.0) return std::nullopt;

    // parabolic refinement of the peak between integer lags
    double lag = static_cast<double>(best);
    const double y0 = r[best - 1], y1 = r[best], y2 = r[best + 1];
    const double denom = y0 - 2.0 * y1 + y2;
    if (denom < 0.0) lag += std::clamp(0.5 * (y0 - y2) / denom, -0.5, 0.5);

    const double bpm = 60.0 * fps / lag;
    return std::clamp(bpm, band.min_bpm, band.max_bpm);
}

std::optional<double> estimate_bpm(const audio::AudioClip& clip, const TempoBand& band) {
    const auto cfg = audio::StftConfig::for_rate(clip.sample_rate);
    return estimate_bpm_from_envelope(audio::onset_envelope(clip, cfg), cfg.frames_per_second(clip.sample_rate),
                                      band);
}

std::vector<int> boundary_labels(const std::vector<std::optional<double>>& bpm, double threshold) {
    std::vector<int> labels;
    if (bpm.size() < 2) return labels;
    labels.reserve(bpm.size() - 1);
    for (std::size_t i = 0; i + 1 < bpm.size(); ++i)
        labels.push_back(bpm[i] && bpm[i + 1] && std::abs(*bpm[i] - *bpm[i + 1]) > threshold ? 1 : 0);
    return labels;
}

RhythmTimeline rhythm_labels_with_mean(const audio::AudioClip& clip, double mean_bpm, const RhythmConfig& cfg) {
    if (!(cfg.threshold_fraction > 0 && cfg.threshold_fraction < 1))
        throw std::invalid_argument(fmt::format("threshold fraction {} outside (0, 1)", cfg.threshold_fraction));
    const auto segments = audio::segment_audio(clip, cfg.segment_seconds);
    if (segments.size() < 2)
        throw std::invalid_argument(
            fmt::format("rhythm labels need at least 2 segments, clip of {} s gives {}", clip.duration(),
                        segments.size()));
    RhythmTimeline t;
    t.segment_seconds = cfg.segment_seconds;
    t.mean_bpm = mean_bpm;
    t.threshold = cfg.threshold_fraction * mean_bpm;
    t.bpm.reserve(segments.size());
    for (const auto& s : segments) t.bpm.push_back(estimate_bpm(s, cfg.band));
    t.labels = boundary_labels(t.bpm, t.threshold);
    return t;
}

RhythmTimeline rhythm_labels(const audio::AudioClip& clip, const RhythmConfig& cfg) {
    if (audio::segment_count(clip, cfg.segment_seconds) < 2)
        throw std::invalid_argument(fmt::format("rhythm labels need at least 2 segments of {} s in a {} s clip",
                                                cfg.segment_seconds, clip.duration()));
    const auto mean = estimate_bpm(clip, cfg.band);
    if (!mean) throw std::runtime_error("whole clip has no detectable tempo; change threshold is undefined");
    return rhythm_labels_with_mean(clip, *mean, cfg);
}

nlohmann::json to_json(const RhythmTimeline& t) {
    nlohmann::json bpm = nlohmann::json::array();
    for (const auto& b : t.bpm) bpm.push_back(b ? nlohmann::json(*b) : nlohmann::json(nullptr));
    return {{"segment_seconds", t.segment_seconds},
            {"bpm", bpm},
            {"mean_bpm", t.mean_bpm},
            {"threshold", t.threshold},
            {"labels", t.labels}};
}

RhythmTimeline rhythm_from_json(const nlohmann::json& j) {
    RhythmTimeline t;
    t.segment_seconds = j.at("segment_seconds").get<double>();
    for (const auto& b : j.at("bpm")) t.bpm.push_back(b.is_null() ? std::nullopt : std::optional(b.get<double>()));
    t.mean_bpm = j.at("mean_bpm").get<double>();
    t.threshold = j.at("threshold").get<double>();
    t.labels = j.at("labels").get<std::vector<int>>();
    return t;
}

}  // namespace mavqa::annotate

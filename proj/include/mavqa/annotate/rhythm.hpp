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

#include <optional>
#include <vector>

#include <json.hpp>

#include "mavqa/audio/clip.hpp"

namespace mavqa::annotate {

struct TempoBand {
    double min_bpm = 40.0;
    double max_bpm = 200.0;
};

struct RhythmConfig {
    double segment_seconds = 6.0;
    double threshold_fraction = 0.25;
    TempoBand band;
};

/// Autocorrelation tempo estimate of the onset envelope inside `band`.
/// Returns std::nullopt ("no tempo") when the envelope is identically zero.
/// Throws std::invalid_argument if the clip is too short to hold the slowest
/// lag of the band.
std::optional<double> estimate_bpm(const audio::AudioClip& clip, const TempoBand& band = {});

/// Same estimator on a precomputed envelope with `frames_per_second` values per second.
std::optional<double> estimate_bpm_from_envelope(const std::vector<double>& envelope, double frames_per_second,
                                                 const TempoBand& band = {});

struct RhythmTimeline {
    double segment_seconds = 0.0;
    std::vector<std::optional<double>> bpm;  // nullopt for a silent segment
    double mean_bpm = 0.0;
    double threshold = 0.0;
    std::vector<int> labels;  // size bpm.size() - 1
};

/// labels[i] = 1 iff both neighbours have a tempo and |bpm[i] - bpm[i+1]| > threshold.
std::vector<int> boundary_labels(const std::vector<std::optional<double>>& bpm, double threshold);

/// Segments the clip, estimates a tempo per segment and one for the whole
/// clip, and labels the boundaries. Throws std::invalid_argument with fewer
/// than two segments and std::runtime_error if the whole clip has no tempo.
RhythmTimeline rhythm_labels(const audio::AudioClip& clip, const RhythmConfig& cfg = {});

/// As above with the clip-level mean supplied by the caller.
RhythmTimeline rhythm_labels_with_mean(const audio::AudioClip& clip, double mean_bpm, const RhythmConfig& cfg = {});

nlohmann::json to_json(const RhythmTimeline& t);
RhythmTimeline rhythm_from_json(const nlohmann::json& j);

}  // namespace mavqa::annotate

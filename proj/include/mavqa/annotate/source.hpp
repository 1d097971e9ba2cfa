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

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "mavqa/audio/clip.hpp"

namespace mavqa::annotate {

struct SourceScore {
    std::size_t cls;  // index into the separator's class list
    double confidence;
};

/// Something that reports which instrument classes sound in a clip. Must be
/// deterministic; may throw on failure.
class SourceSeparator {
public:
    virtual ~SourceSeparator() = default;
    virtual const std::vector<std::string>& classes() const = 0;
    /// One score per class it has an opinion on, confidence in [0, 1].
    virtual std::vector<SourceScore> separate(const audio::AudioClip& segment) const = 0;
};

struct Band {
    std::string name;
    double lo_hz;
    double hi_hz;  // exclusive
};

/// Reads {"classes": [{"name": .., "band_hz": [lo, hi]}, ...]}.
std::vector<Band> bands_from_json(const nlohmann::json& j);
std::vector<Band> load_bands(const std::filesystem::path& path);

/// Spectral-energy classifier: confidence of class c is the share of the
/// segment's sustained STFT power (per-bin median over frames) falling
/// inside c's band.
class StubBandSeparator final : public SourceSeparator {
public:
    /// Throws std::invalid_argument on an empty, inverted or overlapping band.
    explicit StubBandSeparator(std::vector<Band> bands);

    const std::vector<std::string>& classes() const override { return names_; }
    std::vector<SourceScore> separate(const audio::AudioClip& segment) const override;

private:
    std::vector<Band> bands_;
    std::vector<std::string> names_;
};

/// Scores at or above `threshold`, in class order.
std::vector<SourceScore> separate_sources(const audio::AudioClip& segment, const SourceSeparator& sep,
                                          double threshold);

struct SourceTimeline {
    double segment_seconds = 0.0;
    std::vector<std::string> classes;
    std::vector<std::vector<int>> counts;  // [segment][class] in {0, 1}
    std::vector<int> totals;               // column sums of counts
    std::vector<std::size_t> unknown;      // segments where the separator failed
};

struct SourceConfig {
    double segment_seconds = 6.0;
    double presence_threshold = 0.25;
};

SourceTimeline source_timeline(const audio::AudioClip& clip, const SourceSeparator& sep, const SourceConfig& cfg = {});

nlohmann::json to_json(const SourceTimeline& t);

}  // namespace mavqa::annotate

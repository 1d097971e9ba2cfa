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

#include "mavqa/audio/clip.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace mavqa::audio {

std::size_t segment_count(const AudioClip& clip, double seconds) {
    if (clip.sample_rate <= 0) throw std::invalid_argument("segment_audio: sample rate must be positive");
    const double total = clip.duration();
    if (!(seconds > 0)) throw std::invalid_argument(fmt::format("segment_audio: segment length {} s is not positive", seconds));
    // allow for the clip length being a rounded number of samples
    const double slack = 0.5 / clip.sample_rate;
    if (seconds > total + slack)
        throw std::invalid_argument(
            fmt::format("segment_audio: segment length {} s exceeds clip duration {} s", seconds, total));
    return static_cast<std::size_t>(std::floor((total + slack) / seconds));
}

std::vector<AudioClip> segment_audio(const AudioClip& clip, double seconds) {
    const std::size_t n = segment_count(clip, seconds);
    std::vector<AudioClip> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto begin = static_cast<std::size_t>(std::llround(static_cast<double>(i) * seconds * clip.sample_rate));
        auto end = static_cast<std::size_t>(std::llround(static_cast<double>(i + 1) * seconds * clip.sample_rate));
        end = std::min(end, clip.samples.size());
        AudioClip seg;
        seg.sample_rate = clip.sample_rate;
        seg.samples.assign(clip.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                           clip.samples.begin() + static_cast<std::ptrdiff_t>(end));
        out.push_back(std::move(seg));
    }
    return out;
}

}  // namespace mavqa::audio

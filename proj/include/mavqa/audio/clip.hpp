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
#include <vector>

namespace mavqa::audio {

/// Mono audio, amplitudes nominally in [-1, 1].
struct AudioClip {
    std::vector<double> samples;
    double sample_rate = 0.0;

    double duration() const { return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0; }
    bool empty() const { return samples.empty(); }
};

/// Cuts floor(T / t) back-to-back snippets of t seconds each. A trailing
/// remainder shorter than t is dropped. Throws std::invalid_argument when
/// t <= 0 or t > T.
std::vector<AudioClip> segment_audio(const AudioClip& clip, double seconds);

/// Number of segments segment_audio would produce, without copying.
std::size_t segment_count(const AudioClip& clip, double seconds);

}  // namespace mavqa::audio

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

#include <vector>

#include "mavqa/audio/clip.hpp"
#include "mavqa/catalog.hpp"
#include "mavqa/synth/spec.hpp"
#include "mavqa/vision/frames.hpp"

namespace mavqa::synth {

inline constexpr double kClickAmplitude = 0.6;
inline constexpr double kToneAmplitude = 0.12;
inline constexpr double kToneRampSeconds = 0.02;

/// Click onset times in seconds. Each inter-click gap uses the tempo of the
/// segment holding the earlier click.
std::vector<double> click_times(const ClipSpec& spec);

/// Unit impulses at the click times, nothing else.
audio::AudioClip render_clicks(const std::vector<double>& times, double duration, double sample_rate,
                               double amplitude = kClickAmplitude);

/// Sine at `hz` gated on during the listed segments, with short linear ramps
/// wherever the gate changes.
void add_tone(std::vector<double>& samples, double sample_rate, double hz, double segment_seconds,
              const std::vector<int>& gate, double amplitude = kToneAmplitude);

struct RenderedClip {
    audio::AudioClip audio;
    vision::FrameStack frames;
};

/// Deterministic in the spec. Samples are rounded to float32 and pixels to
/// 8 bits, so the written files reproduce the in-memory clip exactly.
RenderedClip gen_clip(const ClipSpec& spec, const Catalog& catalog);

}  // namespace mavqa::synth

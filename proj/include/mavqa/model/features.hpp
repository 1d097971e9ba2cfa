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

#include "mavqa/annotate/rhythm.hpp"
#include "mavqa/numerics/tensor.hpp"
#include "mavqa/synth/render.hpp"
#include "mavqa/vision/roi.hpp"

// Fixed (non-learned) inputs of every encoder, computed once per clip.

namespace mavqa::model {

struct FeatureConfig {
    double segment_seconds = 6.0;
    std::size_t patch_grid = 4;    // interactive visual tokens: grid x grid patches of the mean frame
    std::size_t patch_pixels = 4;  // each patch box-filtered to patch_pixels^2 x 3
    std::size_t mel_bins = 16;
    std::size_t mel_groups = 4;  // column groups per segment
    double mel_offset = 6.0;     // log-mel values are mapped to (v + offset) * scale
    double mel_scale = 0.125;
    std::size_t segment_frame = 8;  // pretraining visual tokens: per-segment mean frame at this size
    annotate::TempoBand band;

    std::size_t visual_width() const { return patch_pixels * patch_pixels * 3; }
    std::size_t audio_width() const { return mel_bins * mel_groups; }
    std::size_t segment_visual_width() const { return segment_frame * segment_frame * 3; }
};

struct ClipFeatures {
    Tensor patches;         // [grid^2 x visual_width]
    Tensor mel_tokens;      // [segments x audio_width]
    Tensor segment_frames;  // [segments x segment_visual_width]
    Tensor segment_audio;   // [segments x (audio_width + tempo lags)]
    Tensor roi;             // [4 x detector classes]
};

/// Lags (in envelope frames) covering the tempo band: [floor(fps*60/max), ceil(fps*60/min)].
std::pair<std::size_t, std::size_t> tempo_lags(double frames_per_second, const annotate::TempoBand& band);
std::size_t segment_audio_width(const FeatureConfig& cfg, double sample_rate);

ClipFeatures extract_features(const synth::RenderedClip& clip, const vision::Detector& detector,
                              const FeatureConfig& cfg = {});

}  // namespace mavqa::model

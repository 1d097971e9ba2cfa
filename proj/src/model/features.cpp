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

#include "mavqa/model/features.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "mavqa/audio/spectral.hpp"

namespace mavqa::model {

std::pair<std::size_t, std::size_t> tempo_lags(double fps, const annotate::TempoBand& band) {
    return {static_cast<std::size_t>(std::floor(fps * 60.0 / band.max_bpm)),
            static_cast<std::size_t>(std::ceil(fps * 60.0 / band.min_bpm))};
}

std::size_t segment_audio_width(const FeatureConfig& cfg, double sample_rate) {
    const auto stft = audio::StftConfig::for_rate(sample_rate);
    const auto [lo, hi] = tempo_lags(stft.frames_per_second(sample_rate), cfg.band);
    return cfg.audio_width() + (hi - lo + 1);
}

namespace {

// Envelope/spectrogram frame range of segment i.
std::pair<std::size_t, std::size_t> frame_range(std::size_t i, double seg_s, double fps, std::size_t total) {
    const auto a = static_cast<std::size_t>(std::llround(static_cast<double>(i) * seg_s * fps));
    const auto b = static_cast<std::size_t>(std::llround(static_cast<double>(i + 1) * seg_s * fps));
    return {std::min(a, total), std::min(b, total)};
}

}  // namespace

ClipFeatures extract_features(const synth::RenderedClip& clip, const vision::Detector& detector,
                              const FeatureConfig& cfg) {
    const auto& frames = clip.frames;
    if (frames.count == 0) throw std::invalid_argument("clip has no frames");
    const std::size_t n = audio::segment_count(clip.audio, cfg.segment_seconds);
    const double sr = clip.audio.sample_rate;
    ClipFeatures f;

    // Interactive visual tokens: patches of the clip's mean frame.
    {
        const auto mean = vision::mean_frame(frames, 0, frames.count);
        const std::size_t g = cfg.patch_grid, ph = frames.height / g, pw = frames.width / g;
        if (ph == 0 || pw == 0) throw std::invalid_argument("frame smaller than the patch grid");
        f.patches = Tensor({g * g, cfg.visual_width()});
        std::vector<double> patch(ph * pw * 3);
        for (std::size_t gy = 0; gy < g; ++gy)
            for (std::size_t gx = 0; gx < g; ++gx) {
                for (std::size_t y = 0; y < ph; ++y)
                    for (std::size_t x = 0; x < pw; ++x)
                        for (std::size_t c = 0; c < 3; ++c)
                            patch[(y * pw + x) * 3 + c] = mean.at(0, gy * ph + y, gx * pw + x, c);
                const auto small = vision::downsample(patch, ph, pw, cfg.patch_pixels, cfg.patch_pixels);
                std::copy(small.begin(), small.end(), f.patches.row(gy * g + gx).begin());
            }
    }

    // Per-segment visual tokens for the pretraining encoders.
    f.segment_frames = Tensor({n, cfg.segment_visual_width()});
    const double video_fps = static_cast<double>(frames.count) / clip.audio.duration();
    for (std::size_t i = 0; i < n; ++i) {
        auto [a, b] = frame_range(i, cfg.segment_seconds, video_fps, frames.count);
        if (a == b) throw std::invalid_argument(fmt::format("segment {} has no frames", i));
        const auto mean = vision::mean_frame(frames, a, b);
        const auto small = vision::downsample(mean.frame(0), frames.height, frames.width, cfg.segment_frame,
                                              cfg.segment_frame);
        std::copy(small.begin(), small.end(), f.segment_frames.row(i).begin());
    }

    // Audio: log-mel column groups per segment, plus a tempogram for the pretraining encoders.
    const auto stft = audio::StftConfig::for_rate(sr);
    const double fps = stft.frames_per_second(sr);
    const Tensor mel = audio::log_mel(clip.audio, stft, cfg.mel_bins);
    const auto env = audio::onset_envelope(clip.audio, stft);
    const auto [lag_lo, lag_hi] = tempo_lags(fps, cfg.band);
    const std::size_t lags = lag_hi - lag_lo + 1;
    f.mel_tokens = Tensor({n, cfg.audio_width()});
    f.segment_audio = Tensor({n, cfg.audio_width() + lags});
    for (std::size_t i = 0; i < n; ++i) {
        const auto [a, b] = frame_range(i, cfg.segment_seconds, fps, mel.rows());
        if (b - a < cfg.mel_groups) throw std::invalid_argument(fmt::format("segment {} has too few frames", i));
        for (std::size_t g = 0; g < cfg.mel_groups; ++g) {
            const std::size_t ga = a + (b - a) * g / cfg.mel_groups, gb = a + (b - a) * (g + 1) / cfg.mel_groups;
            for (std::size_t m = 0; m < cfg.mel_bins; ++m) {
                double s = 0;
                for (std::size_t t = ga; t < gb; ++t) s += mel.at(t, m);
                const double v = (s / static_cast<double>(gb - ga) + cfg.mel_offset) * cfg.mel_scale;
                f.mel_tokens.at(i, g * cfg.mel_bins + m) = v;
                f.segment_audio.at(i, g * cfg.mel_bins + m) = v;
            }
        }
        std::vector<double> seg(env.begin() + static_cast<std::ptrdiff_t>(a),
                                env.begin() + static_cast<std::ptrdiff_t>(std::min(b, env.size())));
        const auto r = audio::autocorrelation(seg, std::min(lag_hi, seg.empty() ? 0 : seg.size() - 1));
        if (!r.empty() && r[0] > 0)
            for (std::size_t k = lag_lo; k <= lag_hi && k < r.size(); ++k)
                f.segment_audio.at(i, cfg.audio_width() + k - lag_lo) = r[k] / r[0];
    }

    const auto dets = vision::detect_frames(frames, detector);
    f.roi = vision::roi_features(dets, detector.classes().size()).pooled;
    return f;
}

}  // namespace mavqa::model

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

#include "mavqa/audio/clip.hpp"
#include "mavqa/numerics/tensor.hpp"

namespace mavqa::audio {

/// Analysis frame geometry. Defaults follow a 2048/512 frame at 22.05 kHz and
/// scale with the sample rate, so frame and hop durations stay fixed.
struct StftConfig {
    std::size_t window = 2048;
    std::size_t hop = 512;

    static StftConfig for_rate(double sample_rate);
    double frames_per_second(double sample_rate) const { return sample_rate / static_cast<double>(hop); }
};

/// Magnitude spectrogram [frames x (window/2 + 1)] with a periodic Hann
/// window. Frames are centred: frame i is centred on sample i * hop, with
/// zero padding of window/2 at both ends. Throws std::invalid_argument if
/// the clip is shorter than one window.
Tensor magnitude_spectrogram(const AudioClip& clip, const StftConfig& cfg);

/// Half-wave-rectified spectral flux, one value per frame; value i sits at
/// time i * hop / sample_rate. The first value is 0.
std::vector<double> onset_envelope(const AudioClip& clip, const StftConfig& cfg);
std::vector<double> onset_envelope(const AudioClip& clip);

/// Triangular mel filterbank [bins x n_mels] over [0, sample_rate / 2].
Tensor mel_filterbank(std::size_t n_mels, std::size_t n_fft_bins, double sample_rate);

/// log(1e-6 + mel power), [frames x n_mels].
Tensor log_mel(const AudioClip& clip, const StftConfig& cfg, std::size_t n_mels);

/// Raw (biased) autocorrelation r[k] = sum_i x[i] x[i + k] for k in [0, max_lag].
std::vector<double> autocorrelation(const std::vector<double>& x, std::size_t max_lag);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

}  // namespace mavqa::audio

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

#include "mavqa/audio/spectral.hpp"

#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include <fftw3.h>
#include <fmt/format.h>

#include "mavqa/simd/kernels.hpp"

namespace mavqa::audio {
namespace {

// FFTW's planner is not thread-safe; execution with new arrays is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

template <typename T>
using FftwBuf = std::unique_ptr<T[], FftwFree>;

}  // namespace

StftConfig StftConfig::for_rate(double sample_rate) {
    if (sample_rate <= 0) throw std::invalid_argument("StftConfig: sample rate must be positive");
    const double scale = sample_rate / 22050.0;
    StftConfig c;
    c.window = static_cast<std::size_t>(std::max(8.0, std::round(2048.0 * scale)));
    c.hop = static_cast<std::size_t>(std::max(2.0, std::round(512.0 * scale)));
    return c;
}

Tensor magnitude_spectrogram(const AudioClip& clip, const StftConfig& cfg) {
    const std::size_t n = cfg.window, hop = cfg.hop, half = n / 2;
    if (clip.samples.size() < n)
        throw std::invalid_argument(fmt::format("spectrogram: clip has {} samples, shorter than the {}-sample window",
                                                clip.samples.size(), n));
    const std::size_t frames = clip.samples.size() / hop + 1, bins = half + 1;

    std::vector<double> window(n);
    for (std::size_t i = 0; i < n; ++i)
        window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));

    FftwBuf<double> in(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
    FftwBuf<fftw_complex> out(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins)));
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE);
    }
    if (plan == nullptr) throw std::runtime_error("spectrogram: FFTW planning failed");

    Tensor mag = Tensor::matrix(frames, bins);
    std::vector<double> re(bins), im(bins);
    const auto& k = simd::kernels();
    const auto total = static_cast<std::ptrdiff_t>(clip.samples.size());
    for (std::size_t f = 0; f < frames; ++f) {
        const auto start = static_cast<std::ptrdiff_t>(f * hop) - static_cast<std::ptrdiff_t>(half);
        for (std::size_t i = 0; i < n; ++i) {
            const std::ptrdiff_t s = start + static_cast<std::ptrdiff_t>(i);
            in[i] = (s >= 0 && s < total) ? clip.samples[static_cast<std::size_t>(s)] * window[i] : 0.0;
        }
        fftw_execute(plan);
        for (std::size_t b = 0; b < bins; ++b) {
            re[b] = out[b][0];
            im[b] = out[b][1];
        }
        auto row = mag.row(f);
        k.power(re.data(), im.data(), row.data(), bins);
        for (auto& v : row) v = std::sqrt(v);
    }
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    return mag;
}

std::vector<double> onset_envelope(const AudioClip& clip, const StftConfig& cfg) {
    const Tensor mag = magnitude_spectrogram(clip, cfg);
    std::vector<double> env(mag.rows(), 0.0);
    for (std::size_t f = 1; f < mag.rows(); ++f) {
        auto now = mag.row(f), prev = mag.row(f - 1);
        double flux = 0.0;
        for (std::size_t b = 0; b < now.size(); ++b) flux += std::max(0.0, now[b] - prev[b]);
        env[f] = flux;
    }
    return env;
}

std::vector<double> onset_envelope(const AudioClip& clip) {
    return onset_envelope(clip, StftConfig::for_rate(clip.sample_rate));
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Tensor mel_filterbank(std::size_t n_mels, std::size_t n_fft_bins, double sample_rate) {
    if (n_mels == 0 || n_fft_bins < 2) throw std::invalid_argument("mel_filterbank: need n_mels >= 1 and >= 2 bins");
    const double nyquist = sample_rate / 2.0, top = hz_to_mel(nyquist);
    std::vector<double> edges(n_mels + 2);
    for (std::size_t i = 0; i < edges.size(); ++i)
        edges[i] = mel_to_hz(top * static_cast<double>(i) / static_cast<double>(n_mels + 1));
    Tensor fb = Tensor::matrix(n_fft_bins, n_mels);
    for (std::size_t b = 0; b < n_fft_bins; ++b) {
        const double hz = nyquist * static_cast<double>(b) / static_cast<double>(n_fft_bins - 1);
        for (std::size_t m = 0; m < n_mels; ++m) {
            const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
            double w = 0.0;
            if (hz > lo && hz <= mid)
                w = (hz - lo) / (mid - lo);
            else if (hz > mid && hz < hi)
                w = (hi - hz) / (hi - mid);
            fb.at(b, m) = w;
        }
    }
    return fb;
}

Tensor log_mel(const AudioClip& clip, const StftConfig& cfg, std::size_t n_mels) {
    Tensor power = magnitude_spectrogram(clip, cfg);
    for (auto& v : power.data()) v *= v;
    Tensor mel = Tensor::matrix(power.rows(), n_mels);
    const Tensor fb = mel_filterbank(n_mels, power.cols(), clip.sample_rate);
    simd::kernels().gemm_nn(power.rows(), n_mels, power.cols(), power.ptr(), power.cols(), fb.ptr(), n_mels,
                            mel.ptr(), n_mels, false);
    for (auto& v : mel.data()) v = std::log(1e-6 + v);
    return mel;
}

std::vector<double> autocorrelation(const std::vector<double>& x, std::size_t max_lag) {
    std::vector<double> r(max_lag + 1, 0.0);
    const auto& k = simd::kernels();
    for (std::size_t lag = 0; lag <= max_lag && lag < x.size(); ++lag)
        r[lag] = k.dot(x.data(), x.data() + lag, x.size() - lag);
    return r;
}

}  // namespace mavqa::audio

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

#include "mavqa/synth/render.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace mavqa::synth {

std::vector<double> click_times(const ClipSpec& spec) {
    std::vector<double> out;
    const std::size_t n = spec.segments();
    double t = spec.click_phase;
    while (t < spec.duration) {
        out.push_back(t);
        const auto seg = std::min(n - 1, static_cast<std::size_t>(t / spec.segment_seconds));
        t += 60.0 / spec.tempo[seg];
    }
    return out;
}

audio::AudioClip render_clicks(const std::vector<double>& times, double duration, double sample_rate,
                               double amplitude) {
    audio::AudioClip clip;
    clip.sample_rate = sample_rate;
    clip.samples.assign(static_cast<std::size_t>(std::llround(duration * sample_rate)), 0.0);
    for (double t : times) {
        const auto i = static_cast<std::size_t>(std::llround(t * sample_rate));
        if (i < clip.samples.size()) clip.samples[i] += amplitude;
    }
    return clip;
}

void add_tone(std::vector<double>& samples, double sr, double hz, double segment_seconds, const std::vector<int>& gate,
              double amplitude) {
    const auto seg_len = static_cast<std::size_t>(std::llround(segment_seconds * sr));
    const auto ramp = static_cast<std::size_t>(std::llround(kToneRampSeconds * sr));
    const double w = 2.0 * std::numbers::pi * hz / sr;
    for (std::size_t s = 0; s < gate.size(); ++s) {
        if (!gate[s]) continue;
        const bool fade_in = s == 0 || !gate[s - 1];
        const bool fade_out = s + 1 == gate.size() || !gate[s + 1];
        const std::size_t begin = s * seg_len, end = std::min(samples.size(), begin + seg_len);
        for (std::size_t i = begin; i < end; ++i) {
            double g = 1.0;
            if (fade_in && i - begin < ramp) g = static_cast<double>(i - begin) / static_cast<double>(ramp);
            if (fade_out && end - i <= ramp) g = std::min(g, static_cast<double>(end - i - 1) / static_cast<double>(ramp));
            samples[i] += amplitude * g * std::sin(w * static_cast<double>(i));
        }
    }
}

RenderedClip gen_clip(const ClipSpec& spec, const Catalog& catalog) {
    validate(spec, catalog);
    RenderedClip out;
    out.audio = render_clicks(click_times(spec), spec.duration, spec.sample_rate);
    for (std::size_t c = 0; c < catalog.instruments.size(); ++c) {
        std::vector<int> gate(spec.segments());
        for (std::size_t s = 0; s < gate.size(); ++s) gate[s] = spec.active[s][c];
        add_tone(out.audio.samples, spec.sample_rate, spec.tone_hz[c], spec.segment_seconds, gate);
    }
    for (auto& v : out.audio.samples) v = static_cast<double>(static_cast<float>(v));

    const std::size_t size = spec.frame_size;
    out.frames = vision::FrameStack(spec.frames(), size, size);
    const auto palette = catalog.palette();
    std::mt19937_64 rng(spec.seed ^ 0x5eedf00dULL);
    std::uniform_real_distribution<double> noise(-0.03, 0.03);
    const double background[3] = {0.08, 0.08, 0.10};
    for (std::size_t f = 0; f < out.frames.count; ++f) {
        for (std::size_t y = 0; y < size; ++y)
            for (std::size_t x = 0; x < size; ++x)
                for (std::size_t ch = 0; ch < 3; ++ch) out.frames.at(f, y, x, ch) = background[ch] + noise(rng);
        for (const auto& g : spec.glyphs) {
            if (f < g.first_frame || f >= g.end_frame) continue;
            for (int y = g.y; y < g.y + g.h; ++y)
                for (int x = g.x; x < g.x + g.w; ++x)
                    for (std::size_t ch = 0; ch < 3; ++ch)
                        out.frames.at(f, static_cast<std::size_t>(y), static_cast<std::size_t>(x), ch) = palette[g.cls][ch];
        }
    }
    for (auto& v : out.frames.pixels) v = std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
    return out;
}

}  // namespace mavqa::synth

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

#include "mavqa/audio/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string_view>

#include <fmt/format.h>

namespace mavqa::audio {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t u32_at(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint32_t>(b[at]) | static_cast<std::uint32_t>(b[at + 1]) << 8 |
           static_cast<std::uint32_t>(b[at + 2]) << 16 | static_cast<std::uint32_t>(b[at + 3]) << 24;
}

std::uint16_t u16_at(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint16_t>(b[at] | b[at + 1] << 8);
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_tag(std::vector<std::uint8_t>& out, std::string_view tag) { out.insert(out.end(), tag.begin(), tag.end()); }

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, std::string_view tag) {
    return std::memcmp(b.data() + at, tag.data(), 4) == 0;
}

}  // namespace

AudioClip decode_wav(std::span<const std::uint8_t> b) {
    if (b.size() < 12 || !tag_is(b, 0, "RIFF") || !tag_is(b, 8, "WAVE")) throw WavError("not a RIFF/WAVE file");

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    bool have_fmt = false;
    std::span<const std::uint8_t> payload;

    std::size_t pos = 12;
    while (pos + 8 <= b.size()) {
        const std::uint32_t len = u32_at(b, pos + 4);
        const std::size_t body = pos + 8;
        if (len > b.size() - body) throw WavError(fmt::format("chunk at byte {} runs past end of file", pos));
        if (tag_is(b, pos, "fmt ")) {
            if (len < 16) throw WavError("fmt chunk too short");
            format = u16_at(b, body);
            channels = u16_at(b, body + 2);
            rate = u32_at(b, body + 4);
            bits = u16_at(b, body + 14);
            if (format == kFormatExtensible && len >= 26) format = u16_at(b, body + 24);
            have_fmt = true;
        } else if (tag_is(b, pos, "data")) {
            payload = b.subspan(body, len);
        }
        pos = body + len + (len & 1u);
    }
    if (!have_fmt) throw WavError("missing fmt chunk");
    if (payload.data() == nullptr) throw WavError("missing data chunk");
    if (channels == 0 || rate == 0) throw WavError("fmt chunk declares zero channels or zero sample rate");

    const bool pcm16 = format == kFormatPcm && bits == 16;
    const bool f32 = format == kFormatFloat && bits == 32;
    if (!pcm16 && !f32)
        throw WavError(fmt::format("unsupported sample format {} with {} bits (need PCM16 or float32)", format, bits));

    const std::size_t width = bits / 8, frame = width * channels;
    const std::size_t frames = payload.size() / frame;
    AudioClip clip;
    clip.sample_rate = rate;
    clip.samples.resize(frames);
    for (std::size_t i = 0; i < frames; ++i) {
        double acc = 0.0;
        for (std::size_t c = 0; c < channels; ++c) {
            const std::size_t at = i * frame + c * width;
            if (pcm16)
                acc += static_cast<std::int16_t>(u16_at(payload, at)) / 32768.0;
            else
                acc += std::bit_cast<float>(u32_at(payload, at));
        }
        clip.samples[i] = acc / channels;
    }
    return clip;
}

AudioClip read_wav(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw WavError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    try {
        return decode_wav(bytes);
    } catch (const WavError& e) {
        throw WavError(path.string() + ": " + e.what());
    }
}

std::vector<std::uint8_t> encode_wav(const AudioClip& clip, WavEncoding enc) {
    if (clip.sample_rate <= 0 || clip.sample_rate > 4.0e9) throw WavError("sample rate out of range");
    const std::uint16_t bits = enc == WavEncoding::kPcm16 ? 16 : 32;
    const std::uint16_t format = enc == WavEncoding::kPcm16 ? kFormatPcm : kFormatFloat;
    const auto rate = static_cast<std::uint32_t>(std::lround(clip.sample_rate));
    const auto data_len = static_cast<std::uint32_t>(clip.samples.size() * (bits / 8));

    std::vector<std::uint8_t> out;
    out.reserve(44 + data_len);
    put_tag(out, "RIFF");
    put_u32(out, 36 + data_len);
    put_tag(out, "WAVE");
    put_tag(out, "fmt ");
    put_u32(out, 16);
    put_u16(out, format);
    put_u16(out, 1);
    put_u32(out, rate);
    put_u32(out, rate * (bits / 8));
    put_u16(out, bits / 8);
    put_u16(out, bits);
    put_tag(out, "data");
    put_u32(out, data_len);
    for (double s : clip.samples) {
        if (enc == WavEncoding::kPcm16) {
            const double c = std::clamp(s, -1.0, 32767.0 / 32768.0);
            put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lround(c * 32768.0))));
        } else {
            put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(s)));
        }
    }
    return out;
}

void write_wav(const std::filesystem::path& path, const AudioClip& clip, WavEncoding enc) {
    const auto bytes = encode_wav(clip, enc);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw WavError("cannot write " + path.string());
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw WavError("short write to " + path.string());
}

}  // namespace mavqa::audio

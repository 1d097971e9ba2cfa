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

#include "mavqa/vision/frames.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

namespace mavqa::vision {
namespace {

class PpmReader {
public:
    explicit PpmReader(std::span<const std::uint8_t> b) : b_(b) {}

    bool done() {
        skip_space();
        return pos_ >= b_.size();
    }

    std::size_t number() {
        skip_space();
        std::size_t v = 0;
        bool any = false;
        while (pos_ < b_.size() && b_[pos_] >= '0' && b_[pos_] <= '9') {
            v = v * 10 + (b_[pos_++] - '0');
            any = true;
            if (v > (1u << 20)) throw std::runtime_error("ppm: header value too large");
        }
        if (!any) throw std::runtime_error(fmt::format("ppm: expected a number at byte {}", pos_));
        return v;
    }

    void magic() {
        skip_space();
        if (pos_ + 2 > b_.size() || b_[pos_] != 'P' || b_[pos_ + 1] != '6')
            throw std::runtime_error(fmt::format("ppm: expected P6 at byte {}", pos_));
        pos_ += 2;
    }

    std::span<const std::uint8_t> raster(std::size_t n) {
        ++pos_;  // single whitespace after maxval
        if (b_.size() < pos_ || b_.size() - pos_ < n) throw std::runtime_error("ppm: truncated raster");
        auto s = b_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

private:
    void skip_space() {
        while (pos_ < b_.size()) {
            if (b_[pos_] == '#') {
                while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
            } else if (std::isspace(b_[pos_])) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    std::span<const std::uint8_t> b_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_ppm_stack(const FrameStack& frames) {
    std::vector<std::uint8_t> out;
    const std::string header = fmt::format("P6\n{} {}\n255\n", frames.width, frames.height);
    out.reserve(frames.count * (header.size() + frames.frame_size()));
    for (std::size_t f = 0; f < frames.count; ++f) {
        out.insert(out.end(), header.begin(), header.end());
        for (double v : frames.frame(f))
            out.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
    }
    return out;
}

FrameStack decode_ppm_stack(std::span<const std::uint8_t> bytes) {
    PpmReader in(bytes);
    FrameStack fs;
    std::vector<double> pixels;
    while (!in.done()) {
        in.magic();
        const std::size_t w = in.number(), h = in.number(), maxval = in.number();
        if (w == 0 || h == 0) throw std::runtime_error("ppm: zero-sized image");
        if (maxval != 255) throw std::runtime_error(fmt::format("ppm: maxval {} unsupported (need 255)", maxval));
        if (fs.count == 0) {
            fs.width = w;
            fs.height = h;
        } else if (w != fs.width || h != fs.height) {
            throw std::runtime_error(fmt::format("ppm: frame {} is {}x{}, earlier frames are {}x{}", fs.count, w, h,
                                                 fs.width, fs.height));
        }
        for (std::uint8_t v : in.raster(w * h * 3)) pixels.push_back(v / 255.0);
        ++fs.count;
    }
    if (fs.count == 0) throw std::runtime_error("ppm: no frames");
    fs.pixels = std::move(pixels);
    return fs;
}

void write_ppm_stack(const std::filesystem::path& path, const FrameStack& frames) {
    const auto bytes = encode_ppm_stack(frames);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

FrameStack read_ppm_stack(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return decode_ppm_stack(bytes);
}

FrameStack mean_frame(const FrameStack& frames, std::size_t first, std::size_t last) {
    if (first >= last || last > frames.count)
        throw std::invalid_argument(fmt::format("mean_frame: bad range [{}, {}) of {} frames", first, last,
                                                frames.count));
    FrameStack out(1, frames.height, frames.width);
    for (std::size_t f = first; f < last; ++f) {
        auto src = frames.frame(f);
        for (std::size_t i = 0; i < src.size(); ++i) out.pixels[i] += src[i];
    }
    const double inv = 1.0 / static_cast<double>(last - first);
    for (auto& v : out.pixels) v *= inv;
    return out;
}

std::vector<double> downsample(std::span<const double> frame, std::size_t h, std::size_t w, std::size_t out_h,
                               std::size_t out_w) {
    if (out_h == 0 || out_w == 0 || h % out_h != 0 || w % out_w != 0)
        throw std::invalid_argument(fmt::format("downsample: {}x{} does not divide into {}x{}", h, w, out_h, out_w));
    const std::size_t sy = h / out_h, sx = w / out_w;
    std::vector<double> out(out_h * out_w * 3, 0.0);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            for (std::size_t c = 0; c < 3; ++c) out[((y / sy) * out_w + x / sx) * 3 + c] += frame[(y * w + x) * 3 + c];
    const double inv = 1.0 / static_cast<double>(sy * sx);
    for (auto& v : out) v *= inv;
    return out;
}

}  // namespace mavqa::vision

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
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace mavqa::vision {

/// RGB frames, channel values in [0, 1], layout [frame][row][col][channel].
struct FrameStack {
    std::size_t count = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> pixels;

    FrameStack() = default;
    FrameStack(std::size_t n, std::size_t h, std::size_t w) : count(n), height(h), width(w), pixels(n * h * w * 3) {}

    std::size_t frame_size() const { return height * width * 3; }
    std::span<double> frame(std::size_t f) { return {pixels.data() + f * frame_size(), frame_size()}; }
    std::span<const double> frame(std::size_t f) const { return {pixels.data() + f * frame_size(), frame_size()}; }
    double& at(std::size_t f, std::size_t y, std::size_t x, std::size_t c) {
        return pixels[((f * height + y) * width + x) * 3 + c];
    }
    double at(std::size_t f, std::size_t y, std::size_t x, std::size_t c) const {
        return pixels[((f * height + y) * width + x) * 3 + c];
    }
};

/// Frames as concatenated binary PPM (P6, maxval 255) images in one file.
std::vector<std::uint8_t> encode_ppm_stack(const FrameStack& frames);
FrameStack decode_ppm_stack(std::span<const std::uint8_t> bytes);
void write_ppm_stack(const std::filesystem::path& path, const FrameStack& frames);
FrameStack read_ppm_stack(const std::filesystem::path& path);

/// Mean over a range of frames, as a single-frame stack.
FrameStack mean_frame(const FrameStack& frames, std::size_t first, std::size_t last_exclusive);

/// Box-filter downsample of one frame to (out_h x out_w x 3), row-major.
std::vector<double> downsample(std::span<const double> frame, std::size_t h, std::size_t w, std::size_t out_h,
                               std::size_t out_w);

}  // namespace mavqa::vision

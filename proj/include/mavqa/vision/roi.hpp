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

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mavqa/catalog.hpp"
#include "mavqa/numerics/tensor.hpp"
#include "mavqa/vision/frames.hpp"

namespace mavqa::vision {

class FrameError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Box in normalized frame coordinates, top-left origin.
struct Box {
    double x = 0, y = 0, w = 0, h = 0;
};

double iou(const Box& a, const Box& b);

struct Detection {
    std::size_t cls = 0;  // index into the detector's class list
    Box box;
    double confidence = 0.0;
};

class Detector {
public:
    virtual ~Detector() = default;
    virtual const std::vector<std::string>& classes() const = 0;
    /// One RGB frame, row-major [height x width x 3]. Throws FrameError on a
    /// malformed frame.
    virtual std::vector<Detection> detect(std::span<const double> frame, std::size_t height,
                                          std::size_t width) const = 0;
};

struct ColorDetectorConfig {
    double max_color_distance = 0.25;  // Euclidean, RGB in [0, 1]
    double confidence_threshold = 0.5;
    std::size_t min_pixels = 4;
};

/// Finds solid rectangles painted in palette colours. Each 4-connected
/// component of pixels nearest to one palette entry becomes a detection
/// with confidence = filled fraction of its bounding box.
class ColorGlyphDetector final : public Detector {
public:
    ColorGlyphDetector(std::vector<std::string> classes, std::vector<Rgb> palette, ColorDetectorConfig cfg = {});
    explicit ColorGlyphDetector(const Catalog& catalog, ColorDetectorConfig cfg = {});

    const std::vector<std::string>& classes() const override { return classes_; }
    std::vector<Detection> detect(std::span<const double> frame, std::size_t height,
                                  std::size_t width) const override;

private:
    std::vector<std::string> classes_;
    std::vector<Rgb> palette_;
    ColorDetectorConfig cfg_;
};

std::vector<std::vector<Detection>> detect_frames(const FrameStack& frames, const Detector& det);

/// Pooled statistics over all frames, 4 values per class:
///   [mean count per frame (C) | mean centre x, y (2C) | mean area (C)]
/// Absent classes contribute zeros.
struct RoIFeatures {
    std::size_t classes = 0;
    std::size_t frames = 0;
    Tensor pooled;  // [4C]

    double count(std::size_t c) const { return pooled[c]; }
    double centre_x(std::size_t c) const { return pooled[classes + 2 * c]; }
    double centre_y(std::size_t c) const { return pooled[classes + 2 * c + 1]; }
    double area(std::size_t c) const { return pooled[3 * classes + c]; }
};

RoIFeatures roi_features(const std::vector<std::vector<Detection>>& per_frame, std::size_t classes);

nlohmann::json to_json(const std::vector<std::vector<Detection>>& per_frame, const std::vector<std::string>& classes);

}  // namespace mavqa::vision

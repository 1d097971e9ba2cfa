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

#include "mavqa/vision/roi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace mavqa::vision {

double iou(const Box& a, const Box& b) {
    const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
    const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
    const double inter = ix * iy;
    const double uni = a.w * a.h + b.w * b.h - inter;
    return uni > 0 ? inter / uni : 0.0;
}

ColorGlyphDetector::ColorGlyphDetector(std::vector<std::string> classes, std::vector<Rgb> palette,
                                       ColorDetectorConfig cfg)
    : classes_(std::move(classes)), palette_(std::move(palette)), cfg_(cfg) {
    if (classes_.size() != palette_.size())
        throw std::invalid_argument(
            fmt::format("detector has {} classes but {} colours", classes_.size(), palette_.size()));
}

ColorGlyphDetector::ColorGlyphDetector(const Catalog& catalog, ColorDetectorConfig cfg)
    : ColorGlyphDetector(catalog.detection_classes(), catalog.palette(), cfg) {}

std::vector<Detection> ColorGlyphDetector::detect(std::span<const double> frame, std::size_t height,
                                                  std::size_t width) const {
    if (height == 0 || width == 0 || frame.size() != height * width * 3)
        throw FrameError(fmt::format("frame has {} values, expected {}x{}x3", frame.size(), height, width));

    constexpr int kNone = -1;
    std::vector<int> label(height * width, kNone);
    const double max_d2 = cfg_.max_color_distance * cfg_.max_color_distance;
    for (std::size_t i = 0; i < height * width; ++i) {
        const double* px = &frame[i * 3];
        if (!std::isfinite(px[0]) || !std::isfinite(px[1]) || !std::isfinite(px[2]))
            throw FrameError(fmt::format("non-finite pixel at ({}, {})", i / width, i % width));
        double best = std::numeric_limits<double>::infinity();
        int best_c = kNone;
        for (std::size_t c = 0; c < palette_.size(); ++c) {
            double d2 = 0;
            for (int k = 0; k < 3; ++k) d2 += (px[k] - palette_[c][k]) * (px[k] - palette_[c][k]);
            if (d2 < best) {
                best = d2;
                best_c = static_cast<int>(c);
            }
        }
        if (best <= max_d2) label[i] = best_c;
    }

    std::vector<Detection> out;
    std::vector<char> seen(height * width, 0);
    std::vector<std::size_t> stack;
    for (std::size_t start = 0; start < height * width; ++start) {
        if (label[start] == kNone || seen[start]) continue;
        const int cls = label[start];
        std::size_t n = 0, x0 = width, y0 = height, x1 = 0, y1 = 0;
        stack.assign(1, start);
        seen[start] = 1;
        while (!stack.empty()) {
            const std::size_t i = stack.back();
            stack.pop_back();
            const std::size_t y = i / width, x = i % width;
            ++n;
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
            auto visit = [&](std::size_t j) {
                if (!seen[j] && label[j] == cls) {
                    seen[j] = 1;
                    stack.push_back(j);
                }
            };
            if (x > 0) visit(i - 1);
            if (x + 1 < width) visit(i + 1);
            if (y > 0) visit(i - width);
            if (y + 1 < height) visit(i + width);
        }
        if (n < cfg_.min_pixels) continue;
        const double bw = static_cast<double>(x1 - x0 + 1), bh = static_cast<double>(y1 - y0 + 1);
        const double conf = static_cast<double>(n) / (bw * bh);
        if (conf < cfg_.confidence_threshold) continue;
        out.push_back({static_cast<std::size_t>(cls),
                       {static_cast<double>(x0) / static_cast<double>(width),
                        static_cast<double>(y0) / static_cast<double>(height), bw / static_cast<double>(width),
                        bh / static_cast<double>(height)},
                       conf});
    }
    return out;
}

std::vector<std::vector<Detection>> detect_frames(const FrameStack& frames, const Detector& det) {
    std::vector<std::vector<Detection>> out;
    out.reserve(frames.count);
    for (std::size_t f = 0; f < frames.count; ++f) out.push_back(det.detect(frames.frame(f), frames.height, frames.width));
    return out;
}

RoIFeatures roi_features(const std::vector<std::vector<Detection>>& per_frame, std::size_t classes) {
    RoIFeatures r;
    r.classes = classes;
    r.frames = per_frame.size();
    r.pooled = Tensor({4 * classes});
    if (per_frame.empty()) return r;
    std::vector<double> n(classes, 0.0), cx(classes, 0.0), cy(classes, 0.0), area(classes, 0.0);
    for (const auto& dets : per_frame)
        for (const auto& d : dets) {
            if (d.cls >= classes) throw std::out_of_range(fmt::format("detection class {} of {}", d.cls, classes));
            n[d.cls] += 1;
            cx[d.cls] += d.box.x + d.box.w / 2;
            cy[d.cls] += d.box.y + d.box.h / 2;
            area[d.cls] += d.box.w * d.box.h;
        }
    const double frames = static_cast<double>(per_frame.size());
    for (std::size_t c = 0; c < classes; ++c) {
        if (n[c] == 0) continue;
        r.pooled[c] = n[c] / frames;
        r.pooled[classes + 2 * c] = cx[c] / n[c];
        r.pooled[classes + 2 * c + 1] = cy[c] / n[c];
        r.pooled[3 * classes + c] = area[c] / n[c];
    }
    return r;
}

nlohmann::json to_json(const std::vector<std::vector<Detection>>& per_frame, const std::vector<std::string>& classes) {
    nlohmann::json frames = nlohmann::json::array();
    for (const auto& dets : per_frame) {
        nlohmann::json row = nlohmann::json::array();
        for (const auto& d : dets)
            row.push_back({{"class", classes.at(d.cls)},
                           {"bbox", {d.box.x, d.box.y, d.box.w, d.box.h}},
                           {"confidence", d.confidence}});
        frames.push_back(std::move(row));
    }
    return {{"classes", classes}, {"frames", std::move(frames)}};
}

}  // namespace mavqa::vision

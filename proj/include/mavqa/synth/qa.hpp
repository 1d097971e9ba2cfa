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
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mavqa/catalog.hpp"
#include "mavqa/synth/spec.hpp"

namespace mavqa::synth {

enum class Category : std::uint8_t {
    kAudioCounting,
    kAudioComparative,
    kVisualCounting,
    kVisualLocalization,
    kAvExistential,
    kAvCounting,
    kAvLocalization,
    kAvComparative,
    kAvTemporal,
};

inline constexpr std::size_t kCategoryCount = 9;
inline constexpr std::array<Category, kCategoryCount> kAllCategories = {
    Category::kAudioCounting,      Category::kAudioComparative, Category::kVisualCounting,
    Category::kVisualLocalization, Category::kAvExistential,    Category::kAvCounting,
    Category::kAvLocalization,     Category::kAvComparative,    Category::kAvTemporal,
};

std::string_view category_name(Category c);
/// Throws std::invalid_argument for an unknown name.
Category category_from_name(std::string_view name);

/// Fixed answer vocabulary: no, yes, 0..8, instrument names, left, right, simultaneous.
std::vector<std::string> answer_space(const Catalog& catalog);
/// Every word any template can emit, in a fixed order; index 0 is "<unk>".
std::vector<std::string> question_vocabulary(const Catalog& catalog);

struct QASample {
    std::size_t clip = 0;  // index into the dataset's clip list
    Category category = Category::kAudioCounting;
    std::vector<std::string> words;
    std::vector<std::size_t> tokens;  // ids into question_vocabulary
    std::size_t answer = 0;           // index into answer_space
};

/// `per_category` questions of every category, answers computed from the spec
/// alone. A template with no valid instantiation is skipped with a warning.
std::vector<QASample> gen_qa(const ClipSpec& spec, const Catalog& catalog, std::size_t clip_index,
                             std::uint64_t seed, std::size_t per_category = 1);

/// The oracle answer for one category, drawing any free choices (which
/// instruments to name) from `rng_seed`. Empty when the spec admits no
/// instantiation.
std::optional<QASample> instantiate(Category cat, const ClipSpec& spec, const Catalog& catalog, std::uint64_t rng_seed);

std::vector<std::size_t> tokenize(const std::vector<std::string>& words, const std::vector<std::string>& vocab);

}  // namespace mavqa::synth

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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mavqa/catalog.hpp"
#include "mavqa/synth/qa.hpp"
#include "mavqa/synth/render.hpp"
#include "mavqa/synth/spec.hpp"

// On-disk layout:
//   <root>/qa.json            answers, vocabulary, categories, clip ids, samples
//   <root>/clips/<id>.json    clip spec
//   <root>/clips/<id>.wav     mono float32 audio
//   <root>/clips/<id>.ppm     concatenated P6 frames

namespace mavqa::synth {

class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DatasetConfig {
    std::size_t clips = 200;
    std::uint64_t seed = 7;
    std::size_t per_category = 1;
    GenConfig gen;
};

struct Dataset {
    std::filesystem::path root;  // empty for in-memory sets
    std::vector<std::string> clip_ids;
    std::vector<ClipSpec> specs;
    std::vector<QASample> samples;
    std::vector<std::string> answers;
    std::vector<std::string> vocabulary;
};

/// Seed of clip `i`; independent streams per clip.
std::uint64_t clip_seed(std::uint64_t dataset_seed, std::size_t i);

/// Specs and questions only; nothing is rendered.
Dataset generate_dataset(const DatasetConfig& cfg, const Catalog& catalog);

/// Renders every clip and writes the layout above. Overwrites existing files.
void write_dataset(Dataset& ds, const Catalog& catalog, const std::filesystem::path& root);

/// Reads qa.json and every spec. Throws DatasetError on a missing file or an
/// answer outside the answer list.
Dataset load_dataset(const std::filesystem::path& root);

/// The rendered clip: read from disk for a written set, rendered otherwise.
RenderedClip load_clip(const Dataset& ds, const Catalog& catalog, std::size_t i);

nlohmann::json qa_manifest(const Dataset& ds);

}  // namespace mavqa::synth

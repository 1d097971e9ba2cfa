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

#include "mavqa/synth/dataset.hpp"

#include <fstream>

#include <fmt/format.h>

#include "mavqa/audio/wav.hpp"
#include "mavqa/numerics/params.hpp"

namespace mavqa::synth {

namespace fs = std::filesystem;

std::uint64_t clip_seed(std::uint64_t dataset_seed, std::size_t i) { return splitmix64(dataset_seed + i); }

Dataset generate_dataset(const DatasetConfig& cfg, const Catalog& catalog) {
    Dataset ds;
    ds.answers = answer_space(catalog);
    ds.vocabulary = question_vocabulary(catalog);
    for (std::size_t i = 0; i < cfg.clips; ++i) {
        const std::uint64_t seed = clip_seed(cfg.seed, i);
        ds.clip_ids.push_back(fmt::format("clip_{:04d}", i));
        ds.specs.push_back(random_spec(seed, catalog, cfg.gen));
        auto qa = gen_qa(ds.specs.back(), catalog, i, splitmix64(seed), cfg.per_category);
        ds.samples.insert(ds.samples.end(), qa.begin(), qa.end());
    }
    return ds;
}

nlohmann::json qa_manifest(const Dataset& ds) {
    nlohmann::json cats = nlohmann::json::array();
    for (auto c : kAllCategories) cats.push_back(category_name(c));
    nlohmann::json samples = nlohmann::json::array();
    for (const auto& s : ds.samples)
        samples.push_back({{"clip", ds.clip_ids.at(s.clip)},
                           {"category", category_name(s.category)},
                           {"question", s.words},
                           {"tokens", s.tokens},
                           {"answer", ds.answers.at(s.answer)},
                           {"answer_index", s.answer}});
    return {{"answers", ds.answers},   {"vocabulary", ds.vocabulary}, {"categories", cats},
            {"clips", ds.clip_ids},    {"samples", samples}};
}

namespace {

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw DatasetError("cannot write " + p.string());
    f << text;
}

nlohmann::json read_json(const fs::path& p) {
    std::ifstream f(p);
    if (!f) throw DatasetError("cannot read " + p.string());
    try {
        return nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        throw DatasetError(fmt::format("{}: {}", p.string(), e.what()));
    }
}

}  // namespace

void write_dataset(Dataset& ds, const Catalog& catalog, const fs::path& root) {
    fs::create_directories(root / "clips");
    for (std::size_t i = 0; i < ds.specs.size(); ++i) {
        const fs::path base = root / "clips" / ds.clip_ids[i];
        const RenderedClip clip = gen_clip(ds.specs[i], catalog);
        write_text(base.string() + ".json", to_json(ds.specs[i]).dump(2) + "\n");
        audio::write_wav(base.string() + ".wav", clip.audio);
        vision::write_ppm_stack(base.string() + ".ppm", clip.frames);
    }
    write_text(root / "qa.json", qa_manifest(ds).dump(1) + "\n");
    ds.root = root;
}

Dataset load_dataset(const fs::path& root) {
    const nlohmann::json j = read_json(root / "qa.json");
    Dataset ds;
    ds.root = root;
    try {
        ds.answers = j.at("answers").get<std::vector<std::string>>();
        ds.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
        ds.clip_ids = j.at("clips").get<std::vector<std::string>>();
        std::map<std::string, std::size_t> clip_index;
        for (std::size_t i = 0; i < ds.clip_ids.size(); ++i) clip_index[ds.clip_ids[i]] = i;
        for (const auto& s : j.at("samples")) {
            QASample q;
            const auto clip = s.at("clip").get<std::string>();
            auto it = clip_index.find(clip);
            if (it == clip_index.end()) throw DatasetError("sample refers to unknown clip " + clip);
            q.clip = it->second;
            q.category = category_from_name(s.at("category").get<std::string>());
            q.words = s.at("question").get<std::vector<std::string>>();
            q.tokens = tokenize(q.words, ds.vocabulary);
            const auto answer = s.at("answer").get<std::string>();
            auto a = std::find(ds.answers.begin(), ds.answers.end(), answer);
            if (a == ds.answers.end()) throw DatasetError(fmt::format("answer '{}' is not in the answer list", answer));
            q.answer = static_cast<std::size_t>(a - ds.answers.begin());
            ds.samples.push_back(std::move(q));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DatasetError(fmt::format("{}: {}", (root / "qa.json").string(), e.what()));
    } catch (const std::invalid_argument& e) {
        throw DatasetError(fmt::format("{}: {}", (root / "qa.json").string(), e.what()));
    }
    for (const auto& id : ds.clip_ids) {
        try {
            ds.specs.push_back(spec_from_json(read_json(root / "clips" / (id + ".json"))));
        } catch (const nlohmann::json::exception& e) {
            throw DatasetError(fmt::format("clip {}: {}", id, e.what()));
        }
    }
    return ds;
}

RenderedClip load_clip(const Dataset& ds, const Catalog& catalog, std::size_t i) {
    if (ds.root.empty()) return gen_clip(ds.specs.at(i), catalog);
    const fs::path base = ds.root / "clips" / ds.clip_ids.at(i);
    RenderedClip c;
    c.audio = audio::read_wav(base.string() + ".wav");
    c.frames = vision::read_ppm_stack(base.string() + ".ppm");
    return c;
}

}  // namespace mavqa::synth

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

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <random>

#include <unistd.h>

#include "mavqa/numerics/params.hpp"
#include "mavqa/synth/dataset.hpp"
#include "mavqa/synth/qa.hpp"
#include "mavqa/synth/render.hpp"
#include "mavqa/synth/spec.hpp"
#include "mavqa/vision/roi.hpp"

using namespace mavqa;
using namespace mavqa::synth;

namespace {

// Hand-built clip: 10 segments, violin on for 4, piano on for 2.
ClipSpec small_spec(const Catalog& cat) {
    ClipSpec s;
    s.tempo.assign(10, 100.0);
    s.click_phase = 0.1;
    s.active.assign(10, std::vector<int>(cat.instruments.size(), 0));
    for (std::size_t i = 0; i < 4; ++i) s.active[i][0] = 1;
    for (std::size_t i = 6; i < 8; ++i) s.active[i][1] = 1;
    for (const auto& c : cat.instruments) s.tone_hz.push_back(std::sqrt(c.lo_hz * c.hi_hz));
    s.glyphs.push_back({0, 4, 10, 8, 8, 0, 60});   // instrument 0, left
    s.glyphs.push_back({1, 40, 10, 8, 8, 0, 60});  // instrument 1, right
    s.glyphs.push_back({1, 40, 40, 8, 8, 0, 60});  // instrument 1 again
    return s;
}

std::string answer_of(const QASample& q, const Catalog& cat) { return answer_space(cat)[q.answer]; }

std::filesystem::path scratch_dir(const std::string& tag) {
    auto p = std::filesystem::temp_directory_path() / ("mavqa_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("hand-built spec validates and reports totals") {
    const auto cat = default_catalog();
    const auto s = small_spec(cat);
    CHECK_NOTHROW(validate(s, cat));
    CHECK(s.segments() == 10);
    CHECK(s.frames() == 60);
    const auto totals = source_totals(s);
    CHECK(totals[0] == 4);
    CHECK(totals[1] == 2);
    CHECK(totals[2] == 0);
    CHECK(glyph_count(s, 1) == 2);
    CHECK(glyph_count(s, 3) == 0);
}

TEST_CASE("validation rejects malformed specs") {
    const auto cat = default_catalog();
    auto bad = [&](auto mutate) {
        auto s = small_spec(cat);
        mutate(s);
        CHECK_THROWS_AS(validate(s, cat), SpecError);
    };
    bad([](ClipSpec& s) { s.tempo.pop_back(); });
    bad([](ClipSpec& s) { s.tempo[3] = 10.0; });
    bad([](ClipSpec& s) { s.active[2][0] = 2; });
    bad([](ClipSpec& s) { s.active.pop_back(); });
    bad([](ClipSpec& s) { s.tone_hz[0] = 1.0; });
    bad([](ClipSpec& s) { s.glyphs[0].x = 60; });
    bad([](ClipSpec& s) { s.glyphs[0].end_frame = 0; });
    bad([](ClipSpec& s) { s.glyphs[2].y = 12; });  // overlaps glyph 1
    bad([](ClipSpec& s) { s.segment_seconds = 90.0; });
    bad([](ClipSpec& s) { s.click_phase = 60.0; });
}

TEST_CASE("question oracles on the hand-built spec") {
    const auto cat = default_catalog();
    const auto s = small_spec(cat);
    auto ask = [&](Category c) {
        auto q = instantiate(c, s, cat, 11);
        REQUIRE(q.has_value());
        return *q;
    };
    CHECK(answer_of(ask(Category::kAudioCounting), cat) == "2");
    CHECK(answer_of(ask(Category::kVisualCounting), cat) == "3");
    CHECK(answer_of(ask(Category::kAvExistential), cat) == "no");
    CHECK(answer_of(ask(Category::kAvCounting), cat) == "2");  // distinct sounding classes on screen
    CHECK(answer_of(ask(Category::kAvTemporal), cat) == cat.instruments[0].name);

    // Only instrument 0 has a single glyph, so localization must name it.
    const auto loc = ask(Category::kVisualLocalization);
    CHECK(std::find(loc.words.begin(), loc.words.end(), cat.instruments[0].name) != loc.words.end());
    CHECK(answer_of(loc, cat) == "left");

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto q = instantiate(Category::kAvComparative, s, cat, seed);
        REQUIRE(q.has_value());
        // words: does the X play longer than the Y ?
        auto idx = [&](const std::string& w) {
            for (std::size_t i = 0; i < cat.instruments.size(); ++i)
                if (cat.instruments[i].name == w) return i;
            FAIL("not an instrument: " << w);
            return std::size_t{0};
        };
        const auto totals = source_totals(s);
        const auto x = idx(q->words[2]), y = idx(q->words[7]);
        CHECK(answer_of(*q, cat) == (totals[x] > totals[y] ? "yes" : "no"));
    }
}

TEST_CASE("a conductor glyph flips the existential answer") {
    const auto cat = default_catalog();
    auto s = small_spec(cat);
    s.glyphs.push_back({cat.role_index("conductor"), 20, 50, 6, 6, 0, 60});
    REQUIRE_NOTHROW(validate(s, cat));
    CHECK(answer_of(*instantiate(Category::kAvExistential, s, cat, 1), cat) == "yes");
}

TEST_CASE("silent clip admits no temporal question") {
    const auto cat = default_catalog();
    auto s = small_spec(cat);
    for (auto& row : s.active) std::fill(row.begin(), row.end(), 0);
    CHECK_FALSE(instantiate(Category::kAvTemporal, s, cat, 3).has_value());
    CHECK_FALSE(instantiate(Category::kAudioComparative, s, cat, 3).has_value());
    CHECK(answer_of(*instantiate(Category::kAudioCounting, s, cat, 3), cat) == "0");
}

TEST_CASE("property: random specs validate and every answer is in vocabulary") {
    const auto cat = default_catalog();
    const auto answers = answer_space(cat);
    const auto vocab = question_vocabulary(cat);
    std::mt19937_64 gen(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const auto seed = gen();
        const auto s = random_spec(seed, cat);
        REQUIRE_NOTHROW(validate(s, cat));
        for (const auto& q : gen_qa(s, cat, 0, seed ^ 1)) {
            CHECK(q.answer < answers.size());
            CHECK(q.tokens.size() == q.words.size());
            for (auto t : q.tokens) CHECK(t > 0);  // no unknown words
            for (auto t : q.tokens) CHECK(t < vocab.size());
        }
    }
}

TEST_CASE("property: generated rhythm jumps exceed a quarter of the mean tempo") {
    const auto cat = default_catalog();
    std::mt19937_64 gen(99);
    for (int trial = 0; trial < 200; ++trial) {
        const auto s = random_spec(gen(), cat);
        double mean = 0;
        for (double t : s.tempo) mean += t;
        mean /= static_cast<double>(s.tempo.size());
        for (std::size_t i = 1; i < s.tempo.size(); ++i) {
            const double jump = std::abs(s.tempo[i] - s.tempo[i - 1]);
            CHECK((jump == 0.0 || jump > 0.25 * mean));
        }
    }
}

TEST_CASE("spec JSON round trip") {
    const auto cat = default_catalog();
    const auto s = random_spec(5, cat);
    const auto back = spec_from_json(to_json(s));
    CHECK(to_json(back) == to_json(s));
}

TEST_CASE("rendering is deterministic and glyphs are detectable") {
    const auto cat = default_catalog();
    const auto s = small_spec(cat);
    const auto a = gen_clip(s, cat), b = gen_clip(s, cat);
    CHECK(a.audio.samples == b.audio.samples);
    CHECK(a.frames.pixels == b.frames.pixels);
    CHECK(a.frames.count == 60);

    const vision::ColorGlyphDetector det(cat);
    const auto dets = det.detect(a.frames.frame(0), a.frames.height, a.frames.width);
    REQUIRE(dets.size() == 3);
    for (const auto& g : s.glyphs) {
        const vision::Box truth{g.x / 64.0, g.y / 64.0, g.w / 64.0, g.h / 64.0};
        double best = 0;
        for (const auto& d : dets)
            if (d.cls == g.cls) best = std::max(best, vision::iou(d.box, truth));
        CHECK(best >= 0.9);
    }
}

TEST_CASE("dataset generation is seed-deterministic") {
    const auto cat = default_catalog();
    DatasetConfig cfg;
    cfg.clips = 12;
    const auto a = generate_dataset(cfg, cat), b = generate_dataset(cfg, cat);
    CHECK(qa_manifest(a).dump() == qa_manifest(b).dump());
    cfg.seed = 8;
    CHECK(qa_manifest(generate_dataset(cfg, cat)).dump() != qa_manifest(a).dump());
    CHECK(clip_seed(7, 3) == splitmix64(10));
    // about one question per category per clip
    CHECK(a.samples.size() > 12 * 7);
    CHECK(a.samples.size() <= 12 * 9);
}

TEST_CASE("dataset write and load round trip") {
    const auto cat = default_catalog();
    DatasetConfig cfg;
    cfg.clips = 3;
    auto ds = generate_dataset(cfg, cat);
    const auto root = scratch_dir("ds");
    write_dataset(ds, cat, root);
    CHECK(std::filesystem::exists(root / "qa.json"));
    const auto back = load_dataset(root);
    CHECK(back.clip_ids == ds.clip_ids);
    CHECK(qa_manifest(back).dump() == qa_manifest(ds).dump());
    for (std::size_t i = 0; i < 3; ++i) {
        const auto disk = load_clip(back, cat, i);
        const auto mem = gen_clip(ds.specs[i], cat);
        CHECK(disk.audio.samples == mem.audio.samples);
        CHECK(disk.frames.pixels == mem.frames.pixels);
    }
    std::filesystem::remove(root / "qa.json");
    CHECK_THROWS_AS(load_dataset(root), DatasetError);
    std::filesystem::remove_all(root);
}

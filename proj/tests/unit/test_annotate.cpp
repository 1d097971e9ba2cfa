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

#include <cmath>
#include <numbers>
#include <random>

#include "mavqa/annotate/rhythm.hpp"
#include "mavqa/annotate/source.hpp"
#include "mavqa/audio/clip.hpp"

using namespace mavqa;
using audio::AudioClip;

namespace {

constexpr double kRate = 11025.0;

// Clicks whose tempo is set per 6 s segment.
AudioClip piecewise_clicks(const std::vector<double>& tempo, double seg_s = 6.0) {
    const double seconds = seg_s * static_cast<double>(tempo.size());
    AudioClip c{std::vector<double>(static_cast<std::size_t>(std::llround(seconds * kRate)), 0.0), kRate};
    double t = 0.05;
    while (t < seconds) {
        c.samples[static_cast<std::size_t>(std::llround(t * kRate))] = 0.6;
        t += 60.0 / tempo[static_cast<std::size_t>(t / seg_s)];
    }
    return c;
}

AudioClip tone(double hz, double seconds, double amp = 0.2) {
    AudioClip c{std::vector<double>(static_cast<std::size_t>(std::llround(seconds * kRate))), kRate};
    for (std::size_t i = 0; i < c.samples.size(); ++i)
        c.samples[i] = amp * std::sin(2 * std::numbers::pi * hz * static_cast<double>(i) / kRate);
    return c;
}

// Tones gated per segment: gates[segment][band].
AudioClip gated(const std::vector<std::vector<int>>& gates, const std::vector<double>& hz, double seg_s = 6.0) {
    const auto per = static_cast<std::size_t>(seg_s * kRate);
    AudioClip c{std::vector<double>(per * gates.size(), 0.0), kRate};
    for (std::size_t s = 0; s < gates.size(); ++s)
        for (std::size_t k = 0; k < hz.size(); ++k)
            if (gates[s][k])
                for (std::size_t i = s * per; i < (s + 1) * per; ++i)
                    c.samples[i] += 0.12 * std::sin(2 * std::numbers::pi * hz[k] * static_cast<double>(i) / kRate);
    return c;
}

std::vector<annotate::Band> test_bands() {
    return {{"cello", 100, 250}, {"flute", 300, 600}, {"trumpet", 1000, 2000}};
}

const std::vector<double> kCentres = {170, 440, 1400};

}  // namespace

TEST_CASE("boundary labels against the threshold") {
    using O = std::optional<double>;
    CHECK(annotate::boundary_labels({O(100), O(100), O(140), O(90)}, 25) == std::vector<int>{0, 1, 1});
    CHECK(annotate::boundary_labels({O(100), O(125)}, 25) == std::vector<int>{0});  // strictly greater
    CHECK(annotate::boundary_labels({O(100), std::nullopt, O(100)}, 25) == std::vector<int>{0, 0});
}

TEST_CASE("constant tempo gives all-zero labels") {
    const auto t = annotate::rhythm_labels(piecewise_clicks(std::vector<double>(10, 100.0)));
    REQUIRE(t.labels.size() == 9);
    for (int l : t.labels) CHECK(l == 0);
    CHECK(t.threshold == 0.25 * t.mean_bpm);
}

TEST_CASE("a 60 to 120 BPM jump at 30 s labels only the boundary between segments 4 and 5") {
    std::vector<double> tempo(10, 60.0);
    for (std::size_t i = 5; i < 10; ++i) tempo[i] = 120.0;
    const auto t = annotate::rhythm_labels(piecewise_clicks(tempo));
    REQUIRE(t.labels.size() == 9);
    for (std::size_t i = 0; i < 9; ++i) CHECK(t.labels[i] == (i == 4 ? 1 : 0));
    CHECK(t.threshold == 0.25 * t.mean_bpm);
    CHECK(t.mean_bpm >= 40.0);
    CHECK(t.mean_bpm <= 200.0);
}

TEST_CASE("a supplied mean of 100 BPM gives a threshold of 25") {
    const auto t = annotate::rhythm_labels_with_mean(piecewise_clicks({90, 90, 90}), 100.0);
    CHECK(t.threshold == 25.0);
    CHECK(t.mean_bpm == 100.0);
}

TEST_CASE("rhythm labels need two segments and some tempo") {
    CHECK_THROWS_AS(annotate::rhythm_labels(piecewise_clicks({100})), std::invalid_argument);
    AudioClip quiet{std::vector<double>(static_cast<std::size_t>(12 * kRate), 0.0), kRate};
    CHECK_THROWS_AS(annotate::rhythm_labels(quiet), std::runtime_error);
}

TEST_CASE("with a fixed mean, changing one segment only touches its two boundaries") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> bpm(60, 160);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> tempo(8);
        for (auto& v : tempo) v = bpm(rng);
        auto changed = tempo;
        const std::size_t k = 2 + static_cast<std::size_t>(rng() % 4);
        changed[k] = tempo[k] > 110 ? tempo[k] - 50 : tempo[k] + 50;
        const auto a = annotate::rhythm_labels_with_mean(piecewise_clicks(tempo), 110.0);
        const auto b = annotate::rhythm_labels_with_mean(piecewise_clicks(changed), 110.0);
        for (std::size_t i = 0; i < a.labels.size(); ++i)
            if (i + 1 < k || i > k) CHECK(a.labels[i] == b.labels[i]);
    }
}

TEST_CASE("rhythm timeline json round trip") {
    const auto t = annotate::rhythm_labels(piecewise_clicks({80, 80, 150}));
    const auto j = annotate::to_json(t);
    CHECK(j.at("labels").size() == 2);
    const auto back = annotate::rhythm_from_json(j);
    CHECK(back.labels == t.labels);
    CHECK(back.mean_bpm == t.mean_bpm);
    CHECK(back.threshold == t.threshold);
    CHECK(back.bpm == t.bpm);
}

TEST_CASE("stub separator on tones, silence and noise") {
    const annotate::StubBandSeparator sep(test_bands());
    auto flute = annotate::separate_sources(tone(440, 6), sep, 0.5);
    REQUIRE(flute.size() == 1);
    CHECK(sep.classes()[flute[0].cls] == "flute");
    CHECK(flute[0].confidence > 0.95);

    AudioClip quiet{std::vector<double>(static_cast<std::size_t>(6 * kRate), 0.0), kRate};
    CHECK(annotate::separate_sources(quiet, sep, 0.25).empty());

    auto both = tone(170, 6);
    const auto hi = tone(1400, 6);
    for (std::size_t i = 0; i < both.samples.size(); ++i) both.samples[i] += hi.samples[i];
    const auto two = annotate::separate_sources(both, sep, 0.25);
    REQUIRE(two.size() == 2);
    CHECK(sep.classes()[two[0].cls] == "cello");
    CHECK(sep.classes()[two[1].cls] == "trumpet");

    CHECK(annotate::separate_sources(tone(4000, 6), sep, 0.25).empty());
}

TEST_CASE("white noise splits evenly between two equal bands") {
    // Flat expected power per bin, so each half of the spectrum holds half the energy.
    const annotate::StubBandSeparator sep({{"low", 0, kRate / 4}, {"high", kRate / 4, kRate / 2 + 1}});
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n(0, 0.1);
    AudioClip noise{std::vector<double>(static_cast<std::size_t>(6 * kRate)), kRate};
    for (auto& s : noise.samples) s = n(rng);
    const auto scores = sep.separate(noise);
    REQUIRE(scores.size() == 2);
    CHECK(scores[0].confidence == doctest::Approx(0.5).epsilon(0.1));
    CHECK(scores[1].confidence == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("band validation") {
    CHECK_THROWS_AS(annotate::StubBandSeparator({{"a", 100, 300}, {"b", 200, 400}}), std::invalid_argument);
    CHECK_THROWS_AS(annotate::StubBandSeparator({{"a", 300, 100}}), std::invalid_argument);
    CHECK_THROWS_AS(annotate::StubBandSeparator({}), std::invalid_argument);
    CHECK_THROWS_AS(annotate::StubBandSeparator({{"a", 100, 200}, {"a", 300, 400}}), std::invalid_argument);
}

TEST_CASE("source timeline totals") {
    const annotate::StubBandSeparator sep(test_bands());
    std::vector<std::vector<int>> gates(10, {1, 0, 0});
    for (std::size_t s = 0; s < 5; ++s) gates[s][1] = 1;
    const auto t = annotate::source_timeline(gated(gates, kCentres), sep);
    REQUIRE(t.counts.size() == 10);
    CHECK(t.totals == std::vector<int>{10, 5, 0});
    for (std::size_t s = 5; s < 10; ++s) CHECK(t.counts[s][1] == 0);

    AudioClip quiet{std::vector<double>(static_cast<std::size_t>(12 * kRate), 0.0), kRate};
    const auto none = annotate::source_timeline(quiet, sep);
    for (const auto& row : none.counts)
        for (int v : row) CHECK(v == 0);

    const auto j = annotate::to_json(t);
    CHECK(j.at("totals").at("cello") == 10);
    CHECK(j.at("counts").size() == 10);
}

TEST_CASE("timeline totals are column sums and grow with added segments") {
    const annotate::StubBandSeparator sep(test_bands());
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 6; ++trial) {
        const std::size_t n = 1 + rng() % 3;
        std::vector<std::vector<int>> gates(n, std::vector<int>(3));
        for (auto& row : gates)
            for (auto& g : row) g = static_cast<int>(rng() % 2);
        const auto t = annotate::source_timeline(gated(gates, kCentres), sep);
        for (std::size_t c = 0; c < 3; ++c) {
            int sum = 0;
            for (const auto& row : t.counts) sum += row[c];
            CHECK(t.totals[c] == sum);
            CHECK(t.totals[c] == [&] { int s = 0; for (auto& r : gates) s += r[c]; return s; }());
        }
        const std::size_t c = rng() % 3;
        auto more = gates;
        more.push_back({0, 0, 0});
        more.back()[c] = 1;
        const auto t2 = annotate::source_timeline(gated(more, kCentres), sep);
        CHECK(t2.totals[c] >= t.totals[c]);
    }
}

TEST_CASE("rhythm and source annotators agree on the segment count") {
    const annotate::StubBandSeparator sep(test_bands());
    for (double seconds : {12.0, 13.0, 20.5}) {
        std::vector<double> tempo(static_cast<std::size_t>(std::ceil(seconds / 6.0)), 100.0);
        auto clip = piecewise_clicks(tempo);
        clip.samples.resize(static_cast<std::size_t>(seconds * kRate));
        CHECK(annotate::rhythm_labels(clip).bpm.size() == annotate::source_timeline(clip, sep).counts.size());
    }
}

namespace {

class BrokenSeparator final : public annotate::SourceSeparator {
public:
    const std::vector<std::string>& classes() const override { return names_; }
    std::vector<annotate::SourceScore> separate(const AudioClip& seg) const override {
        if (calls_++ == 1) throw std::runtime_error("model crashed");
        return {{0, 1.0}};
    }

private:
    std::vector<std::string> names_ = {"x"};
    mutable int calls_ = 0;
};

}  // namespace

TEST_CASE("a failing separator marks the segment unknown") {
    BrokenSeparator sep;
    AudioClip c{std::vector<double>(static_cast<std::size_t>(18 * kRate), 0.1), kRate};
    const auto t = annotate::source_timeline(c, sep);
    CHECK(t.unknown == std::vector<std::size_t>{1});
    CHECK(t.counts[1][0] == 0);
    CHECK(t.totals[0] == 2);
}

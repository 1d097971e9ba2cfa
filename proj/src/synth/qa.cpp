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

#include "mavqa/synth/qa.hpp"

#include <algorithm>
#include <random>
#include <sstream>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace mavqa::synth {
namespace {

constexpr std::array<std::string_view, kCategoryCount> kNames = {
    "audio-counting", "audio-comparative", "visual-counting", "visual-localization", "av-existential",
    "av-counting",    "av-localization",   "av-comparative",  "av-temporal",
};

// Templates; X and Y are replaced by instrument names.
constexpr std::array<std::string_view, kCategoryCount> kTemplates = {
    "how many instruments are sounding ?",
    "which sounds longer , the X or the Y ?",
    "how many instruments are visible ?",
    "where is the X ?",
    "is there a conductor ?",
    "how many sounding instruments are visible ?",
    "where is the sounding X ?",
    "does the X play longer than the Y ?",
    "which instrument plays the longest ?",
};

std::vector<std::string> split(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream in{std::string(s)};
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

std::size_t answer_index(const std::vector<std::string>& answers, const std::string& a) {
    auto it = std::find(answers.begin(), answers.end(), a);
    if (it == answers.end()) throw std::logic_error("answer '" + a + "' is not in the answer space");
    return static_cast<std::size_t>(it - answers.begin());
}

template <typename Rng>
std::size_t pick(Rng& rng, const std::vector<std::size_t>& from) {
    return from[std::uniform_int_distribution<std::size_t>(0, from.size() - 1)(rng)];
}

std::string side_of(const ClipSpec& spec, std::size_t cls) {
    for (const auto& g : spec.glyphs)
        if (g.cls == cls) return 2 * g.x + g.w <= static_cast<int>(spec.frame_size) ? "left" : "right";
    throw std::logic_error("no glyph of the requested class");
}

}  // namespace

std::string_view category_name(Category c) { return kNames[static_cast<std::size_t>(c)]; }

Category category_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kCategoryCount; ++i)
        if (kNames[i] == name) return kAllCategories[i];
    throw std::invalid_argument("unknown question category '" + std::string(name) + "'");
}

std::vector<std::string> answer_space(const Catalog& catalog) {
    std::vector<std::string> a = {"no", "yes"};
    for (int i = 0; i <= 8; ++i) a.push_back(std::to_string(i));
    for (const auto& c : catalog.instruments) a.push_back(c.name);
    for (const char* s : {"left", "right", "simultaneous"}) a.emplace_back(s);
    return a;
}

std::vector<std::string> question_vocabulary(const Catalog& catalog) {
    std::vector<std::string> v = {"<unk>"};
    for (auto t : kTemplates)
        for (auto& w : split(t))
            if (w != "X" && w != "Y" && std::find(v.begin(), v.end(), w) == v.end()) v.push_back(w);
    for (const auto& c : catalog.instruments) v.push_back(c.name);
    return v;
}

std::vector<std::size_t> tokenize(const std::vector<std::string>& words, const std::vector<std::string>& vocab) {
    std::vector<std::size_t> ids;
    for (const auto& w : words) {
        auto it = std::find(vocab.begin(), vocab.end(), w);
        ids.push_back(it == vocab.end() ? 0 : static_cast<std::size_t>(it - vocab.begin()));
    }
    return ids;
}

std::optional<QASample> instantiate(Category cat, const ClipSpec& spec, const Catalog& catalog, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto answers = answer_space(catalog);
    const auto totals = source_totals(spec);
    const std::size_t n_inst = catalog.instruments.size();
    const auto name = [&](std::size_t c) { return catalog.instruments[c].name; };

    std::vector<std::size_t> heard, unique_visible, visible;
    for (std::size_t c = 0; c < n_inst; ++c) {
        if (totals[c] > 0) heard.push_back(c);
        const auto k = glyph_count(spec, c);
        if (k > 0) visible.push_back(c);
        if (k == 1) unique_visible.push_back(c);
    }

    std::string x, y, answer;
    switch (cat) {
        case Category::kAudioCounting:
            answer = std::to_string(heard.size());
            break;
        case Category::kAudioComparative: {
            std::vector<std::pair<std::size_t, std::size_t>> tied, any;
            for (std::size_t a = 0; a < n_inst; ++a)
                for (std::size_t b = a + 1; b < n_inst; ++b) {
                    if (totals[a] == 0 && totals[b] == 0) continue;
                    any.emplace_back(a, b);
                    if (totals[a] == totals[b]) tied.emplace_back(a, b);
                }
            if (any.empty()) return std::nullopt;
            const bool want_tie = !tied.empty() && std::uniform_real_distribution<double>(0, 1)(rng) < 0.6;
            const auto& pool = want_tie ? tied : any;
            auto [a, b] = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
            if (std::uniform_int_distribution<int>(0, 1)(rng)) std::swap(a, b);
            x = name(a);
            y = name(b);
            answer = totals[a] == totals[b] ? "simultaneous" : name(totals[a] > totals[b] ? a : b);
            break;
        }
        case Category::kVisualCounting: {
            std::size_t k = 0;
            for (std::size_t c = 0; c < n_inst; ++c) k += glyph_count(spec, c);
            if (k > 8) return std::nullopt;
            answer = std::to_string(k);
            break;
        }
        case Category::kVisualLocalization: {
            if (unique_visible.empty()) return std::nullopt;
            const auto c = pick(rng, unique_visible);
            x = name(c);
            answer = side_of(spec, c);
            break;
        }
        case Category::kAvExistential:
            answer = glyph_count(spec, catalog.role_index("conductor")) > 0 ? "yes" : "no";
            break;
        case Category::kAvCounting: {
            std::size_t k = 0;
            for (auto c : heard) k += std::count(visible.begin(), visible.end(), c);
            answer = std::to_string(k);
            break;
        }
        case Category::kAvLocalization: {
            std::vector<std::size_t> ok;
            for (auto c : unique_visible)
                if (totals[c] > 0) ok.push_back(c);
            if (ok.empty()) return std::nullopt;
            const auto c = pick(rng, ok);
            x = name(c);
            answer = side_of(spec, c);
            break;
        }
        case Category::kAvComparative: {
            std::vector<std::pair<std::size_t, std::size_t>> pairs;
            for (std::size_t a = 0; a < n_inst; ++a)
                for (std::size_t b = 0; b < n_inst; ++b)
                    if (a != b && totals[a] != totals[b]) pairs.emplace_back(a, b);
            if (pairs.empty()) return std::nullopt;
            const auto [a, b] = pairs[std::uniform_int_distribution<std::size_t>(0, pairs.size() - 1)(rng)];
            x = name(a);
            y = name(b);
            answer = totals[a] > totals[b] ? "yes" : "no";
            break;
        }
        case Category::kAvTemporal: {
            const auto best = std::max_element(totals.begin(), totals.end());
            if (best == totals.end() || *best == 0 || std::count(totals.begin(), totals.end(), *best) != 1)
                return std::nullopt;
            answer = name(static_cast<std::size_t>(best - totals.begin()));
            break;
        }
    }

    QASample q;
    q.category = cat;
    for (auto& w : split(kTemplates[static_cast<std::size_t>(cat)])) q.words.push_back(w == "X" ? x : w == "Y" ? y : w);
    q.tokens = tokenize(q.words, question_vocabulary(catalog));
    q.answer = answer_index(answers, answer);
    return q;
}

std::vector<QASample> gen_qa(const ClipSpec& spec, const Catalog& catalog, std::size_t clip_index, std::uint64_t seed,
                             std::size_t per_category) {
    std::vector<QASample> out;
    std::mt19937_64 rng(seed);
    for (auto cat : kAllCategories)
        for (std::size_t i = 0; i < per_category; ++i) {
            auto q = instantiate(cat, spec, catalog, rng());
            if (!q) {
                spdlog::warn("clip {}: no valid '{}' question; skipped", clip_index, category_name(cat));
                continue;
            }
            q->clip = clip_index;
            out.push_back(std::move(*q));
        }
    return out;
}

}  // namespace mavqa::synth

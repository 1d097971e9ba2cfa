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
#include <cmath>
#include <random>

#include "mavqa/model/fusion.hpp"
#include "support/testing.hpp"

using namespace mavqa;
using namespace mavqa::model;
using mavqa::testing::oracle_matmul;
using mavqa::testing::random_tensor;
using mavqa::testing::same_bits;

namespace {

constexpr std::size_t kQ = 5;  // question width

const std::array<std::size_t, kModules> kWidths = {4, 4, 3, 3, 6, 6, 8};

struct Fixture {
    ParamSet ps;
    FusionHead head;
    Fixture(std::size_t d, std::size_t heads, bool gate, std::uint64_t seed = 3)
        : head(make_fusion_head(ps, Initializer(seed), kWidths, kQ, d, 6, heads, gate)) {}
};

struct Inputs {
    std::array<Tensor, kModules> rows;
    Tensor question;
};

Inputs random_inputs(std::mt19937_64& rng) {
    Inputs in;
    for (std::size_t i = 0; i < kModules; ++i) in.rows[i] = random_tensor(rng, {1, kWidths[i]}, -2, 2);
    in.question = random_tensor(rng, {1, kQ});
    return in;
}

ModuleBank bind(ag::Tape& tape, const Inputs& in) {
    ModuleBank b;
    for (std::size_t i = 0; i < kModules; ++i) b[i] = tape.constant(in.rows[i]);
    return b;
}

// Values copied out, since the tape dies here.
struct Result {
    Tensor logits;
    std::vector<Tensor> head_weights;
    std::array<double, kModules> weights;
};

Result run(const FusionHead& head, const Inputs& in, const Ablation& a = {}) {
    ag::Tape tape;
    const auto out = answer_logits(tape, head, bind(tape, in), tape.constant(in.question), a);
    Result r{out.logits.value(), {}, out.weights()};
    for (const auto& w : out.head_weights) r.head_weights.push_back(w.value());
    return r;
}

// Plain-tensor re-implementation of the head; `shift` is added to every
// attention score before the softmax.
Tensor oracle_logits(const FusionHead& h, const Inputs& in, double shift = 0.0) {
    auto affine = [](const Tensor& x, const Linear& l) {
        Tensor y = oracle_matmul(x, l.w->value);
        for (std::size_t j = 0; j < y.cols(); ++j) y[j] += l.b->value[j];
        return y;
    };
    auto norm = [](const Tensor& x, const LayerNormParams& ln) {
        double mean = 0, var = 0;
        for (double v : x.data()) mean += v;
        mean /= static_cast<double>(x.size());
        for (double v : x.data()) var += (v - mean) * (v - mean);
        var /= static_cast<double>(x.size());
        Tensor y({1, x.size()});
        for (std::size_t j = 0; j < x.size(); ++j)
            y[j] = (x[j] - mean) / std::sqrt(var + 1e-5) * ln.gain->value[j] + ln.bias->value[j];
        return y;
    };
    Tensor m({kModules, h.d});
    for (std::size_t i = 0; i < kModules; ++i) {
        const Tensor r = affine(h.norm[i] ? norm(in.rows[i], *h.norm[i]) : in.rows[i], h.project[i]);
        for (std::size_t j = 0; j < h.d; ++j) m[i * h.d + j] = r[j];
    }
    Tensor attended({1, h.d});
    std::size_t off = 0;
    for (const auto& a : h.heads) {
        const Tensor q = affine(in.question, a.query);
        const Tensor k = oracle_matmul(m, a.wk->value), v = oracle_matmul(m, a.wv->value);
        std::array<double, kModules> s{};
        double mx = -1e300, z = 0;
        for (std::size_t i = 0; i < kModules; ++i) {
            for (std::size_t j = 0; j < a.d_head; ++j) s[i] += q[j] * k[i * a.d_head + j];
            s[i] = s[i] / std::sqrt(static_cast<double>(a.d_head)) + shift;
            mx = std::max(mx, s[i]);
        }
        for (auto& x : s) z += (x = std::exp(x - mx));
        for (std::size_t j = 0; j < a.d_head; ++j)
            for (std::size_t i = 0; i < kModules; ++i) attended[off + j] += s[i] / z * v[i * a.d_head + j];
        off += a.d_head;
    }
    if (h.gate) {
        const Tensor g = affine(in.question, *h.gate);
        for (std::size_t j = 0; j < h.d; ++j) attended[j] *= g[j];
    }
    return affine(attended, h.classifier);
}

std::size_t argmax(const Tensor& t) {
    return static_cast<std::size_t>(std::max_element(t.data().begin(), t.data().end()) - t.data().begin());
}

}  // namespace

TEST_CASE("parse_ablation accepts module lists and rejects unknown names") {
    CHECK(parse_ablation("").empty());
    const auto a = parse_ablation("rhy,SRC");
    CHECK(a.rhythm);
    CHECK(a.source);
    CHECK_FALSE(a.mie);
    CHECK_FALSE(a.roi);
    CHECK(a.removes(Slot::kRhythmAudio));
    CHECK(a.removes(Slot::kSourceVisual));
    CHECK_FALSE(a.removes(Slot::kRoi));
    CHECK(parse_ablation("mie").removes(Slot::kXmodalVisual));
    CHECK(parse_ablation("rois").removes(Slot::kRoi));
    CHECK_THROWS_AS(parse_ablation("rhy,bogus"), std::invalid_argument);
}

TEST_CASE("head layout: RoI slot is projected without normalization") {
    Fixture f(8, 2, true);
    for (std::size_t i = 0; i < kModules; ++i) CHECK(f.head.norm[i].has_value() == (i != 6));
    CHECK(f.head.heads.size() == 2);
    CHECK(f.head.gate.has_value());
    CHECK_THROWS_AS(make_fusion_head(f.ps, Initializer(1), kWidths, kQ, 8, 6, 3, false, 0, "other"),
                    std::invalid_argument);
}

TEST_CASE("logits match a plain-tensor oracle") {
    std::mt19937_64 rng(11);
    for (bool gate : {false, true}) {
        Fixture f(8, 2, gate);
        for (int trial = 0; trial < 5; ++trial) {
            const auto in = random_inputs(rng);
            const Tensor got = run(f.head, in).logits;
            const Tensor want = oracle_logits(f.head, in);
            for (std::size_t j = 0; j < want.size(); ++j) CHECK(got[j] == doctest::Approx(want[j]).epsilon(1e-12));
        }
    }
}

TEST_CASE("identical module rows give uniform attention") {
    Fixture f(8, 4, true);
    // Zero projections with a shared bias make every row the same vector.
    for (std::size_t i = 0; i < kModules; ++i) {
        f.head.project[i].w->value.fill(0.0);
        f.head.project[i].b->value = f.head.project[0].b->value;
    }
    std::mt19937_64 rng(5);
    const auto out = run(f.head, random_inputs(rng));
    for (const auto& w : out.head_weights)
        for (std::size_t i = 0; i < kModules; ++i) CHECK(w[i] == doctest::Approx(1.0 / 7).epsilon(1e-12));
}

TEST_CASE("a dominating module's weight grows toward one") {
    Fixture f(4, 1, false);
    std::mt19937_64 rng(9);
    auto in = random_inputs(rng);
    for (std::size_t i = 0; i < kModules; ++i) {
        f.head.project[i].w->value.fill(0.0);
        f.head.project[i].b->value.fill(0.0);
    }
    // Slot 3's row points along wk q, so its score is positive and scales with s.
    const auto& a = f.head.heads[0];
    const Tensor q = oracle_matmul(in.question, a.query.w->value);
    Tensor dir({1, 4});
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c) dir[r] += a.wk->value[r * 4 + c] * (q[c] + a.query.b->value[c]);
    double prev = 1.0 / 7;
    for (double s : {1.0, 10.0, 100.0}) {
        for (std::size_t j = 0; j < 4; ++j) f.head.project[3].b->value[j] = s * dir[j];
        const double w = run(f.head, in).head_weights[0][3];
        CHECK(w > prev);
        prev = w;
    }
    CHECK(prev > 0.999);
}

TEST_CASE("a fully ablated bank yields the classifier bias") {
    Fixture f(8, 2, true);
    std::mt19937_64 rng(2);
    const auto out = run(f.head, random_inputs(rng), parse_ablation("mie,rhy,src,rois"));
    CHECK(same_bits(out.logits, f.head.classifier.b->value.reshaped({1, 6})));
}

TEST_CASE("a missing module must be ablated") {
    Fixture f(8, 2, false);
    std::mt19937_64 rng(2);
    const auto in = random_inputs(rng);
    ag::Tape tape;
    auto bank = bind(tape, in);
    bank[6].reset();
    CHECK_THROWS_AS(answer_logits(tape, f.head, bank, tape.constant(in.question)), std::invalid_argument);
    CHECK_NOTHROW(answer_logits(tape, f.head, bank, tape.constant(in.question), parse_ablation("rois")));
}

TEST_CASE("empty ablation is bit-identical to no ablation") {
    Fixture f(8, 2, true);
    std::mt19937_64 rng(4);
    const auto in = random_inputs(rng);
    CHECK(same_bits(run(f.head, in).logits, run(f.head, in, parse_ablation("")).logits));
}

TEST_CASE("property: a common score shift leaves the answer unchanged") {
    std::mt19937_64 rng(21);
    Fixture f(8, 2, true);
    for (int trial = 0; trial < 50; ++trial) {
        const auto in = random_inputs(rng);
        const std::size_t want = argmax(run(f.head, in).logits);
        for (double c : {-40.0, 0.5, 700.0}) CHECK(argmax(oracle_logits(f.head, in, c)) == want);
    }
}

TEST_CASE("property: attention rows are probability vectors") {
    std::mt19937_64 rng(8);
    Fixture f(8, 4, true);
    for (int trial = 0; trial < 50; ++trial) {
        const auto out = run(f.head, random_inputs(rng));
        for (const auto& w : out.head_weights) {
            double sum = 0;
            for (std::size_t i = 0; i < kModules; ++i) {
                CHECK(w[i] >= 0.0);
                sum += w[i];
            }
            CHECK(std::abs(sum - 1.0) < 1e-12);
        }
        double mean_sum = 0;
        for (double v : out.weights) mean_sum += v;
        CHECK(std::abs(mean_sum - 1.0) < 1e-12);
    }
}

TEST_CASE("a separate gate input replaces the question in the gate") {
    Fixture f(8, 2, true);
    std::mt19937_64 rng(6);
    const auto in = random_inputs(rng);
    ag::Tape tape;
    const auto q = tape.constant(in.question);
    const Tensor same = answer_logits(tape, f.head, bind(tape, in), q, {}, q).logits.value();
    CHECK(same_bits(same, run(f.head, in).logits));
    const Tensor other =
        answer_logits(tape, f.head, bind(tape, in), q, {}, tape.constant(random_tensor(rng, {1, kQ}))).logits.value();
    CHECK_FALSE(same_bits(same, other));
}

TEST_CASE("importance scores average attention rows") {
    std::array<double, kModules> a{0.1, 0.2, 0.3, 0.1, 0.1, 0.1, 0.1};
    std::array<double, kModules> b{0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5};
    const auto one = importance_scores({a});
    CHECK(one == a);
    const auto two = importance_scores({a, b});
    double sum = 0;
    for (std::size_t i = 0; i < kModules; ++i) {
        CHECK(two[i] == doctest::Approx((a[i] + b[i]) / 2));
        sum += two[i];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(importance_scores({}), std::invalid_argument);
}

TEST_CASE("head gradients match finite differences") {
    Fixture f(4, 2, true);
    std::mt19937_64 rng(13);
    const auto in = random_inputs(rng);
    const double err = mavqa::testing::fd_param_error(f.ps, [&](ag::Tape& tape) {
        return ag::softmax_cross_entropy(answer_logits(tape, f.head, bind(tape, in), tape.constant(in.question)).logits, 2);
    });
    CHECK(err < 1e-4);
}

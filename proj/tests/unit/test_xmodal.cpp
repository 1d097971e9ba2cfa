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
#include <numeric>
#include <random>

#include "mavqa/model/xmodal.hpp"
#include "support/testing.hpp"

using namespace mavqa;
using namespace mavqa::model;
using mavqa::testing::max_abs_diff;
using mavqa::testing::oracle_matmul;
using mavqa::testing::oracle_softmax_rows;
using mavqa::testing::random_tensor;
using mavqa::testing::same_bits;

namespace {

struct AdapterFixture {
    ParamSet ps;
    CrossModalAdapter ad;
    AdapterFixture(std::uint64_t seed, std::size_t d_source, std::size_t d, std::size_t h = 5) {
        ad = make_adapter(ps, Initializer(seed), "ad", d_source, d, h);
    }
};

TokenSequence seq(Modality m, Tensor t) { return TokenSequence{m, std::move(t)}; }

Tensor permute_rows(const Tensor& x, const std::vector<std::size_t>& perm) {
    Tensor y({x.rows(), x.cols()});
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = 0; c < x.cols(); ++c) y.data()[r * x.cols() + c] = x.data()[perm[r] * x.cols() + c];
    return y;
}

Tensor transpose(const Tensor& x) {
    Tensor y({x.cols(), x.rows()});
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = 0; c < x.cols(); ++c) y.data()[c * x.rows() + r] = x.data()[r * x.cols() + c];
    return y;
}

Tensor oracle_attention(const Tensor& q, const Tensor& kv, const CrossModalAdapter& ad) {
    Tensor s = oracle_matmul(oracle_matmul(q, ad.wq->value), transpose(oracle_matmul(kv, ad.wk->value)));
    for (auto& v : s.data()) v /= std::sqrt(static_cast<double>(ad.d));
    return oracle_matmul(oracle_softmax_rows(s), oracle_matmul(kv, ad.wv->value));
}

EncoderConfig micro_config(std::size_t d = 4) {
    EncoderConfig c;
    c.d_visual = c.d_audio = c.d_language = d;
    c.blocks = 6;
    c.inject_every = 3;
    c.adapter_hidden = 4;
    c.visual_features = c.audio_features = 5;
    c.visual_tokens = c.audio_tokens = c.language_tokens = 3;
    c.vocab = 6;
    return c;
}

void zero_adapters(ParamSet& ps) {
    for (auto& p : ps)
        if (p.name.find(".adapter") != std::string::npos) p.value.fill(0.0);
}

}  // namespace

TEST_CASE("single key attention returns its value row") {
    AdapterFixture f(1, 4, 4);
    std::mt19937_64 rng(3);
    const Tensor q = random_tensor(rng, {5, 4}), kv = random_tensor(rng, {1, 4});
    const Tensor out = cross_modal_attention(seq(Modality::kAudio, q), seq(Modality::kVisual, kv), f.ad);
    const Tensor v = oracle_matmul(kv, f.ad.wv->value);
    REQUIRE(out.rows() == 5);
    for (std::size_t r = 0; r < 5; ++r)
        for (std::size_t c = 0; c < 4; ++c) CHECK(out.data()[r * 4 + c] == doctest::Approx(v[c]).epsilon(1e-12));
}

TEST_CASE("zero query and key maps give the mean of the kv rows") {
    AdapterFixture f(2, 3, 3);
    f.ad.wq->value.fill(0.0);
    f.ad.wk->value.fill(0.0);
    f.ad.wv->value = Tensor({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    const Tensor kv({4, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12});
    std::mt19937_64 rng(4);
    const Tensor out = cross_modal_attention(seq(Modality::kVisual, random_tensor(rng, {2, 3})),
                                             seq(Modality::kAudio, kv), f.ad);
    for (std::size_t r = 0; r < 2; ++r) {
        CHECK(out.data()[r * 3 + 0] == doctest::Approx(5.5));
        CHECK(out.data()[r * 3 + 1] == doctest::Approx(6.5));
        CHECK(out.data()[r * 3 + 2] == doctest::Approx(7.5));
    }
}

TEST_CASE("attention matches an independent oracle") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        AdapterFixture f(100 + trial, 6, 6);
        const Tensor q = random_tensor(rng, {3, 6}), kv = random_tensor(rng, {7, 6});
        const Tensor out = cross_modal_attention(seq(Modality::kLanguage, q), seq(Modality::kAudio, kv), f.ad);
        CHECK(max_abs_diff(out, oracle_attention(q, kv, f.ad)) < 1e-12);
    }
}

TEST_CASE("property: score rows sum to one") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t tq = 1 + rng() % 8, tk = 1 + rng() % 12;
        AdapterFixture f(200 + trial, 4, 4);
        const Tensor s = attention_scores(seq(Modality::kVisual, random_tensor(rng, {tq, 4}, -3, 3)),
                                          seq(Modality::kAudio, random_tensor(rng, {tk, 4}, -3, 3)), f.ad);
        REQUIRE(s.rows() == tq);
        REQUIRE(s.cols() == tk);
        for (std::size_t r = 0; r < tq; ++r) {
            double sum = 0;
            for (std::size_t c = 0; c < tk; ++c) {
                CHECK(s.data()[r * tk + c] >= 0.0);
                sum += s.data()[r * tk + c];
            }
            CHECK(std::abs(sum - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("property: permuting kv rows leaves the output unchanged") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t tk = 2 + rng() % 9;
        AdapterFixture f(300 + trial, 5, 5);
        const Tensor q = random_tensor(rng, {4, 5}), kv = random_tensor(rng, {tk, 5});
        std::vector<std::size_t> perm(tk);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        const Tensor a = cross_modal_attention(seq(Modality::kAudio, q), seq(Modality::kVisual, kv), f.ad);
        const Tensor b =
            cross_modal_attention(seq(Modality::kAudio, q), seq(Modality::kVisual, permute_rows(kv, perm)), f.ad);
        CHECK(max_abs_diff(a, b) < 1e-12);
    }
}

TEST_CASE("property: permuting query rows permutes the output rows") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 30; ++trial) {
        AdapterFixture f(400 + trial, 4, 4);
        const Tensor q = random_tensor(rng, {6, 4}), kv = random_tensor(rng, {5, 4});
        std::vector<std::size_t> perm(6);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        const Tensor a = cross_modal_attention(seq(Modality::kAudio, q), seq(Modality::kVisual, kv), f.ad);
        const Tensor b =
            cross_modal_attention(seq(Modality::kAudio, permute_rows(q, perm)), seq(Modality::kVisual, kv), f.ad);
        CHECK(max_abs_diff(permute_rows(a, perm), b) < 1e-12);
    }
}

TEST_CASE("attention rejects mismatched widths") {
    AdapterFixture f(9, 4, 4);
    std::mt19937_64 rng(9);
    CHECK_THROWS_AS(cross_modal_attention(seq(Modality::kAudio, random_tensor(rng, {2, 4})),
                                          seq(Modality::kVisual, random_tensor(rng, {2, 3})), f.ad),
                    DimensionError);
}

TEST_CASE("adapter output matches relu MLP oracle") {
    AdapterFixture f(10, 4, 4, 6);
    std::mt19937_64 rng(10);
    const Tensor a = random_tensor(rng, {3, 4});
    Tensor hidden = oracle_matmul(a, f.ad.w1->value);
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 6; ++c) {
            double& v = hidden.data()[r * 6 + c];
            v = std::max(0.0, v + f.ad.b1->value[c]);
        }
    Tensor want = oracle_matmul(hidden, f.ad.w2->value);
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 4; ++c) want.data()[r * 4 + c] += f.ad.b2->value[c];
    CHECK(max_abs_diff(adapter_forward(a, f.ad), want) < 1e-12);
}

TEST_CASE("fuse is a residual sum") {
    std::mt19937_64 rng(11);
    const Tensor own = random_tensor(rng, {3, 4}), za = random_tensor(rng, {3, 4}), zb = random_tensor(rng, {3, 4});
    const Tensor zero({3, 4});
    CHECK(same_bits(fuse(seq(Modality::kAudio, own), zero, zero).tokens, own));
    const auto f = fuse(seq(Modality::kAudio, own), za, zb);
    CHECK(f.modality == Modality::kAudio);
    for (std::size_t i = 0; i < own.size(); ++i) CHECK(f.tokens[i] == doctest::Approx(own[i] + za[i] + zb[i]));
    CHECK_THROWS(fuse(seq(Modality::kAudio, own), random_tensor(rng, {2, 4}), zb));
}

TEST_CASE("dimension projection") {
    std::mt19937_64 rng(12);
    const Tensor x = random_tensor(rng, {3, 5});
    CHECK(same_bits(dimension_project(x, nullptr), x));
    AdapterFixture f(12, 5, 3);
    REQUIRE(f.ad.project != nullptr);
    CHECK(max_abs_diff(dimension_project(x, f.ad.project), oracle_matmul(x, f.ad.project->value)) < 1e-12);
    AdapterFixture same(13, 3, 3);
    CHECK(same.ad.project == nullptr);
}

TEST_CASE("adapter schedule") {
    EncoderConfig c = micro_config();
    CHECK(c.boundaries() == std::vector<std::size_t>{2, 5});
    c.final_boundary_only = true;
    CHECK(c.boundaries() == std::vector<std::size_t>{5});
    c.final_boundary_only = false;
    c.blocks = 1;
    CHECK(c.boundaries().empty());
}

TEST_CASE("one block without a boundary is the plain block") {
    EncoderConfig c = micro_config();
    c.blocks = 1;
    ParamSet ps;
    const auto stack = make_encoder_stack(ps, Initializer(14), c);
    CHECK(stack.adapters.empty());
    std::mt19937_64 rng(14);
    const Tensor v = random_tensor(rng, {3, 4}), a = random_tensor(rng, {2, 4}), l = random_tensor(rng, {3, 4});
    const auto out = encoder_forward(seq(Modality::kVisual, v), seq(Modality::kAudio, a), seq(Modality::kLanguage, l),
                                     stack);
    ag::Tape tape;
    const Tensor* in[3] = {&v, &a, &l};
    for (std::size_t m = 0; m < 3; ++m) {
        ag::Var x = apply(tape, stack.encoders[m].blocks[0], tape.constant(*in[m]));
        x = apply(tape, stack.out_norm[m], x);
        CHECK(same_bits(out[m].tokens, x.value()));
    }
}

TEST_CASE("ablation identity: zeroed adapters equal independent encoders bit for bit") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        EncoderConfig c = micro_config();
        c.d_visual = 6;  // exercises the projections too
        ParamSet ps;
        const auto stack = make_encoder_stack(ps, Initializer(seed), c);
        zero_adapters(ps);
        std::mt19937_64 rng(1000 + seed);
        const Tensor v = random_tensor(rng, {3, 6}), a = random_tensor(rng, {3, 4}), l = random_tensor(rng, {2, 4});
        const auto inter = encoder_forward(seq(Modality::kVisual, v), seq(Modality::kAudio, a),
                                           seq(Modality::kLanguage, l), stack, true);
        const auto plain = encoder_forward(seq(Modality::kVisual, v), seq(Modality::kAudio, a),
                                           seq(Modality::kLanguage, l), stack, false);
        // oracle: each encoder run alone on its own tape
        const Tensor* in[3] = {&v, &a, &l};
        for (std::size_t m = 0; m < 3; ++m) {
            ag::Tape tape;
            ag::Var x = tape.constant(*in[m]);
            for (const auto& blk : stack.encoders[m].blocks) x = apply(tape, blk, x);
            x = apply(tape, stack.out_norm[m], x);
            CHECK(same_bits(inter[m].tokens, x.value()));
            CHECK(same_bits(plain[m].tokens, x.value()));
        }
    }
}

TEST_CASE("live adapters change every modality") {
    ParamSet ps;
    const auto stack = make_encoder_stack(ps, Initializer(15), micro_config());
    std::mt19937_64 rng(15);
    const Tensor v = random_tensor(rng, {3, 4}), a = random_tensor(rng, {3, 4}), l = random_tensor(rng, {3, 4});
    const auto inter = encoder_forward(seq(Modality::kVisual, v), seq(Modality::kAudio, a),
                                       seq(Modality::kLanguage, l), stack, true);
    const auto plain = encoder_forward(seq(Modality::kVisual, v), seq(Modality::kAudio, a),
                                       seq(Modality::kLanguage, l), stack, false);
    for (std::size_t m = 0; m < 3; ++m) CHECK(max_abs_diff(inter[m].tokens, plain[m].tokens) > 1e-6);
    const auto again = encoder_forward(seq(Modality::kVisual, v), seq(Modality::kAudio, a),
                                       seq(Modality::kLanguage, l), stack, true);
    for (std::size_t m = 0; m < 3; ++m) CHECK(same_bits(again[m].tokens, inter[m].tokens));
}

TEST_CASE("encoder_forward validates its inputs") {
    ParamSet ps;
    const auto stack = make_encoder_stack(ps, Initializer(16), micro_config());
    std::mt19937_64 rng(16);
    const Tensor ok = random_tensor(rng, {3, 4});
    CHECK_THROWS_AS(encoder_forward(seq(Modality::kVisual, Tensor({0, 4})), seq(Modality::kAudio, ok),
                                    seq(Modality::kLanguage, ok), stack),
                    DimensionError);
    CHECK_THROWS_AS(encoder_forward(seq(Modality::kVisual, random_tensor(rng, {3, 5})), seq(Modality::kAudio, ok),
                                    seq(Modality::kLanguage, ok), stack),
                    DimensionError);
    CHECK_THROWS(encoder_forward(seq(Modality::kAudio, ok), seq(Modality::kVisual, ok), seq(Modality::kLanguage, ok),
                                 stack));
}

TEST_CASE("gradients reach adapters only in interactive mode") {
    ParamSet ps;
    auto cfg = micro_config();
    cfg.adapter_hidden = 16;  // at width 4 a whole ReLU layer can be dead for one input
    const auto stack = make_encoder_stack(ps, Initializer(17), cfg);
    EncoderInputs in;
    std::mt19937_64 rng(17);
    in.visual = random_tensor(rng, {3, 5});
    in.audio = random_tensor(rng, {3, 5});
    in.question = {1, 4, 2};
    for (bool interactive : {true, false}) {
        ps.zero_grad();
        ag::Tape tape;
        auto out = encoder_forward(tape, stack, in, interactive);
        ag::Var loss = ag::add(ag::add(ag::mean_rows(out[0]), ag::mean_rows(out[1])), ag::mean_rows(out[2]));
        loss = ag::mse(loss, tape.constant(Tensor({1, 4}, {0.3, -0.2, 0.1, 0.5})));
        tape.backward(loss);
        for (const auto& p : ps) {
            if (p.name.find(".adapter") == std::string::npos) continue;
            double norm = 0;
            for (double g : p.grad.data()) norm += g * g;
            if (interactive && p.name.find("project") == std::string::npos) CHECK_MESSAGE(norm > 0, p.name);
            if (!interactive) CHECK_MESSAGE(norm == 0, p.name);
        }
    }
}

TEST_CASE("micro encoder gradients match finite differences") {
    ParamSet ps;
    const auto stack = make_encoder_stack(ps, Initializer(18), micro_config());
    EncoderInputs in;
    std::mt19937_64 rng(18);
    in.visual = random_tensor(rng, {3, 5});
    in.audio = random_tensor(rng, {3, 5});
    in.question = {0, 3, 5};
    const Tensor target = random_tensor(rng, {3, 4});
    const double err = mavqa::testing::fd_param_error(ps, [&](ag::Tape& tape) {
        auto out = encoder_forward(tape, stack, in, true);
        return ag::mse(ag::add(ag::add(out[0], out[1]), out[2]), tape.constant(target));
    });
    CHECK(err < 1e-4);
}

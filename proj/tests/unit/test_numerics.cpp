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
#include <numeric>
#include <random>

#include "mavqa/numerics/ops.hpp"
#include "mavqa/numerics/optim.hpp"
#include "mavqa/numerics/params.hpp"
#include "support/testing.hpp"

using namespace mavqa;
using mavqa::testing::max_abs_diff;
using mavqa::testing::oracle_matmul;
using mavqa::testing::oracle_softmax_rows;
using mavqa::testing::random_tensor;

TEST_SUITE("tensor") {
    TEST_CASE("construction checks extents") {
        CHECK_THROWS_AS(Tensor({2, 0}), DimensionError);
        CHECK_THROWS_AS(Tensor({2, 2}, {1, 2, 3}), DimensionError);
        Tensor t({2, 3});
        CHECK(t.size() == 6);
        CHECK(t.rows() == 2);
        CHECK(t.cols() == 3);
        CHECK(Tensor::vector({1, 2, 3}).rows() == 1);
    }

    TEST_CASE("reshape keeps data") {
        auto t = Tensor::matrix({{1, 2, 3}, {4, 5, 6}});
        auto r = t.reshaped({3, 2});
        CHECK(r.at(2, 1) == 6);
        CHECK_THROWS_AS(t.reshaped({4}), DimensionError);
    }
}

TEST_SUITE("matmul") {
    TEST_CASE("identity and hand example") {
        auto a = Tensor::matrix({{1, 2}, {3, 4}});
        CHECK(ops::matmul(Tensor::identity(2), a) == a);
        auto c = ops::matmul(a, Tensor::matrix({{0}, {1}}));
        CHECK(c == Tensor::matrix({{2}, {4}}));
    }

    TEST_CASE("random 5x7 by 7x3 against triple loop") {
        std::mt19937_64 rng(5);
        auto a = random_tensor(rng, {5, 7}), b = random_tensor(rng, {7, 3});
        CHECK(max_abs_diff(ops::matmul(a, b), oracle_matmul(a, b)) < 1e-12);
    }

    TEST_CASE("mismatch names both shapes") {
        try {
            ops::matmul(Tensor({2, 3}), Tensor({4, 5}));
            FAIL("expected DimensionError");
        } catch (const DimensionError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("[2x3]") != std::string::npos);
            CHECK(msg.find("[4x5]") != std::string::npos);
        }
    }

    TEST_CASE("matmul_nt equals matmul with explicit transpose") {
        std::mt19937_64 rng(6);
        auto a = random_tensor(rng, {4, 6}), b = random_tensor(rng, {5, 6});
        CHECK(max_abs_diff(ops::matmul_nt(a, b), oracle_matmul(a, ops::transpose(b))) < 1e-12);
    }

    TEST_CASE("associativity on random conforming triples") {
        std::mt19937_64 rng(77);
        std::uniform_int_distribution<std::size_t> dim(1, 9);
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t m = dim(rng), k = dim(rng), l = dim(rng), n = dim(rng);
            auto a = random_tensor(rng, {m, k}), b = random_tensor(rng, {k, l}), c = random_tensor(rng, {l, n});
            auto left = ops::matmul(ops::matmul(a, b), c);
            auto right = ops::matmul(a, ops::matmul(b, c));
            REQUIRE(max_abs_diff(left, right) < 1e-9);
        }
    }
}

TEST_SUITE("softmax") {
    TEST_CASE("uniform, stable, and oracle rows") {
        auto u = ops::softmax_rows(Tensor::matrix({{0, 0, 0}}));
        for (double v : u.data()) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

        auto big = ops::softmax_rows(Tensor::matrix({{1000, 0}}));
        CHECK(big.all_finite());
        CHECK(big[0] == doctest::Approx(1.0));
        CHECK(big[1] < 1e-300);

        auto x = Tensor::matrix({{1, 2, 3}});
        CHECK(max_abs_diff(ops::softmax_rows(x), oracle_softmax_rows(x)) < 1e-12);
    }

    TEST_CASE("rows sum to one and rows permute with the input") {
        std::mt19937_64 rng(11);
        for (int trial = 0; trial < 200; ++trial) {
            const std::size_t m = 1 + trial % 7, n = 1 + (trial * 3) % 11;
            auto x = random_tensor(rng, {m, n}, -20, 20);
            auto y = ops::softmax_rows(x);
            for (std::size_t r = 0; r < m; ++r) {
                double s = 0;
                for (double v : y.row(r)) {
                    REQUIRE(v >= 0.0);
                    s += v;
                }
                REQUIRE(std::abs(s - 1.0) < 1e-12);
            }
            std::vector<std::size_t> perm(m);
            std::iota(perm.begin(), perm.end(), 0);
            std::shuffle(perm.begin(), perm.end(), rng);
            auto py = ops::softmax_rows(ops::gather_rows(x, perm));
            REQUIRE(py == ops::gather_rows(y, perm));
        }
    }
}

TEST_SUITE("linear and loss") {
    TEST_CASE("linear_forward cases") {
        std::mt19937_64 rng(3);
        auto x = random_tensor(rng, {3, 4});
        CHECK(ops::linear_forward(x, Tensor::identity(4), Tensor({4})) == x);

        auto b = Tensor::vector({1, -2, 3});
        auto y0 = ops::linear_forward(Tensor({2, 4}), random_tensor(rng, {4, 3}), b);
        for (std::size_t r = 0; r < 2; ++r)
            for (std::size_t c = 0; c < 3; ++c) CHECK(y0.at(r, c) == b[c]);

        auto w = random_tensor(rng, {4, 3});
        auto ref = oracle_matmul(x, w);
        for (std::size_t r = 0; r < 3; ++r)
            for (std::size_t c = 0; c < 3; ++c) ref.at(r, c) += b[c];
        CHECK(max_abs_diff(ops::linear_forward(x, w, b), ref) < 1e-12);
        CHECK_THROWS_AS(ops::linear_forward(x, w, Tensor::vector({1, 2})), DimensionError);
    }

    TEST_CASE("mse_loss cases") {
        std::mt19937_64 rng(8);
        auto p = random_tensor(rng, {3, 5});
        CHECK(ops::mse_loss(p, p) == 0.0);
        auto q = p;
        for (auto& v : q.data()) v -= 1.0;
        CHECK(ops::mse_loss(p, q) == doctest::Approx(1.0).epsilon(1e-15));

        auto t = random_tensor(rng, {3, 5});
        double s = 0;
        for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - t[i]) * (p[i] - t[i]);
        CHECK(std::abs(ops::mse_loss(p, t) - s / 15.0) < 1e-12);
        CHECK_THROWS_AS(ops::mse_loss(p, Tensor({5, 3})), DimensionError);
    }

    TEST_CASE("avg_pool") {
        auto v = Tensor::matrix({{1, 2, 3}, {1, 2, 3}});
        CHECK(ops::avg_pool(v) == Tensor::vector({1, 2, 3}));
        CHECK(ops::avg_pool(Tensor::matrix({{1, -2}, {-1, 2}})) == Tensor::vector({0, 0}));
        auto x = Tensor::matrix({{1, 2, 3}, {4, 5, 6}, {7, 8, 9}, {10, 11, 12}});
        CHECK(ops::avg_pool(x) == Tensor::vector({5.5, 6.5, 7.5}));
    }
}

TEST_SUITE("learning rate") {
    TEST_CASE("schedule examples") {
        CHECK(lr_at_epoch(1e-4, 0) == 1e-4);
        CHECK(lr_at_epoch(1e-4, 5) == 5e-5);
        CHECK(lr_at_epoch(1e-3, 4) == 1e-3);
        CHECK_THROWS(lr_at_epoch(1e-3, -1));
    }

    TEST_CASE("non-increasing and halves exactly at multiples of five") {
        std::mt19937_64 rng(21);
        std::uniform_real_distribution<double> base(1e-6, 1.0);
        for (int trial = 0; trial < 100; ++trial) {
            const double b = base(rng);
            for (int e = 0; e < 60; ++e) {
                const double now = lr_at_epoch(b, e), next = lr_at_epoch(b, e + 1);
                REQUIRE(next <= now);
                if ((e + 1) % 5 == 0)
                    REQUIRE(next == now * 0.5);
                else
                    REQUIRE(next == now);
            }
        }
    }
}

TEST_SUITE("adam") {
    TEST_CASE("zero gradient is a fixed point") {
        ParamSet ps;
        auto& p = ps.add("w", Tensor::vector({1.5, -2.0}));
        OptimState opt;
        opt.base_lr = 1e-2;
        adam_step(ps, opt);
        CHECK(p.value == Tensor::vector({1.5, -2.0}));
        CHECK(opt.step == 1);
    }

    TEST_CASE("first step moves by about lr") {
        ParamSet ps;
        auto& p = ps.add("w", Tensor::scalar(0.3));
        p.grad[0] = 1.0;
        OptimState opt;
        opt.base_lr = 1e-3;
        adam_step(ps, opt);
        CHECK(0.3 - p.value[0] == doctest::Approx(1e-3).epsilon(1e-6));
    }

    TEST_CASE("three steps on a quadratic match the recurrence") {
        ParamSet ps;
        auto& p = ps.add("w", Tensor::scalar(2.0));
        OptimState opt;
        opt.base_lr = 0.1;

        double theta = 2.0, m = 0, v = 0;
        for (int t = 1; t <= 3; ++t) {
            p.grad[0] = 2.0 * p.value[0];  // d/dw of w^2
            adam_step(ps, opt);

            const double g = 2.0 * theta;
            m = 0.9 * m + 0.1 * g;
            v = 0.999 * v + 0.001 * g * g;
            const double mh = m / (1 - std::pow(0.9, t)), vh = v / (1 - std::pow(0.999, t));
            theta -= 0.1 * mh / (std::sqrt(vh) + 1e-8);
            CHECK(std::abs(p.value[0] - theta) < 1e-10);
        }
        CHECK(opt.step == 3);
    }

    TEST_CASE("non-finite gradient names the parameter and leaves values alone") {
        ParamSet ps;
        auto& a = ps.add("ok", Tensor::scalar(1.0));
        auto& b = ps.add("broken.weight", Tensor::scalar(1.0));
        a.grad[0] = 1.0;
        b.grad[0] = std::nan("");
        OptimState opt;
        try {
            adam_step(ps, opt);
            FAIL("expected NumericError");
        } catch (const NumericError& e) {
            CHECK(std::string(e.what()).find("broken.weight") != std::string::npos);
        }
        CHECK(a.value[0] == 1.0);
        CHECK(opt.step == 0);
    }

    TEST_CASE("frozen parameters are skipped") {
        ParamSet ps;
        auto& a = ps.add("enc.w", Tensor::scalar(1.0));
        auto& b = ps.add("head.w", Tensor::scalar(1.0));
        CHECK(ps.freeze_prefix("enc.") == 1);
        a.grad[0] = b.grad[0] = 1.0;
        OptimState opt;
        opt.base_lr = 0.1;
        for (int i = 0; i < 5; ++i) adam_step(ps, opt);
        CHECK(a.value[0] == 1.0);
        CHECK(b.value[0] < 1.0);
    }
}

TEST_SUITE("params") {
    TEST_CASE("initialiser is order independent and bounded") {
        Initializer init(42);
        auto w1 = init.uniform_fan_in("layer.w", {8, 4}, 8);
        auto other = init.uniform_fan_in("other", {3, 3}, 3);
        auto w2 = init.uniform_fan_in("layer.w", {8, 4}, 8);
        CHECK(w1 == w2);
        for (double v : w1.data()) CHECK(std::abs(v) <= 1.0 / std::sqrt(8.0));
        CHECK_FALSE(Initializer(43).uniform_fan_in("layer.w", {8, 4}, 8) == w1);
    }

    TEST_CASE("duplicate names are rejected and grads match shapes") {
        ParamSet ps;
        ps.add("a", Tensor({2, 3}));
        CHECK_THROWS(ps.add("a", Tensor({1})));
        CHECK(ps.get("a").grad.shape() == Shape{2, 3});
        CHECK(ps.scalar_count() == 6);
    }
}

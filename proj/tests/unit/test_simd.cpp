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

// Every vector kernel table must agree with the scalar reference. Sizes cover
// full registers, partial tails, and the degenerate n = 0 / 1 cases.

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mavqa/simd/kernels.hpp"

using namespace mavqa::simd;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(a) + std::abs(b)); }

std::vector<const KernelTable*> vector_tables() {
    std::vector<const KernelTable*> out;
    for (Isa isa : {Isa::kAvx2, Isa::kNeon})
        if (const auto* t = kernels_for(isa)) out.push_back(t);
    return out;
}

}  // namespace

TEST_CASE("dispatcher picks a usable table") {
    const auto& k = kernels();
    MESSAGE("active kernels: " << isa_name(k.isa));
    double a[3] = {1, 2, 3}, b[3] = {4, 5, 6};
    CHECK(k.dot(a, b, 3) == doctest::Approx(32.0));
    CHECK(kernels_for(Isa::kScalar) != nullptr);
}

TEST_CASE("vector kernels match scalar reference") {
    const auto& ref = *kernels_for(Isa::kScalar);
    const auto tables = vector_tables();
    if (tables.empty()) MESSAGE("no vector ISA on this host; equivalence checks skipped");
    std::mt19937_64 rng(1234);

    for (const auto* vt : tables) {
        CAPTURE(isa_name(vt->isa));
        for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 9u, 16u, 31u, 100u, 1027u}) {
            CAPTURE(n);
            auto x = random_vec(rng, n), y = random_vec(rng, n);
            CHECK(rel_diff(ref.dot(x.data(), y.data(), n), vt->dot(x.data(), y.data(), n)) < 1e-13);
            CHECK(rel_diff(ref.sum_squares(x.data(), n), vt->sum_squares(x.data(), n)) < 1e-13);

            auto y1 = y, y2 = y;
            ref.axpy(0.37, x.data(), y1.data(), n);
            vt->axpy(0.37, x.data(), y2.data(), n);
            for (std::size_t i = 0; i < n; ++i) CHECK(rel_diff(y1[i], y2[i]) < 1e-14);

            std::vector<double> p1(n), p2(n);
            ref.power(x.data(), y.data(), p1.data(), n);
            vt->power(x.data(), y.data(), p2.data(), n);
            for (std::size_t i = 0; i < n; ++i) CHECK(rel_diff(p1[i], p2[i]) < 1e-14);
        }
    }
}

TEST_CASE("vector gemm variants match scalar reference") {
    const auto& ref = *kernels_for(Isa::kScalar);
    std::mt19937_64 rng(99);
    for (const auto* vt : vector_tables()) {
        CAPTURE(isa_name(vt->isa));
        for (int trial = 0; trial < 60; ++trial) {
            std::uniform_int_distribution<std::size_t> dim(1, 19);
            const std::size_t m = dim(rng), n = dim(rng), k = dim(rng);
            const bool acc = trial % 2 == 1;
            CAPTURE(m);
            CAPTURE(n);
            CAPTURE(k);

            auto a = random_vec(rng, m * k), b = random_vec(rng, k * n), c0 = random_vec(rng, m * n);
            auto c1 = c0, c2 = c0;
            ref.gemm_nn(m, n, k, a.data(), k, b.data(), n, c1.data(), n, acc);
            vt->gemm_nn(m, n, k, a.data(), k, b.data(), n, c2.data(), n, acc);
            for (std::size_t i = 0; i < m * n; ++i) REQUIRE(rel_diff(c1[i], c2[i]) < 1e-13);

            auto bt = random_vec(rng, n * k);
            c1 = c0;
            c2 = c0;
            ref.gemm_nt(m, n, k, a.data(), k, bt.data(), k, c1.data(), n, acc);
            vt->gemm_nt(m, n, k, a.data(), k, bt.data(), k, c2.data(), n, acc);
            for (std::size_t i = 0; i < m * n; ++i) REQUIRE(rel_diff(c1[i], c2[i]) < 1e-13);

            auto at = random_vec(rng, k * m);
            c1 = c0;
            c2 = c0;
            ref.gemm_tn(m, n, k, at.data(), m, b.data(), n, c1.data(), n, acc);
            vt->gemm_tn(m, n, k, at.data(), m, b.data(), n, c2.data(), n, acc);
            for (std::size_t i = 0; i < m * n; ++i) REQUIRE(rel_diff(c1[i], c2[i]) < 1e-13);
        }
    }
}

TEST_CASE("gemm honours leading dimensions larger than the logical width") {
    // 2x2 block inside a 2x3 buffer
    const auto& ref = *kernels_for(Isa::kScalar);
    double a[6] = {1, 2, 99, 3, 4, 99};
    double b[4] = {5, 6, 7, 8};
    double c[4] = {};
    ref.gemm_nn(2, 2, 2, a, 3, b, 2, c, 2, false);
    CHECK(c[0] == 19);
    CHECK(c[1] == 22);
    CHECK(c[2] == 43);
    CHECK(c[3] == 50);
    for (const auto* vt : vector_tables()) {
        double d[4] = {};
        vt->gemm_nn(2, 2, 2, a, 3, b, 2, d, 2, false);
        for (int i = 0; i < 4; ++i) CHECK(d[i] == c[i]);
    }
}

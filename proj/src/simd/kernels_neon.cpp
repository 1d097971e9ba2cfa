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

// AArch64 NEON kernels, 2 doubles per register. Only the hot paths are
// vectorized; the rest fall through to the reference table.

#include "mavqa/simd/kernels.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)

#include <arm_neon.h>

namespace mavqa::simd::detail {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    double s = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

double sum_squares_neon(const double* x, std::size_t n) { return dot_neon(x, x, n); }

void gemm_nn_neon(std::size_t m, std::size_t n, std::size_t k,
                  const double* a, std::size_t lda,
                  const double* b, std::size_t ldb,
                  double* c, std::size_t ldc, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * ldc;
        if (!accumulate)
            for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
        for (std::size_t p = 0; p < k; ++p) axpy_neon(a[i * lda + p], b + p * ldb, crow, n);
    }
}

void gemm_nt_neon(std::size_t m, std::size_t n, std::size_t k,
                  const double* a, std::size_t lda,
                  const double* b, std::size_t ldb,
                  double* c, std::size_t ldc, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double s = dot_neon(a + i * lda, b + j * ldb, k);
            c[i * ldc + j] = accumulate ? c[i * ldc + j] + s : s;
        }
}

void gemm_tn_neon(std::size_t m, std::size_t n, std::size_t k,
                  const double* a, std::size_t lda,
                  const double* b, std::size_t ldb,
                  double* c, std::size_t ldc, bool accumulate) {
    if (!accumulate)
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) c[i * ldc + j] = 0.0;
    for (std::size_t p = 0; p < k; ++p)
        for (std::size_t i = 0; i < m; ++i) axpy_neon(a[p * lda + i], b + p * ldb, c + i * ldc, n);
}

KernelTable make_table() {
    KernelTable t = scalar_table();
    t.isa = Isa::kNeon;
    t.dot = &dot_neon;
    t.axpy = &axpy_neon;
    t.sum_squares = &sum_squares_neon;
    t.gemm_nn = &gemm_nn_neon;
    t.gemm_nt = &gemm_nt_neon;
    t.gemm_tn = &gemm_tn_neon;
    return t;
}

const KernelTable kNeonTable = make_table();

}  // namespace

const KernelTable* neon_table() { return &kNeonTable; }

}  // namespace mavqa::simd::detail

#else

namespace mavqa::simd::detail {
const KernelTable* neon_table() { return nullptr; }
}  // namespace mavqa::simd::detail

#endif

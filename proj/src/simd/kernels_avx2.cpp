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

// AVX2+FMA kernels, 4 doubles per register. This translation unit is the
// only one built with -mavx2 -mfma; nothing here may be called unless the
// dispatcher has checked the CPU.

#include "mavqa/simd/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

namespace mavqa::simd::detail {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

double sum_squares_avx2(const double* x, std::size_t n) {
    return dot_avx2(x, x, n);
}

void power_avx2(const double* re, const double* im, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d r = _mm256_loadu_pd(re + i);
        const __m256d m = _mm256_loadu_pd(im + i);
        _mm256_storeu_pd(out + i, _mm256_fmadd_pd(r, r, _mm256_mul_pd(m, m)));
    }
    for (; i < n; ++i) out[i] = re[i] * re[i] + im[i] * im[i];
}

// One output row: crow[0:n] += sum_p a[p] * B[p, 0:n]
inline void row_update(std::size_t n, std::size_t k, const double* arow, std::size_t astride,
                       const double* b, std::size_t ldb, double* crow) {
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
        __m256d c0 = _mm256_loadu_pd(crow + j);
        __m256d c1 = _mm256_loadu_pd(crow + j + 4);
        for (std::size_t p = 0; p < k; ++p) {
            const __m256d av = _mm256_set1_pd(arow[p * astride]);
            const double* brow = b + p * ldb + j;
            c0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow), c0);
            c1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + 4), c1);
        }
        _mm256_storeu_pd(crow + j, c0);
        _mm256_storeu_pd(crow + j + 4, c1);
    }
    for (; j + 4 <= n; j += 4) {
        __m256d c0 = _mm256_loadu_pd(crow + j);
        for (std::size_t p = 0; p < k; ++p)
            c0 = _mm256_fmadd_pd(_mm256_set1_pd(arow[p * astride]), _mm256_loadu_pd(b + p * ldb + j), c0);
        _mm256_storeu_pd(crow + j, c0);
    }
    for (; j < n; ++j) {
        double s = crow[j];
        for (std::size_t p = 0; p < k; ++p) s += arow[p * astride] * b[p * ldb + j];
        crow[j] = s;
    }
}

void gemm_nn_avx2(std::size_t m, std::size_t n, std::size_t k,
                  const double* a, std::size_t lda,
                  const double* b, std::size_t ldb,
                  double* c, std::size_t ldc, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * ldc;
        if (!accumulate)
            for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
        row_update(n, k, a + i * lda, 1, b, ldb, crow);
    }
}

void gemm_nt_avx2(std::size_t m, std::size_t n, std::size_t k,
                  const double* a, std::size_t lda,
                  const double* b, std::size_t ldb,
                  double* c, std::size_t ldc, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double s = dot_avx2(a + i * lda, b + j * ldb, k);
            c[i * ldc + j] = accumulate ? c[i * ldc + j] + s : s;
        }
    }
}

void gemm_tn_avx2(std::size_t m, std::size_t n, std::size_t k,
                  const double* a, std::size_t lda,
                  const double* b, std::size_t ldb,
                  double* c, std::size_t ldc, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * ldc;
        if (!accumulate)
            for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
        // column i of A, walked with stride lda
        row_update(n, k, a + i, lda, b, ldb, crow);
    }
}

const KernelTable kAvx2Table{
    Isa::kAvx2,   &dot_avx2,     &axpy_avx2,    &sum_squares_avx2,
    &power_avx2,  &gemm_nn_avx2, &gemm_nt_avx2, &gemm_tn_avx2,
};

}  // namespace

const KernelTable* avx2_table() { return &kAvx2Table; }

}  // namespace mavqa::simd::detail

#else

namespace mavqa::simd::detail {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace mavqa::simd::detail

#endif

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

#pragma once

#include <cstddef>
#include <string_view>

// Dense float64 inner loops. Every kernel has a scalar reference version and
// optional vector versions; one table is picked at first use from the CPU
// feature bits (override with MAVQA_SIMD=scalar|avx2|neon).
//
// All matrices are row-major with an explicit leading dimension.

namespace mavqa::simd {

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view isa_name(Isa isa);

struct KernelTable {
    Isa isa;

    double (*dot)(const double* a, const double* b, std::size_t n);
    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // sum of x[i]^2
    double (*sum_squares)(const double* x, std::size_t n);
    // out[i] = re[i]^2 + im[i]^2
    void (*power)(const double* re, const double* im, double* out, std::size_t n);

    // C[m x n] (+)= A[m x k] * B[k x n]
    void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k,
                    const double* a, std::size_t lda,
                    const double* b, std::size_t ldb,
                    double* c, std::size_t ldc, bool accumulate);
    // C[m x n] (+)= A[m x k] * B[n x k]^T
    void (*gemm_nt)(std::size_t m, std::size_t n, std::size_t k,
                    const double* a, std::size_t lda,
                    const double* b, std::size_t ldb,
                    double* c, std::size_t ldc, bool accumulate);
    // C[m x n] (+)= A[k x m]^T * B[k x n]
    void (*gemm_tn)(std::size_t m, std::size_t n, std::size_t k,
                    const double* a, std::size_t lda,
                    const double* b, std::size_t ldb,
                    double* c, std::size_t ldc, bool accumulate);
};

/// The table selected for this process.
const KernelTable& kernels();

/// A specific table, or nullptr if it was not compiled in or the CPU lacks it.
const KernelTable* kernels_for(Isa isa);

namespace detail {
const KernelTable& scalar_table();
const KernelTable* avx2_table();
const KernelTable* neon_table();
}  // namespace detail

}  // namespace mavqa::simd

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

#include <cstdlib>
#include <string>

#include "mavqa/simd/kernels.hpp"

namespace mavqa::simd {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable& select() {
    if (const char* forced = std::getenv("MAVQA_SIMD")) {
        const std::string want(forced);
        if (want == "scalar") return detail::scalar_table();
        if (want == "avx2")
            if (const auto* t = kernels_for(Isa::kAvx2)) return *t;
        if (want == "neon")
            if (const auto* t = kernels_for(Isa::kNeon)) return *t;
    }
    if (const auto* t = kernels_for(Isa::kAvx2)) return *t;
    if (const auto* t = kernels_for(Isa::kNeon)) return *t;
    return detail::scalar_table();
}

}  // namespace

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::kScalar: return "scalar";
        case Isa::kAvx2: return "avx2";
        case Isa::kNeon: return "neon";
    }
    return "unknown";
}

const KernelTable* kernels_for(Isa isa) {
    switch (isa) {
        case Isa::kScalar: return &detail::scalar_table();
        case Isa::kAvx2: return cpu_has_avx2() ? detail::avx2_table() : nullptr;
        case Isa::kNeon: return detail::neon_table();
    }
    return nullptr;
}

const KernelTable& kernels() {
    static const KernelTable& table = select();
    return table;
}

}  // namespace mavqa::simd

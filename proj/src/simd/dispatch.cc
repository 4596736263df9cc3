// Copyright 2026 The vadfuse Authors.
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
#include <string_view>

#include "vadfuse/simd/kernels.h"

namespace vadfuse::simd {

#if defined(__x86_64__) || defined(_M_X64)
const KernelTable &avx2_kernel_table();
#define VADFUSE_HAVE_AVX2 1
#endif
#if defined(__aarch64__)
const KernelTable &neon_kernel_table();
#define VADFUSE_HAVE_NEON 1
#endif

const KernelTable *avx2_kernels() {
#ifdef VADFUSE_HAVE_AVX2
  static const bool supported =
      __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &avx2_kernel_table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable *neon_kernels() {
#ifdef VADFUSE_HAVE_NEON
  // Advanced SIMD is mandatory on AArch64.
  return &neon_kernel_table();
#else
  return nullptr;
#endif
}

namespace {

const KernelTable &Select() {
  const char *env = std::getenv("VADFUSE_SIMD");
  std::string_view wanted = env != nullptr ? env : "";
  if (wanted == "scalar") return scalar_kernels();
  if (wanted == "avx2" && avx2_kernels() != nullptr) return *avx2_kernels();
  if (wanted == "neon" && neon_kernels() != nullptr) return *neon_kernels();
  if (const KernelTable *t = avx2_kernels()) return *t;
  if (const KernelTable *t = neon_kernels()) return *t;
  return scalar_kernels();
}

}  // namespace

const KernelTable &kernels() {
  static const KernelTable &selected = Select();
  return selected;
}

}  // namespace vadfuse::simd

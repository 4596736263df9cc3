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

// Data-parallel inner loops shared by the feature extractors and the MLP.
//
// Every kernel has a scalar reference implementation and, where the target
// supports it, an AVX2/FMA or NEON variant. kernels() picks one at first use
// based on what the running CPU reports; the choice can be pinned with the
// VADFUSE_SIMD environment variable ("scalar", "avx2", "neon").

#ifndef VADFUSE_SIMD_KERNELS_H_
#define VADFUSE_SIMD_KERNELS_H_

#include <cstddef>
#include <span>
#include <string_view>

namespace vadfuse::simd {

struct KernelTable {
  std::string_view name;
  // sum_i a[i] * b[i]
  double (*dot)(const double *a, const double *b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double *x, double *y, std::size_t n);
  // sum_i |a[i] - b[i]|
  double (*sum_abs_diff)(const double *a, const double *b, std::size_t n);
};

const KernelTable &scalar_kernels();
// nullptr when the variant was not compiled in or the CPU lacks support.
const KernelTable *avx2_kernels();
const KernelTable *neon_kernels();

// The table selected for this process.
const KernelTable &kernels();

inline double dot(std::span<const double> a, std::span<const double> b) {
  return kernels().dot(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  kernels().axpy(alpha, x.data(), y.data(), x.size() < y.size() ? x.size() : y.size());
}

inline double sum_abs_diff(std::span<const double> a, std::span<const double> b) {
  return kernels().sum_abs_diff(a.data(), b.data(),
                                a.size() < b.size() ? a.size() : b.size());
}

}  // namespace vadfuse::simd

#endif  // VADFUSE_SIMD_KERNELS_H_

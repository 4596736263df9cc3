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

#include "vadfuse/fft.h"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace vadfuse {
namespace {

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

// The FFTW planner is not reentrant; only plan creation is serialized.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto &[n, p] : plans_) {
      fftw_destroy_plan(p.forward);
      fftw_destroy_plan(p.inverse);
    }
  }

  const PlanPair &Get(std::size_t nfft) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = plans_.find(nfft);
    if (it != plans_.end()) return it->second;
    const int n = static_cast<int>(nfft);
    double *real = fftw_alloc_real(nfft);
    fftw_complex *cplx = fftw_alloc_complex(nfft / 2 + 1);
    PlanPair p;
    p.forward = fftw_plan_dft_r2c_1d(n, real, cplx, FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.inverse = fftw_plan_dft_c2r_1d(n, cplx, real,
                                     FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_DESTROY_INPUT);
    fftw_free(real);
    fftw_free(cplx);
    if (p.forward == nullptr || p.inverse == nullptr)
      throw std::runtime_error("fftw planning failed");
    return plans_.emplace(nfft, p).first->second;
  }

 private:
  std::mutex mutex_;
  std::map<std::size_t, PlanPair> plans_;
};

PlanCache &Cache() {
  static PlanCache cache;
  return cache;
}

}  // namespace

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::vector<std::complex<double>> rfft(std::span<const double> input, std::size_t nfft) {
  const PlanPair &plan = Cache().Get(nfft);
  std::vector<double> buf(nfft, 0.0);
  const std::size_t n = input.size() < nfft ? input.size() : nfft;
  for (std::size_t i = 0; i < n; ++i) buf[i] = input[i];
  std::vector<std::complex<double>> out(nfft / 2 + 1);
  fftw_execute_dft_r2c(plan.forward, buf.data(),
                       reinterpret_cast<fftw_complex *>(out.data()));
  return out;
}

std::vector<double> irfft(std::span<const std::complex<double>> half, std::size_t nfft) {
  if (half.size() != nfft / 2 + 1) throw std::invalid_argument("irfft: bin count");
  const PlanPair &plan = Cache().Get(nfft);
  std::vector<std::complex<double>> in(half.begin(), half.end());
  std::vector<double> out(nfft);
  fftw_execute_dft_c2r(plan.inverse, reinterpret_cast<fftw_complex *>(in.data()),
                       out.data());
  const double scale = 1.0 / static_cast<double>(nfft);
  for (double &v : out) v *= scale;
  return out;
}

}  // namespace vadfuse

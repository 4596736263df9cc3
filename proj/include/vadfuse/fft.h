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

// Real-input DFTs backed by FFTW. Plans are created once per size and shared;
// execution is thread-safe.

#ifndef VADFUSE_FFT_H_
#define VADFUSE_FFT_H_

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace vadfuse {

// DFT of `input` zero-padded (or truncated) to nfft samples. Returns bins
// 0..nfft/2.
std::vector<std::complex<double>> rfft(std::span<const double> input, std::size_t nfft);

// Inverse of a Hermitian half spectrum (nfft/2 + 1 bins) to nfft real samples,
// normalized by 1/nfft so that irfft(rfft(x)) == x.
std::vector<double> irfft(std::span<const std::complex<double>> half, std::size_t nfft);

bool is_power_of_two(std::size_t n);

}  // namespace vadfuse

#endif  // VADFUSE_FFT_H_

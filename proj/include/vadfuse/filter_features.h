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

// Spectral-envelope parameterizations: MFCC, PLP and the chirp group delay of
// the zero-phase signal. Each yields 13 coefficients per frame.
//
// The *Computer classes precompute filterbanks and transforms for a fixed
// spectrum size; the free functions build one on the fly.

#ifndef VADFUSE_FILTER_FEATURES_H_
#define VADFUSE_FILTER_FEATURES_H_

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "vadfuse/dsp.h"

namespace vadfuse {

inline constexpr std::size_t kFilterCoeffs = 13;

enum class FilterKind { kMfcc, kPlp, kCgd };

struct FilterFeatureVector {
  FilterKind kind = FilterKind::kMfcc;
  std::array<double, kFilterCoeffs> coeffs{};
};

struct MfccOptions {
  int n_mels = 26;
  double f_min_hz = 0.0;
  double f_max_hz = 0.0;  // 0 means Nyquist
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular mel filters on the power spectrum, log, orthonormal DCT-II; c0
// is kept.
class MfccComputer {
 public:
  MfccComputer(int sample_rate_hz, std::size_t nfft, const MfccOptions &opts = {});
  FilterFeatureVector operator()(const Spectrum &spec) const;

  // Filter weights, n_mels x (nfft/2 + 1).
  const std::vector<double> &weights() const { return weights_; }

 private:
  std::size_t n_bins_;
  int n_mels_;
  std::vector<double> weights_;
  Dct2 dct_;
};

FilterFeatureVector mfcc(const Spectrum &spec, int sample_rate_hz = 16000,
                         const MfccOptions &opts = {});

struct PlpOptions {
  int model_order = 12;
};

double hz_to_bark(double hz);
double bark_to_hz(double bark);

// Bark-scale critical band integration, equal-loudness weighting, cube-root
// compression, all-pole modelling, and the LP-to-cepstrum recursion.
class PlpComputer {
 public:
  PlpComputer(int sample_rate_hz, std::size_t nfft, const PlpOptions &opts = {});
  FilterFeatureVector operator()(const Spectrum &spec) const;

  // Compressed auditory spectrum (one value per critical band).
  std::vector<double> auditory_spectrum(const Spectrum &spec) const;
  // All-pole modelling and cepstral recursion on an auditory spectrum.
  FilterFeatureVector from_auditory(std::span<const double> bands) const;

  std::size_t n_bands() const { return n_bands_; }

 private:
  std::size_t n_bins_;
  std::size_t n_bands_;
  int order_;
  std::vector<double> weights_;   // n_bands x n_bins
  std::vector<double> loudness_;  // equal-loudness weight per band
};

FilterFeatureVector plp(const Spectrum &spec, int sample_rate_hz = 16000,
                        const PlpOptions &opts = {});

// Cepstral coefficients c0..c_{n-1} of gain / A(z). c0 = log(error power).
std::vector<double> lp_to_cepstrum(const LpModel &model, double error_power,
                                   std::size_t n_coeffs);

struct CgdOptions {
  double rho = 1.12;
  std::size_t nfft = kDefaultNfft;
};

// Zero-phase signal z = IDFT(|DFT(frame)|), evaluated on the circle of radius
// rho (DFT of z[n] rho^-n), group delay by phase differences across adjacent
// bins, then DCT-II to 13 coefficients.
class CgdComputer {
 public:
  explicit CgdComputer(const CgdOptions &opts = {});
  FilterFeatureVector operator()(std::span<const double> windowed_frame) const;

  // Group delay in samples for bins 0..nfft/2 - 1.
  std::vector<double> group_delay(std::span<const double> windowed_frame) const;

 private:
  std::size_t nfft_;
  std::vector<double> chirp_;  // rho^-n
  Dct2 dct_;
};

FilterFeatureVector cgd(std::span<const double> windowed_frame, const CgdOptions &opts = {});

}  // namespace vadfuse

#endif  // VADFUSE_FILTER_FEATURES_H_

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

// Excitation-related per-frame scalars: log-energy, zero-crossing rate, LP
// residual moments, AMDF harmonicity/clarity, normalized LP error, harmonic
// product spectrum, cepstral peak prominence, and the summation of residual
// harmonics with and without residual energy normalization.

#ifndef VADFUSE_SOURCE_FEATURES_H_
#define VADFUSE_SOURCE_FEATURES_H_

#include <array>
#include <cstddef>
#include <span>
#include <string_view>

#include "vadfuse/dsp.h"

namespace vadfuse {

struct PitchSearchRange {
  double f0_min_hz = 50.0;
  double f0_max_hz = 400.0;
};

inline constexpr std::size_t kSourceFeatureCount = 11;

struct SourceFeatureVector {
  double log_energy = 0.0;
  double zcr = 0.0;
  double skewness = 0.0;
  double kurtosis = 3.0;
  double harmonicity = 0.0;
  double clarity = 0.0;
  double lp_error = 1.0;
  double hps = 0.0;
  double cpp = 0.0;
  double srh = 0.0;
  double srh_star = 0.0;

  std::array<double, kSourceFeatureCount> to_array() const {
    return {log_energy, zcr, skewness, kurtosis, harmonicity, clarity,
            lp_error,   hps, cpp,      srh,      srh_star};
  }
};

// Column names in to_array() order.
const std::array<std::string_view, kSourceFeatureCount> &source_feature_names();

// log(sum x^2 + kLogFloor)
double log_energy(std::span<const double> frame);

// Sign changes between consecutive samples / (L - 1); zero counts as positive.
double zcr(std::span<const double> frame);

struct ResidualMoments {
  double skewness = 0.0;
  double kurtosis = 3.0;  // non-excess
};

// Central moments over the frame. Throws Error(kDegenerateFrame) for zero
// variance; callers substitute ResidualMoments{} (0, 3).
ResidualMoments residual_moments(std::span<const double> residual);

struct AmdfFeatures {
  double harmonicity = 0.0;
  double clarity = 0.0;
};

// d(tau) = mean |x[n] - x[n+tau]| over lags fs/f0_max..fs/f0_min;
// clarity = 1 - d_min/d_max, harmonicity = 20 log10(d_max / (d_min + eps)).
AmdfFeatures amdf_features(std::span<const double> frame, int sample_rate_hz,
                           const PitchSearchRange &range = {});

inline double lp_error(const LpModel &model) { return model.gain_err; }

inline constexpr int kHpsHarmonics = 5;

// H(f) = sum_k log(|S(k f)| + eps) over the pitch range; returns max H - mean H.
double hps(const Spectrum &spec, const PitchSearchRange &range = {}, int harmonics = kHpsHarmonics);

struct CppOptions {
  std::size_t nfft = kDefaultNfft;
  double regression_start_s = 0.001;
};

// Cepstral peak over 1/f0_max..1/f0_min (dB) minus a least-squares line fitted
// to the cepstrum over [1 ms, 1/f0_min], evaluated at the peak quefrency.
double cpp(std::span<const double> windowed_frame, int sample_rate_hz,
           const PitchSearchRange &range = {}, const CppOptions &opts = {});

inline constexpr int kSrhHarmonics = 5;
inline constexpr std::size_t kDefaultSrhNfft = 4096;

struct SrhFeatures {
  double srh = 0.0;       // on the unit-energy residual spectrum
  double srh_star = 0.0;  // on the raw residual spectrum
  double f0_hat = 0.0;
};

// SRH(f) = E(f) + sum_{k=2..N} [E(k f) - E((k - 1/2) f)] over spectrum bins in
// the pitch range.
SrhFeatures srh_features(std::span<const double> windowed_residual, int sample_rate_hz,
                         const PitchSearchRange &range = {}, int harmonics = kSrhHarmonics,
                         std::size_t nfft = kDefaultSrhNfft);
SrhFeatures srh_from_spectrum(const Spectrum &residual_spectrum,
                              const PitchSearchRange &range = {},
                              int harmonics = kSrhHarmonics);

struct SourceFeatureOptions {
  int lp_order = kDefaultLpOrder;
  std::size_t nfft = kDefaultNfft;
  std::size_t srh_nfft = kDefaultSrhNfft;
  int hps_harmonics = kHpsHarmonics;
  int srh_harmonics = kSrhHarmonics;
  PitchSearchRange range;
};

// Computes all eleven features for consecutive frames. Keeps the last stable
// LP model so unstable frames can reuse it.
class SourceFeatureExtractor {
 public:
  SourceFeatureExtractor(int sample_rate_hz, const SourceFeatureOptions &opts = {});

  // `frame` is the raw frame, `windowed` its Hamming-windowed copy and
  // `spectrum` the magnitude spectrum of `windowed`.
  SourceFeatureVector operator()(std::span<const double> frame, std::span<const double> windowed,
                                 const Spectrum &spectrum);

  const LpModel &last_model() const { return previous_; }

 private:
  int sample_rate_hz_;
  SourceFeatureOptions opts_;
  LpModel previous_;
};

}  // namespace vadfuse

#endif  // VADFUSE_SOURCE_FEATURES_H_

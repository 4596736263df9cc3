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

#include "vadfuse/source_features.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "vadfuse/common.h"
#include "vadfuse/simd/kernels.h"

namespace vadfuse {
namespace {

// Pitch range expressed in spectrum bins.
std::pair<std::size_t, std::size_t> BinRange(const PitchSearchRange &range, double bin_hz) {
  auto lo = static_cast<std::size_t>(std::ceil(range.f0_min_hz / bin_hz));
  auto hi = static_cast<std::size_t>(std::floor(range.f0_max_hz / bin_hz));
  return {std::max<std::size_t>(lo, 1), hi};
}

}  // namespace

const std::array<std::string_view, kSourceFeatureCount> &source_feature_names() {
  static const std::array<std::string_view, kSourceFeatureCount> names = {
      "log_energy", "zcr", "skewness", "kurtosis", "harmonicity", "clarity",
      "lp_error",   "hps", "cpp",      "srh",      "srh_star"};
  return names;
}

double log_energy(std::span<const double> frame) {
  return std::log(simd::dot(frame, frame) + kLogFloor);
}

double zcr(std::span<const double> frame) {
  if (frame.size() < 2) return 0.0;
  std::size_t changes = 0;
  for (std::size_t n = 1; n < frame.size(); ++n)
    changes += (frame[n] >= 0.0) != (frame[n - 1] >= 0.0);
  return static_cast<double>(changes) / static_cast<double>(frame.size() - 1);
}

ResidualMoments residual_moments(std::span<const double> residual) {
  const double n = static_cast<double>(residual.size());
  if (residual.empty())
    throw Error(ErrorKind::kData, ErrorCode::kDegenerateFrame, "residual_moments: empty frame");
  double mean = 0.0;
  for (double x : residual) mean += x;
  mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : residual) {
    const double d = x - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (!(m2 > 0.0))
    throw Error(ErrorKind::kData, ErrorCode::kDegenerateFrame,
                "residual_moments: degenerate frame (zero variance)");
  return {m3 / std::pow(m2, 1.5), m4 / (m2 * m2)};
}

AmdfFeatures amdf_features(std::span<const double> frame, int sample_rate_hz,
                           const PitchSearchRange &range) {
  const auto lag_min = static_cast<std::size_t>(std::llround(sample_rate_hz / range.f0_max_hz));
  auto lag_max = static_cast<std::size_t>(std::llround(sample_rate_hz / range.f0_min_hz));
  const std::size_t n = frame.size();
  if (n < 2) return {};
  lag_max = std::min(lag_max, n - 1);
  if (lag_min > lag_max) return {};
  double d_min = 0.0, d_max = 0.0;
  bool first = true;
  for (std::size_t tau = lag_min; tau <= lag_max; ++tau) {
    const double d = simd::sum_abs_diff(frame.subspan(0, n - tau), frame.subspan(tau)) /
                     static_cast<double>(n - tau);
    if (first) {
      d_min = d_max = d;
      first = false;
    } else {
      d_min = std::min(d_min, d);
      d_max = std::max(d_max, d);
    }
  }
  if (!(d_max > 0.0)) return {};
  return {20.0 * std::log10(d_max / (d_min + kLogFloor)), 1.0 - d_min / d_max};
}

double hps(const Spectrum &spec, const PitchSearchRange &range, int harmonics) {
  const auto [lo, hi] = BinRange(range, spec.bin_hz);
  const std::size_t n_bins = spec.magnitudes.size();
  if (lo > hi) return 0.0;
  std::vector<double> h;
  h.reserve(hi - lo + 1);
  for (std::size_t b = lo; b <= hi; ++b) {
    double v = 0.0;
    for (int k = 1; k <= harmonics; ++k) {
      const std::size_t bin = b * static_cast<std::size_t>(k);
      v += std::log((bin < n_bins ? spec.magnitudes[bin] : 0.0) + kLogFloor);
    }
    h.push_back(v);
  }
  // mean(max - H) rather than max - mean(H): equal terms cancel exactly.
  const double best = *std::max_element(h.begin(), h.end());
  double gap = 0.0;
  for (double v : h) gap += best - v;
  return gap / static_cast<double>(h.size());
}

double cpp(std::span<const double> windowed_frame, int sample_rate_hz,
           const PitchSearchRange &range, const CppOptions &opts) {
  std::vector<double> c = real_cepstrum(windowed_frame, opts.nfft);
  const double to_db = 20.0 / std::numbers::ln10;
  for (double &v : c) v *= to_db;

  const double fs = sample_rate_hz;
  const std::size_t half = opts.nfft / 2;
  const auto q_peak_lo = static_cast<std::size_t>(std::llround(fs / range.f0_max_hz));
  const auto q_hi = std::min(half, static_cast<std::size_t>(std::llround(fs / range.f0_min_hz)));
  const auto q_reg_lo =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(opts.regression_start_s * fs)));
  if (q_peak_lo > q_hi || q_reg_lo >= q_hi) return 0.0;

  std::size_t q_peak = q_peak_lo;
  for (std::size_t q = q_peak_lo; q <= q_hi; ++q)
    if (c[q] > c[q_peak]) q_peak = q;

  // Least-squares line over [q_reg_lo, q_hi].
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(q_hi - q_reg_lo + 1);
  for (std::size_t q = q_reg_lo; q <= q_hi; ++q) {
    const double x = static_cast<double>(q);
    sx += x;
    sy += c[q];
    sxx += x * x;
    sxy += x * c[q];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / n;
  return c[q_peak] - (intercept + slope * static_cast<double>(q_peak));
}

SrhFeatures srh_from_spectrum(const Spectrum &residual_spectrum, const PitchSearchRange &range,
                              int harmonics) {
  const auto &e = residual_spectrum.magnitudes;
  const auto [lo, hi] = BinRange(range, residual_spectrum.bin_hz);
  SrhFeatures out;
  out.f0_hat = range.f0_min_hz;
  const double energy = std::sqrt(simd::dot(e, e));
  if (!(energy > 0.0) || lo > hi) return out;

  auto at = [&](double bin) {
    const auto b = static_cast<std::size_t>(std::llround(bin));
    return b < e.size() ? e[b] : 0.0;
  };
  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_bin = lo;
  for (std::size_t b = lo; b <= hi; ++b) {
    const double f = static_cast<double>(b);
    double s = at(f);
    for (int k = 2; k <= harmonics; ++k) s += at(k * f) - at((k - 0.5) * f);
    if (s > best) {
      best = s;
      best_bin = b;
    }
  }
  // The criterion is linear in E, so normalizing the maximum is the same as
  // maximizing over the normalized spectrum.
  out.srh_star = best;
  out.srh = best / energy;
  out.f0_hat = static_cast<double>(best_bin) * residual_spectrum.bin_hz;
  return out;
}

SrhFeatures srh_features(std::span<const double> windowed_residual, int sample_rate_hz,
                         const PitchSearchRange &range, int harmonics, std::size_t nfft) {
  return srh_from_spectrum(magnitude_spectrum(windowed_residual, sample_rate_hz, nfft), range,
                           harmonics);
}

SourceFeatureExtractor::SourceFeatureExtractor(int sample_rate_hz,
                                               const SourceFeatureOptions &opts)
    : sample_rate_hz_(sample_rate_hz), opts_(opts), previous_(white_lp_model(opts.lp_order)) {}

SourceFeatureVector SourceFeatureExtractor::operator()(std::span<const double> frame,
                                                       std::span<const double> windowed,
                                                       const Spectrum &spectrum) {
  SourceFeatureVector v;
  v.log_energy = log_energy(frame);
  v.zcr = zcr(frame);

  LpModel model = previous_;
  try {
    model = levinson(autocorr(windowed, static_cast<std::size_t>(opts_.lp_order)), opts_.lp_order);
    previous_ = model;
  } catch (const Error &e) {
    // Silent frames carry no spectral shape; fall back to no prediction.
    if (e.code() == ErrorCode::kDegenerateFrame) model = white_lp_model(opts_.lp_order);
  }
  v.lp_error = lp_error(model);

  const std::vector<double> residual = inverse_filter(frame, model);
  try {
    const ResidualMoments m = residual_moments(residual);
    v.skewness = m.skewness;
    v.kurtosis = m.kurtosis;
  } catch (const Error &) {
    v.skewness = 0.0;
    v.kurtosis = 3.0;
  }

  const AmdfFeatures amdf = amdf_features(frame, sample_rate_hz_, opts_.range);
  v.harmonicity = amdf.harmonicity;
  v.clarity = amdf.clarity;
  v.hps = hps(spectrum, opts_.range, opts_.hps_harmonics);
  v.cpp = cpp(windowed, sample_rate_hz_, opts_.range, {opts_.nfft});

  const SrhFeatures srh = srh_features(window(residual), sample_rate_hz_, opts_.range,
                                       opts_.srh_harmonics, opts_.srh_nfft);
  v.srh = srh.srh;
  v.srh_star = srh.srh_star;
  return v;
}

}  // namespace vadfuse

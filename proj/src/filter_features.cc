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

#include "vadfuse/filter_features.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "vadfuse/common.h"
#include "vadfuse/fft.h"
#include "vadfuse/simd/kernels.h"

namespace vadfuse {
namespace {

FilterFeatureVector ToVector(FilterKind kind, std::span<const double> c) {
  FilterFeatureVector v;
  v.kind = kind;
  std::copy_n(c.begin(), kFilterCoeffs, v.coeffs.begin());
  return v;
}

void RequireBins(const Spectrum &spec, std::size_t n_bins, const char *who) {
  if (spec.magnitudes.size() != n_bins)
    throw Error(ErrorKind::kData, ErrorCode::kDimensionMismatch,
                std::string(who) + ": spectrum size does not match the configured nfft");
}

}  // namespace

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MfccComputer::MfccComputer(int sample_rate_hz, std::size_t nfft, const MfccOptions &opts)
    : n_bins_(nfft / 2 + 1),
      n_mels_(opts.n_mels),
      weights_(static_cast<std::size_t>(opts.n_mels) * (nfft / 2 + 1), 0.0),
      dct_(static_cast<std::size_t>(opts.n_mels), kFilterCoeffs) {
  const double f_max = opts.f_max_hz > 0.0 ? opts.f_max_hz : sample_rate_hz / 2.0;
  const double mel_lo = hz_to_mel(opts.f_min_hz);
  const double mel_hi = hz_to_mel(f_max);
  std::vector<double> edges(static_cast<std::size_t>(n_mels_) + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                      static_cast<double>(n_mels_ + 1));
  const double bin_hz = static_cast<double>(sample_rate_hz) / static_cast<double>(nfft);
  for (int m = 0; m < n_mels_; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    double *row = weights_.data() + static_cast<std::size_t>(m) * n_bins_;
    for (std::size_t k = 0; k < n_bins_; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      if (f > lo && f <= mid)
        row[k] = (f - lo) / (mid - lo);
      else if (f > mid && f < hi)
        row[k] = (hi - f) / (hi - mid);
    }
  }
}

FilterFeatureVector MfccComputer::operator()(const Spectrum &spec) const {
  RequireBins(spec, n_bins_, "mfcc");
  std::vector<double> power(n_bins_);
  for (std::size_t k = 0; k < n_bins_; ++k) power[k] = spec.magnitudes[k] * spec.magnitudes[k];
  std::vector<double> log_mel(static_cast<std::size_t>(n_mels_));
  for (int m = 0; m < n_mels_; ++m) {
    const double e = simd::dot({weights_.data() + static_cast<std::size_t>(m) * n_bins_, n_bins_},
                               power);
    log_mel[m] = std::log(e + kLogFloor);
  }
  return ToVector(FilterKind::kMfcc, dct_(log_mel));
}

FilterFeatureVector mfcc(const Spectrum &spec, int sample_rate_hz, const MfccOptions &opts) {
  return MfccComputer(sample_rate_hz, spec.nfft, opts)(spec);
}

double hz_to_bark(double hz) { return 6.0 * std::asinh(hz / 600.0); }
double bark_to_hz(double bark) { return 600.0 * std::sinh(bark / 6.0); }

PlpComputer::PlpComputer(int sample_rate_hz, std::size_t nfft, const PlpOptions &opts)
    : n_bins_(nfft / 2 + 1), order_(opts.model_order) {
  const double nyq_bark = hz_to_bark(sample_rate_hz / 2.0);
  n_bands_ = static_cast<std::size_t>(std::ceil(nyq_bark)) + 1;
  const double step = nyq_bark / static_cast<double>(n_bands_ - 1);
  const double bin_hz = static_cast<double>(sample_rate_hz) / static_cast<double>(nfft);

  // Trapezoidal critical-band masking curve: flat over +-0.5 Bark, rising
  // 25 dB/Bark below and falling 10 dB/Bark above.
  weights_.assign(n_bands_ * n_bins_, 0.0);
  for (std::size_t b = 0; b < n_bands_; ++b) {
    const double mid = static_cast<double>(b) * step;
    for (std::size_t k = 0; k < n_bins_; ++k) {
      const double z = hz_to_bark(static_cast<double>(k) * bin_hz);
      const double lof = z - mid - 0.5;
      const double hif = z - mid + 0.5;
      weights_[b * n_bins_ + k] = std::pow(10.0, std::min(0.0, std::min(hif, -2.5 * lof)));
    }
  }

  loudness_.resize(n_bands_);
  for (std::size_t b = 0; b < n_bands_; ++b) {
    const double f = bark_to_hz(static_cast<double>(b) * step);
    const double fsq = f * f;
    const double ftmp = fsq + 1.6e5;
    loudness_[b] = (fsq / ftmp) * (fsq / ftmp) * ((fsq + 1.44e6) / (fsq + 9.61e6));
  }
}

std::vector<double> PlpComputer::auditory_spectrum(const Spectrum &spec) const {
  RequireBins(spec, n_bins_, "plp");
  std::vector<double> power(n_bins_);
  for (std::size_t k = 0; k < n_bins_; ++k) power[k] = spec.magnitudes[k] * spec.magnitudes[k];
  std::vector<double> bands(n_bands_);
  for (std::size_t b = 0; b < n_bands_; ++b) {
    const double e = simd::dot({weights_.data() + b * n_bins_, n_bins_}, power);
    bands[b] = std::cbrt(loudness_[b] * std::max(e, kLogFloor));
  }
  // Edge bands are unreliable (zero loudness at DC); copy their neighbours.
  if (n_bands_ >= 3) {
    bands.front() = bands[1];
    bands.back() = bands[n_bands_ - 2];
  }
  return bands;
}

FilterFeatureVector PlpComputer::from_auditory(std::span<const double> bands) const {
  // Autocorrelation = inverse DFT of the even extension of the band powers.
  const std::size_t nb = bands.size();
  const std::size_t m = 2 * (nb - 1);
  std::vector<double> ext(m);
  for (std::size_t i = 0; i < nb; ++i) ext[i] = bands[i];
  for (std::size_t i = nb; i < m; ++i) ext[i] = bands[m - i];
  std::vector<double> r(static_cast<std::size_t>(order_) + 1);
  for (std::size_t k = 0; k < r.size(); ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      acc += ext[i] * std::cos(2.0 * std::numbers::pi * static_cast<double>(k * i % m) /
                               static_cast<double>(m));
    r[k] = acc / static_cast<double>(m);
  }

  LpModel model = white_lp_model(order_);
  try {
    model = levinson(r, order_);
  } catch (const Error &) {
    // Positive band powers give a positive-definite sequence; only rounding
    // can land here.
  }
  const double err_power = std::max(model.gain_err * r[0], kLogFloor);
  return ToVector(FilterKind::kPlp, lp_to_cepstrum(model, err_power, kFilterCoeffs));
}

FilterFeatureVector PlpComputer::operator()(const Spectrum &spec) const {
  return from_auditory(auditory_spectrum(spec));
}

FilterFeatureVector plp(const Spectrum &spec, int sample_rate_hz, const PlpOptions &opts) {
  return PlpComputer(sample_rate_hz, spec.nfft, opts)(spec);
}

std::vector<double> lp_to_cepstrum(const LpModel &model, double error_power,
                                   std::size_t n_coeffs) {
  std::vector<double> c(n_coeffs, 0.0);
  if (n_coeffs == 0) return c;
  c[0] = std::log(error_power);
  const std::size_t p = model.coeffs.size();
  for (std::size_t n = 1; n < n_coeffs; ++n) {
    double acc = n <= p ? -model.coeffs[n - 1] : 0.0;
    for (std::size_t k = 1; k < n; ++k) {
      if (n - k > p) continue;
      acc -= static_cast<double>(k) / static_cast<double>(n) * c[k] * model.coeffs[n - k - 1];
    }
    c[n] = acc;
  }
  return c;
}

CgdComputer::CgdComputer(const CgdOptions &opts)
    : nfft_(opts.nfft), chirp_(opts.nfft), dct_(opts.nfft / 2, kFilterCoeffs) {
  if (!is_power_of_two(nfft_)) throw Error(ErrorKind::kUsage, "cgd: nfft must be a power of two");
  if (!(opts.rho > 0.0)) throw Error(ErrorKind::kUsage, "cgd: rho must be positive");
  for (std::size_t n = 0; n < nfft_; ++n)
    chirp_[n] = std::pow(opts.rho, -static_cast<double>(n));
}

std::vector<double> CgdComputer::group_delay(std::span<const double> windowed_frame) const {
  if (windowed_frame.size() > nfft_)
    throw Error(ErrorKind::kUsage, "cgd: frame longer than nfft");
  auto spectrum = rfft(windowed_frame, nfft_);
  for (auto &b : spectrum) b = std::abs(b);
  std::vector<double> zero_phase = irfft(spectrum, nfft_);
  for (std::size_t n = 0; n < nfft_; ++n) zero_phase[n] *= chirp_[n];
  auto chirped = rfft(zero_phase, nfft_);
  for (auto &b : chirped)
    if (std::abs(b) < kLogFloor) b = kLogFloor;

  const double dw = 2.0 * std::numbers::pi / static_cast<double>(nfft_);
  std::vector<double> gd(nfft_ / 2);
  for (std::size_t k = 0; k < gd.size(); ++k)
    gd[k] = -std::arg(chirped[k + 1] * std::conj(chirped[k])) / dw;
  return gd;
}

FilterFeatureVector CgdComputer::operator()(std::span<const double> windowed_frame) const {
  return ToVector(FilterKind::kCgd, dct_(group_delay(windowed_frame)));
}

FilterFeatureVector cgd(std::span<const double> windowed_frame, const CgdOptions &opts) {
  return CgdComputer(opts)(windowed_frame);
}

}  // namespace vadfuse

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

#include "vadfuse/dsp.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "vadfuse/common.h"
#include "vadfuse/fft.h"
#include "vadfuse/simd/kernels.h"

namespace vadfuse {

std::size_t samples_for(double seconds, int sample_rate_hz) {
  return static_cast<std::size_t>(std::llround(seconds * sample_rate_hz));
}

FrameSequence frame_signal(const Signal &signal, double frame_len_s, double hop_s,
                           FrameAlignment alignment) {
  if (frame_len_s <= 0.0 || hop_s <= 0.0)
    throw Error(ErrorKind::kUsage, "frame_signal: frame length and hop must be positive");
  const std::size_t n = signal.samples.size();
  if (n == 0)
    throw Error(ErrorKind::kData, ErrorCode::kDegenerateInput,
                "frame_signal: signal too short (no samples)");
  const std::size_t len = samples_for(frame_len_s, signal.sample_rate_hz);
  if (len < 2) throw Error(ErrorKind::kUsage, "frame_signal: frame shorter than 2 samples");
  const double hop = hop_s * signal.sample_rate_hz;

  FrameSequence out;
  out.frame_len = len;
  out.frame_len_s = frame_len_s;
  out.hop_s = hop_s;
  out.sample_rate_hz = signal.sample_rate_hz;

  std::ptrdiff_t origin = 0;
  if (alignment == FrameAlignment::kCentered) {
    out.n_frames = static_cast<std::size_t>(std::floor((n - 1) / hop)) + 1;
    origin = -static_cast<std::ptrdiff_t>(len / 2);
  } else if (n < len) {
    out.n_frames = 1;
  } else {
    out.n_frames = static_cast<std::size_t>(std::floor((n - len) / hop)) + 1;
  }

  out.data.assign(out.n_frames * len, 0.0);
  for (std::size_t t = 0; t < out.n_frames; ++t) {
    const std::ptrdiff_t start =
        origin + static_cast<std::ptrdiff_t>(std::llround(static_cast<double>(t) * hop));
    double *dst = out.data.data() + t * len;
    for (std::size_t i = 0; i < len; ++i) {
      const std::ptrdiff_t s = start + static_cast<std::ptrdiff_t>(i);
      if (s >= 0 && s < static_cast<std::ptrdiff_t>(n)) dst[i] = signal.samples[s];
    }
  }
  return out;
}

std::vector<double> window_coefficients(std::size_t length, WindowKind kind) {
  std::vector<double> w(length, 1.0);
  if (kind == WindowKind::kRectangular || length < 2) return w;
  const double denom = static_cast<double>(length - 1);
  for (std::size_t n = 0; n < length; ++n)
    w[n] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / denom);
  return w;
}

std::vector<double> window(std::span<const double> frame, WindowKind kind) {
  std::vector<double> w = window_coefficients(frame.size(), kind);
  for (std::size_t n = 0; n < frame.size(); ++n) w[n] *= frame[n];
  return w;
}

Spectrum magnitude_spectrum(std::span<const double> frame, int sample_rate_hz,
                            std::size_t nfft) {
  if (!is_power_of_two(nfft))
    throw Error(ErrorKind::kUsage, "magnitude_spectrum: nfft must be a power of two");
  if (nfft < frame.size())
    throw Error(ErrorKind::kUsage, "magnitude_spectrum: nfft " + std::to_string(nfft) +
                                       " smaller than frame length " +
                                       std::to_string(frame.size()));
  const auto bins = rfft(frame, nfft);
  Spectrum spec;
  spec.nfft = nfft;
  spec.bin_hz = static_cast<double>(sample_rate_hz) / static_cast<double>(nfft);
  spec.magnitudes.resize(bins.size());
  for (std::size_t k = 0; k < bins.size(); ++k) spec.magnitudes[k] = std::abs(bins[k]);
  return spec;
}

std::vector<double> autocorr(std::span<const double> frame, std::size_t max_lag) {
  std::vector<double> r(max_lag + 1, 0.0);
  const std::size_t n = frame.size();
  for (std::size_t k = 0; k <= max_lag && k < n; ++k)
    r[k] = simd::dot(frame.subspan(0, n - k), frame.subspan(k));
  return r;
}

LpModel white_lp_model(int order) {
  LpModel m;
  m.order = order;
  m.coeffs.assign(static_cast<std::size_t>(order), 0.0);
  m.gain_err = 1.0;
  return m;
}

LpModel levinson(std::span<const double> r, int order) {
  if (order < 1 || r.size() < static_cast<std::size_t>(order) + 1)
    throw Error(ErrorKind::kUsage, "levinson: need order + 1 autocorrelation lags");
  if (!(r[0] > 0.0))
    throw Error(ErrorKind::kData, ErrorCode::kDegenerateFrame,
                "levinson: degenerate frame (r[0] <= 0)");

  std::vector<double> a(static_cast<std::size_t>(order) + 1, 0.0);
  std::vector<double> prev(a.size(), 0.0);
  a[0] = 1.0;
  double err = r[0];
  for (int i = 1; i <= order; ++i) {
    double acc = r[i];
    for (int j = 1; j < i; ++j) acc += a[j] * r[i - j];
    const double k = -acc / err;
    if (!(std::fabs(k) < 1.0))
      throw Error(ErrorKind::kNumeric, ErrorCode::kUnstableFrame,
                  "levinson: unstable frame (|k| >= 1 at order " + std::to_string(i) + ")");
    prev = a;
    for (int j = 1; j < i; ++j) a[j] = prev[j] + k * prev[i - j];
    a[i] = k;
    err *= 1.0 - k * k;
  }

  LpModel m;
  m.order = order;
  m.coeffs.assign(a.begin() + 1, a.end());
  m.gain_err = err / r[0];
  return m;
}

std::vector<double> inverse_filter(std::span<const double> frame, const LpModel &model) {
  const std::size_t p = model.coeffs.size();
  std::vector<double> e(frame.size());
  for (std::size_t n = 0; n < frame.size(); ++n) {
    double acc = frame[n];
    const std::size_t kmax = std::min(p, n);
    for (std::size_t k = 1; k <= kmax; ++k) acc += model.coeffs[k - 1] * frame[n - k];
    e[n] = acc;
  }
  return e;
}

FrameSequence lp_residual(const FrameSequence &frames, std::span<const LpModel> models) {
  if (models.size() != frames.n_frames)
    throw Error(ErrorKind::kData, ErrorCode::kLengthMismatch,
                "lp_residual: one model per frame required");
  FrameSequence out = frames;
  for (std::size_t t = 0; t < frames.n_frames; ++t) {
    const auto e = inverse_filter(frames.frame(t), models[t]);
    std::copy(e.begin(), e.end(), out.frame(t).begin());
  }
  return out;
}

std::vector<double> real_cepstrum(std::span<const double> frame, std::size_t nfft) {
  auto bins = rfft(frame, nfft);
  for (auto &b : bins) b = std::log(std::abs(b) + kLogFloor);
  return irfft(bins, nfft);
}

std::vector<double> running_median(std::span<const double> x, int width) {
  if (width < 1 || width % 2 == 0)
    throw Error(ErrorKind::kUsage, "running_median: width must be odd and positive");
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
  const std::ptrdiff_t half = width / 2;
  std::vector<double> out(x.size());
  std::vector<double> buf(static_cast<std::size_t>(width));
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    for (std::ptrdiff_t i = -half; i <= half; ++i)
      buf[i + half] = x[std::clamp<std::ptrdiff_t>(t + i, 0, n - 1)];
    std::nth_element(buf.begin(), buf.begin() + half, buf.end());
    out[t] = buf[half];
  }
  return out;
}

Dct2::Dct2(std::size_t n_in, std::size_t n_out)
    : n_in_(n_in), n_out_(n_out), basis_(n_in * n_out) {
  const double m = static_cast<double>(n_in);
  for (std::size_t k = 0; k < n_out; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / m);
    for (std::size_t i = 0; i < n_in; ++i)
      basis_[k * n_in + i] =
          scale * std::cos(std::numbers::pi * static_cast<double>(k) *
                           (static_cast<double>(i) + 0.5) / m);
  }
}

std::vector<double> Dct2::operator()(std::span<const double> x) const {
  if (x.size() != n_in_)
    throw Error(ErrorKind::kData, ErrorCode::kDimensionMismatch, "dct2: input length");
  std::vector<double> out(n_out_);
  for (std::size_t k = 0; k < n_out_; ++k)
    out[k] = simd::dot({basis_.data() + k * n_in_, n_in_}, x);
  return out;
}

std::vector<double> dct2(std::span<const double> x, std::size_t n_out) {
  if (x.empty()) return std::vector<double>(n_out, 0.0);
  return Dct2(x.size(), n_out)(x);
}

}  // namespace vadfuse

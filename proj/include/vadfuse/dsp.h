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

// Shared DSP primitives: framing, windowing, spectra, autocorrelation,
// Levinson-Durbin linear prediction, inverse filtering and the real cepstrum.

#ifndef VADFUSE_DSP_H_
#define VADFUSE_DSP_H_

#include <cstddef>
#include <span>
#include <vector>

#include "vadfuse/audio.h"

namespace vadfuse {

inline constexpr double kDefaultFrameSeconds = 0.032;
inline constexpr double kDefaultHopSeconds = 0.010;
inline constexpr std::size_t kDefaultNfft = 1024;
inline constexpr int kDefaultLpOrder = 18;

enum class FrameAlignment {
  // Frame t covers samples [round(t*hop*fs), +frame_len). Only complete frames
  // are produced, except that a signal shorter than one frame yields a single
  // zero-padded frame.
  kStart,
  // Frame t is centred on sample round(t*hop*fs); the signal is zero-extended
  // by half a frame on both sides. One frame per hop whose centre lies inside
  // the signal (ceil(n / hop) frames), so frame t lines up with label t.
  kCentered,
};

struct FrameSequence {
  std::vector<double> data;  // n_frames x frame_len, row-major
  std::size_t n_frames = 0;
  std::size_t frame_len = 0;
  double frame_len_s = kDefaultFrameSeconds;
  double hop_s = kDefaultHopSeconds;
  int sample_rate_hz = 16000;

  std::span<const double> frame(std::size_t t) const {
    return {data.data() + t * frame_len, frame_len};
  }
  std::span<double> frame(std::size_t t) {
    return {data.data() + t * frame_len, frame_len};
  }
};

std::size_t samples_for(double seconds, int sample_rate_hz);

FrameSequence frame_signal(const Signal &signal, double frame_len_s = kDefaultFrameSeconds,
                           double hop_s = kDefaultHopSeconds,
                           FrameAlignment alignment = FrameAlignment::kStart);

enum class WindowKind { kHamming, kRectangular };

// 0.54 - 0.46 cos(2 pi n / (L - 1)).
std::vector<double> window_coefficients(std::size_t length, WindowKind kind);
std::vector<double> window(std::span<const double> frame,
                           WindowKind kind = WindowKind::kHamming);

struct Spectrum {
  std::vector<double> magnitudes;  // bins 0..nfft/2
  double bin_hz = 0.0;
  std::size_t nfft = 0;
};

// |DFT| of the frame as given (window it first), zero-padded to nfft.
Spectrum magnitude_spectrum(std::span<const double> frame, int sample_rate_hz,
                            std::size_t nfft = kDefaultNfft);

// Biased estimator r[k] = sum_n x[n] x[n+k], k = 0..max_lag.
std::vector<double> autocorr(std::span<const double> frame, std::size_t max_lag);

// Prediction polynomial A(z) = 1 + sum_k a_k z^-k, i.e. the predictor is
// x^[n] = -sum_k a_k x[n-k].
struct LpModel {
  int order = 0;
  std::vector<double> coeffs;  // a_1..a_p
  double gain_err = 1.0;       // final prediction error energy / r[0]
};

// Order-0 model: no prediction, unit error ratio.
LpModel white_lp_model(int order);

// Throws Error(kDegenerateFrame) when r[0] <= 0 and Error(kUnstableFrame) when
// a reflection coefficient reaches magnitude 1.
LpModel levinson(std::span<const double> r, int order = kDefaultLpOrder);

// e[n] = x[n] + sum_k a_k x[n-k], zero history before the frame.
std::vector<double> inverse_filter(std::span<const double> frame, const LpModel &model);
FrameSequence lp_residual(const FrameSequence &frames, std::span<const LpModel> models);

// Inverse DFT of log(|DFT(frame)| + kLogFloor). nfft values, real part.
std::vector<double> real_cepstrum(std::span<const double> frame,
                                  std::size_t nfft = kDefaultNfft);

// Running median with edge replication. width must be odd.
std::vector<double> running_median(std::span<const double> x, int width);

// Orthonormal DCT-II, first n_out coefficients.
class Dct2 {
 public:
  Dct2(std::size_t n_in, std::size_t n_out);
  std::vector<double> operator()(std::span<const double> x) const;
  std::size_t n_in() const { return n_in_; }

 private:
  std::size_t n_in_;
  std::size_t n_out_;
  std::vector<double> basis_;  // n_out x n_in, scaled rows
};

std::vector<double> dct2(std::span<const double> x, std::size_t n_out);

}  // namespace vadfuse

#endif  // VADFUSE_DSP_H_

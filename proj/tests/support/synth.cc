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

#include "support/synth.h"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace synth {
namespace {

constexpr double kPi = std::numbers::pi;

// Two-pole resonator with unit DC-normalized peak behaviour left as is.
struct Resonator {
  double a1 = 0.0, a2 = 0.0, y1 = 0.0, y2 = 0.0;
  void set(double freq_hz, double bw_hz, int fs) {
    const double r = std::exp(-kPi * bw_hz / fs);
    a1 = 2.0 * r * std::cos(2.0 * kPi * freq_hz / fs);
    a2 = -r * r;
  }
  double step(double x) {
    const double y = x + a1 * y1 + a2 * y2;
    y2 = y1;
    y1 = y;
    return y;
  }
};

double rms_of(const std::vector<double> &x, std::size_t b, std::size_t e) {
  double acc = 0.0;
  for (std::size_t i = b; i < e; ++i) acc += x[i] * x[i];
  return e > b ? std::sqrt(acc / static_cast<double>(e - b)) : 0.0;
}

// One utterance of concatenated phones written into out[begin, end).
void render_utterance(std::vector<double> &out, std::size_t begin, std::size_t end, int fs,
                      double level, std::mt19937_64 &rng) {
  Resonator f1, f2, f3;
  double f0 = uniform(rng, 90.0, 240.0);
  const double f0_drift = uniform(rng, -0.3, 0.3);  // relative change across the utterance
  double phase = 0.0;
  double glottal = 0.0;
  std::size_t t = begin;
  while (t < end) {
    const double phone_s = uniform(rng, 0.06, 0.22);
    const std::size_t len = std::min(end - t, static_cast<std::size_t>(phone_s * fs));
    const bool voiced = uniform(rng) < 0.8;
    std::vector<double> seg(len, 0.0);
    if (voiced) {
      f1.set(uniform(rng, 300.0, 850.0), uniform(rng, 60.0, 120.0), fs);
      f2.set(uniform(rng, 900.0, 2300.0), uniform(rng, 80.0, 160.0), fs);
      f3.set(uniform(rng, 2400.0, 3200.0), uniform(rng, 120.0, 220.0), fs);
      for (std::size_t i = 0; i < len; ++i) {
        const double progress = static_cast<double>(t + i - begin) / static_cast<double>(end - begin);
        const double f = f0 * (1.0 + f0_drift * progress) * (1.0 + 0.01 * gaussian(rng));
        phase += f / fs;
        double pulse = 0.0;
        if (phase >= 1.0) {
          phase -= 1.0;
          pulse = 1.0;
        }
        // Leaky integration smooths pulses into a glottal-like waveform.
        glottal = 0.9 * glottal + pulse + 0.01 * gaussian(rng);
        seg[i] = f3.step(f2.step(f1.step(glottal)));
      }
    } else {
      f1.set(uniform(rng, 3500.0, 6500.0), uniform(rng, 800.0, 2000.0), fs);
      for (std::size_t i = 0; i < len; ++i) seg[i] = f1.step(gaussian(rng));
    }
    const double r = rms_of(seg, 0, len);
    const double gain = r > 0.0 ? level * (voiced ? 1.0 : 0.3) * std::pow(10.0, uniform(rng, -6.0, 6.0) / 20.0) / r : 0.0;
    // 8 ms raised-cosine ramps at phone edges.
    const std::size_t ramp = std::min(len / 2, static_cast<std::size_t>(0.008 * fs));
    for (std::size_t i = 0; i < len; ++i) {
      double w = 1.0;
      if (i < ramp) w = 0.5 - 0.5 * std::cos(kPi * static_cast<double>(i) / ramp);
      if (len - 1 - i < ramp) w = std::min(w, 0.5 - 0.5 * std::cos(kPi * static_cast<double>(len - 1 - i) / ramp));
      out[t + i] = gain * w * seg[i];
    }
    t += len;
    if (len == 0) break;
  }
}

}  // namespace

double uniform(std::mt19937_64 &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
double uniform(std::mt19937_64 &rng, double lo, double hi) { return lo + (hi - lo) * uniform(rng); }

double gaussian(std::mt19937_64 &rng) {
  const double u1 = 1.0 - uniform(rng);  // (0, 1]
  const double u2 = uniform(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

Speech speech(double duration_s, std::uint64_t seed, const SpeechOptions &opts) {
  const int fs = opts.sample_rate_hz;
  const std::size_t n = static_cast<std::size_t>(std::llround(duration_s * fs));
  std::mt19937_64 rng(seed);
  Speech out;
  out.signal.sample_rate_hz = fs;
  out.signal.samples.assign(n, 0.0);
  double t = opts.leading_pause ? uniform(rng, opts.min_pause_s, opts.max_pause_s) : 0.0;
  while (true) {
    const double len = uniform(rng, opts.min_utterance_s, opts.max_utterance_s);
    if (t + len > duration_s) break;
    const auto b = static_cast<std::size_t>(std::llround(t * fs));
    const auto e = static_cast<std::size_t>(std::llround((t + len) * fs));
    render_utterance(out.signal.samples, b, e, fs, opts.level_rms, rng);
    out.segments.push_back({static_cast<double>(b) / fs, static_cast<double>(e) / fs});
    t += len + uniform(rng, opts.min_pause_s, opts.max_pause_s);
  }
  for (double &v : out.signal.samples) v = std::clamp(v, -1.0, 1.0);
  return out;
}

std::string noise_name(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kWhite: return "white";
    case NoiseKind::kPink: return "pink";
    case NoiseKind::kBrown: return "brown";
    case NoiseKind::kBabble: return "babble";
  }
  return "?";
}

vadfuse::Signal noise(NoiseKind kind, std::size_t n, std::uint64_t seed, int fs, double rms) {
  std::mt19937_64 rng(seed);
  std::vector<double> x(n, 0.0);
  switch (kind) {
    case NoiseKind::kWhite:
      for (double &v : x) v = gaussian(rng);
      break;
    case NoiseKind::kPink: {
      // Kellet's economy filter: about -3 dB/octave above 10 Hz.
      double b0 = 0, b1 = 0, b2 = 0;
      for (double &v : x) {
        const double w = gaussian(rng);
        b0 = 0.99765 * b0 + w * 0.0990460;
        b1 = 0.96300 * b1 + w * 0.2965164;
        b2 = 0.57000 * b2 + w * 1.0526913;
        v = b0 + b1 + b2 + w * 0.1848;
      }
      break;
    }
    case NoiseKind::kBrown: {
      double y = 0.0;
      for (double &v : x) {
        y = 0.995 * y + gaussian(rng);
        v = y;
      }
      break;
    }
    case NoiseKind::kBabble: {
      SpeechOptions o;
      o.sample_rate_hz = fs;
      o.min_pause_s = 0.05;
      o.max_pause_s = 0.3;
      o.leading_pause = false;
      const double dur = static_cast<double>(n) / fs + 0.5;
      for (int talker = 0; talker < 6; ++talker) {
        const Speech s = speech(dur, rng(), o);
        const std::size_t shift = rng() % static_cast<std::size_t>(0.5 * fs);
        for (std::size_t i = 0; i < n; ++i) x[i] += s.signal.samples[i + shift];
      }
      break;
    }
  }
  const double r = rms_of(x, 0, n);
  vadfuse::Signal s;
  s.sample_rate_hz = fs;
  s.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.samples[i] = r > 0.0 ? x[i] * rms / r : 0.0;
  return s;
}

std::vector<double> harmonic_frame(double f0, std::size_t n, int fs, std::mt19937_64 &rng,
                                   double max_hz) {
  std::vector<double> x(n, 0.0);
  for (int k = 1; k * f0 < max_hz; ++k) {
    const double ph = uniform(rng, 0.0, 2.0 * kPi);
    for (std::size_t i = 0; i < n; ++i)
      x[i] += std::sin(2.0 * kPi * k * f0 * static_cast<double>(i) / fs + ph) / k;
  }
  return x;
}

std::vector<double> impulse_train(std::size_t n, std::size_t period, std::size_t phase) {
  std::vector<double> x(n, 0.0);
  for (std::size_t i = phase; i < n; i += period) x[i] = 1.0;
  return x;
}

}  // namespace synth

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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"
#include "support/synth.h"
#include "vadfuse/common.h"
#include "vadfuse/dsp.h"
#include "vadfuse/source_features.h"

using namespace vadfuse;

namespace {

constexpr int kFs = 16000;

std::vector<double> white(std::size_t n, std::uint64_t seed, double sigma = 1.0) {
  std::mt19937_64 rng(seed);
  std::vector<double> x(n);
  for (double &v : x) v = sigma * synth::gaussian(rng);
  return x;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  return v[static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size()))) - 1];
}

// Brute-force log-sum harmonic search; returns {argmax bin, max - mean}.
std::pair<std::size_t, double> hps_search(const Spectrum &s, int k_max) {
  const auto lo = static_cast<std::size_t>(std::ceil(50.0 / s.bin_hz));
  const auto hi = static_cast<std::size_t>(std::floor(400.0 / s.bin_hz));
  std::vector<double> h;
  for (std::size_t b = lo; b <= hi; ++b) {
    double v = 0.0;
    for (int k = 1; k <= k_max; ++k) v += std::log(s.magnitudes[b * k] + 1e-10);
    h.push_back(v);
  }
  const auto it = std::max_element(h.begin(), h.end());
  double mean = 0.0;
  for (double v : h) mean += v;
  mean /= static_cast<double>(h.size());
  return {lo + static_cast<std::size_t>(it - h.begin()), *it - mean};
}

// Grid search of E(f) + sum_k [E(k f) - E((k - 1/2) f)] over bins in 50..400 Hz.
std::pair<std::size_t, double> srh_search(const std::vector<double> &e, double bin_hz) {
  const auto lo = static_cast<std::size_t>(std::ceil(50.0 / bin_hz));
  const auto hi = static_cast<std::size_t>(std::floor(400.0 / bin_hz));
  auto at = [&](double b) {
    const auto i = static_cast<std::size_t>(std::llround(b));
    return i < e.size() ? e[i] : 0.0;
  };
  std::size_t best_bin = lo;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t b = lo; b <= hi; ++b) {
    const double f = static_cast<double>(b);
    double v = at(f);
    for (int k = 2; k <= 5; ++k) v += at(k * f) - at((k - 0.5) * f);
    if (v > best) {
      best = v;
      best_bin = b;
    }
  }
  return {best_bin, best};
}

// Harmonic complex plus white noise at the given SNR (dB), 512 samples.
std::vector<double> voiced_frame(std::uint64_t seed, double snr_db) {
  std::mt19937_64 rng(seed);
  const double f0 = synth::uniform(rng, 80.0, 300.0);
  auto x = synth::harmonic_frame(f0, 512, kFs, rng);
  double e = 0.0;
  for (double v : x) e += v * v;
  const double sigma = std::sqrt(e / x.size()) * std::pow(10.0, -snr_db / 20.0);
  for (double &v : x) v += sigma * synth::gaussian(rng);
  return x;
}

SourceFeatureVector extract_one(SourceFeatureExtractor &fx, const std::vector<double> &frame) {
  const auto w = window(frame);
  return fx(frame, w, magnitude_spectrum(w, kFs));
}

}  // namespace

TEST_CASE("log_energy") {
  const std::vector<double> zero(320, 0.0);
  CHECK(log_energy(zero) == doctest::Approx(std::log(1e-10)));
  CHECK(log_energy(zero) == doctest::Approx(-23.02585).epsilon(1e-6));
  const std::vector<double> half = {0.5, 0.5, 0.5, 0.5};
  CHECK(std::abs(log_energy(half)) < 1e-9);
  auto x = white(320, 1);
  auto y = x;
  for (double &v : y) v *= 2.0;
  CHECK(log_energy(y) - log_energy(x) == doctest::Approx(std::log(4.0)).epsilon(1e-9));
}

TEST_CASE("zcr") {
  CHECK(zcr(std::vector<double>(320, 0.3)) == 0.0);
  CHECK(zcr(std::vector<double>{1.0, -1.0, 1.0, -1.0}) == 1.0);
  CHECK(zcr(std::vector<double>{0.0, -1.0, 0.0}) == 1.0);  // zero counts as positive

  // 100 Hz at 16 kHz over 320 samples: a sine starting at 0 crosses near
  // samples 80, 160, 240; a cosine near 40, 120, 200, 280.
  std::vector<double> s(320), c(320);
  for (std::size_t n = 0; n < 320; ++n) {
    s[n] = std::sin(2.0 * M_PI * 100.0 * static_cast<double>(n) / kFs);
    c[n] = std::cos(2.0 * M_PI * 100.0 * static_cast<double>(n) / kFs);
  }
  CHECK(zcr(s) == doctest::Approx(3.0 / 319.0));
  CHECK(zcr(c) == doctest::Approx(4.0 / 319.0));
  CHECK(zcr(c) == doctest::Approx(0.01254).epsilon(1e-3));
}

TEST_CASE("residual moments") {
  const auto alt = residual_moments(std::vector<double>{1.0, -1.0, 1.0, -1.0});
  CHECK(std::abs(alt.skewness) < 1e-12);
  CHECK(alt.kurtosis == doctest::Approx(1.0));

  const auto g = white(4096, 7);
  const auto m = residual_moments(g);
  CHECK(m.kurtosis == doctest::Approx(3.0).epsilon(0.1));
  // Moment oracle in long double.
  long double mean = 0, m2 = 0, m3 = 0, m4 = 0;
  for (double v : g) mean += v;
  mean /= g.size();
  for (double v : g) {
    const long double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= g.size();
  m3 /= g.size();
  m4 /= g.size();
  CHECK(m.skewness == doctest::Approx(static_cast<double>(m3 / std::pow(m2, 1.5L))).epsilon(1e-9));
  CHECK(m.kurtosis == doctest::Approx(static_cast<double>(m4 / (m2 * m2))).epsilon(1e-9));

  bool threw = false;
  try {
    residual_moments(std::vector<double>(64, 0.25));
  } catch (const Error &e) {
    threw = e.code() == ErrorCode::kDegenerateFrame;
  }
  CHECK(threw);

  SourceFeatureExtractor fx(kFs);
  const auto v = extract_one(fx, std::vector<double>(512, 0.0));
  CHECK(v.skewness == 0.0);
  CHECK(v.kurtosis == 3.0);
}

TEST_CASE("amdf features") {
  std::mt19937_64 rng(3);
  const auto periodic = synth::harmonic_frame(160.0, 512, kFs, rng);  // period 100 samples
  const auto a = amdf_features(periodic, kFs);
  CHECK(a.clarity > 1.0 - 1e-9);
  CHECK(a.clarity <= 1.0);
  CHECK(a.harmonicity > 60.0);

  std::vector<double> clarity;
  for (std::uint64_t seed = 0; seed < 100; ++seed)
    clarity.push_back(amdf_features(white(512, 100 + seed), kFs).clarity);
  CHECK(percentile(clarity, 0.95) < 0.5);

  const auto c = amdf_features(std::vector<double>(512, 0.7), kFs);
  CHECK(c.harmonicity == 0.0);
  CHECK(c.clarity == 0.0);
}

TEST_CASE("lp error") {
  std::vector<double> r(19, 0.0);
  r[0] = 1.0;
  CHECK(lp_error(levinson(r)) == doctest::Approx(1.0));

  std::vector<double> s(512);
  for (std::size_t n = 0; n < s.size(); ++n)
    s[n] = std::sin(2.0 * M_PI * 1000.0 * static_cast<double>(n) / kFs);
  const auto ws = window(s);
  CHECK(lp_error(levinson(autocorr(ws, 2), 2)) < 0.01);
  CHECK(lp_error(levinson(autocorr(ws, 18), 18)) < 0.01);

  const auto e = white(8192, 11);
  std::vector<double> ar(e.size());
  double prev = 0.0;
  for (std::size_t n = 0; n < e.size(); ++n) prev = ar[n] = 0.9 * prev + e[n];
  const double err = lp_error(levinson(autocorr(ar, 18), 18));
  CHECK(err == doctest::Approx(1.0 - 0.81).epsilon(0.03 / 0.19));
}

TEST_CASE("harmonic product spectrum") {
  std::mt19937_64 rng(5);
  const auto x = synth::harmonic_frame(120.0, 512, kFs, rng);
  const Spectrum s = magnitude_spectrum(window(x), kFs);
  const auto [bin, contrast] = hps_search(s, 5);
  CHECK(std::abs(static_cast<double>(bin) * s.bin_hz - 120.0) <= s.bin_hz);
  CHECK(hps(s) == doctest::Approx(contrast).epsilon(1e-12));
  CHECK(hps(s) > 1.0);

  Spectrum flat{std::vector<double>(513, 2.0), kFs / 1024.0, 1024};
  CHECK(std::abs(hps(flat)) < 1e-12);
  Spectrum zero{std::vector<double>(513, 0.0), kFs / 1024.0, 1024};
  CHECK(hps(zero) == 0.0);
}

TEST_CASE("cepstral peak prominence") {
  const auto train = window(synth::impulse_train(512, 100, 7));
  const auto c = real_cepstrum(train);
  std::size_t peak = 40;
  for (std::size_t q = 40; q <= 320; ++q)
    if (c[q] > c[peak]) peak = q;
  CHECK(static_cast<double>(peak) / kFs == doctest::Approx(0.00625));
  CHECK(cpp(train, kFs) > 10.0);

  int below = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed)
    below += cpp(window(white(512, 200 + seed)), kFs) < 5.0;
  CHECK(below >= 95);

  CHECK(std::abs(cpp(std::vector<double>(512, 0.0), kFs)) < 1e-9);
}

TEST_CASE("summation of residual harmonics") {
  // 16000 / 133 = 120.3 Hz
  const auto train = window(synth::impulse_train(512, 133, 11));
  const auto r = srh_features(train, kFs);
  CHECK(std::abs(r.f0_hat - 120.0) <= 2.0);
  const Spectrum e = magnitude_spectrum(train, kFs, kDefaultSrhNfft);
  const auto [bin, best] = srh_search(e.magnitudes, e.bin_hz);
  CHECK(r.f0_hat == doctest::Approx(static_cast<double>(bin) * e.bin_hz));
  CHECK(r.srh_star == doctest::Approx(best).epsilon(1e-12));

  SUBCASE("flat spectrum") {
    Spectrum flat{std::vector<double>(2049, 3.0), kFs / 4096.0, 4096};
    const auto f = srh_from_spectrum(flat);
    CHECK(f.srh == doctest::Approx(1.0 / std::sqrt(2049.0)));
    CHECK(f.srh_star == doctest::Approx(3.0));
  }
  SUBCASE("scaling") {
    for (double alpha : {0.01, 3.0, 250.0}) {
      auto y = train;
      for (double &v : y) v *= alpha;
      const auto s = srh_features(y, kFs);
      CHECK(s.srh == doctest::Approx(r.srh).epsilon(1e-9));
      CHECK(s.srh_star == doctest::Approx(alpha * r.srh_star).epsilon(1e-9));
      CHECK(s.f0_hat == r.f0_hat);
    }
  }
  SUBCASE("zero residual") {
    const auto z = srh_features(std::vector<double>(512, 0.0), kFs);
    CHECK(z.srh == 0.0);
    CHECK(z.srh_star == 0.0);
    CHECK(z.f0_hat == 50.0);
  }
  SUBCASE("known f0") {
    const double bin_hz = static_cast<double>(kFs) / kDefaultSrhNfft;
    for (double f0 : {80.0, 120.0, 200.0, 350.0}) {
      std::mt19937_64 rng(static_cast<std::uint64_t>(f0));
      const auto h = window(synth::harmonic_frame(f0, 512, kFs, rng));
      CHECK(std::abs(srh_features(h, kFs).f0_hat - f0) <= bin_hz);
    }
  }
}

TEST_CASE("voiced frames rank above noise frames") {
  std::vector<SourceFeatureVector> voiced, noise;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SourceFeatureExtractor fv(kFs), fn(kFs);
    voiced.push_back(extract_one(fv, voiced_frame(1000 + seed, 10.0)));
    noise.push_back(extract_one(fn, white(512, 5000 + seed, 0.1)));
  }
  auto med = [](const std::vector<SourceFeatureVector> &v, double SourceFeatureVector::*f) {
    std::vector<double> x;
    for (const auto &s : v) x.push_back(s.*f);
    return median(x);
  };
  for (auto f : {&SourceFeatureVector::cpp, &SourceFeatureVector::srh,
                 &SourceFeatureVector::srh_star, &SourceFeatureVector::clarity,
                 &SourceFeatureVector::hps}) {
    CHECK(med(voiced, f) > med(noise, f));
  }
}

TEST_CASE("feature ranges on a noisy speech stream") {
  auto sp = synth::speech(30.0, 9);
  const auto n = synth::noise(synth::NoiseKind::kBabble, sp.signal.samples.size(), 10);
  for (std::size_t i = 0; i < n.samples.size(); ++i) sp.signal.samples[i] += 0.3 * n.samples[i];
  const auto frames = frame_signal(sp.signal, 0.032, 0.010, FrameAlignment::kCentered);
  SourceFeatureExtractor fx(kFs);
  std::size_t bad = 0;
  for (std::size_t t = 0; t < frames.n_frames; ++t) {
    const auto f = frames.frame(t);
    const auto w = window(f);
    const auto v = fx(f, w, magnitude_spectrum(w, kFs));
    for (double x : v.to_array()) bad += !std::isfinite(x);
    bad += !(v.zcr >= 0.0 && v.zcr <= 1.0);
    bad += !(v.clarity >= 0.0 && v.clarity <= 1.0);
    bad += !(v.lp_error > 0.0 && v.lp_error <= 1.0);
  }
  CHECK(bad == 0);
  CHECK(source_feature_names().size() == kSourceFeatureCount);
}

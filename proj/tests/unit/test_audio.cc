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

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "support/synth.h"
#include "vadfuse/audio.h"
#include "vadfuse/common.h"

using namespace vadfuse;

namespace {

std::vector<std::uint8_t> wav_bytes(std::uint16_t channels, std::uint32_t rate, std::uint16_t bits,
                                    std::uint16_t format, const std::vector<std::int16_t> &pcm) {
  std::vector<std::uint8_t> b;
  auto put = [&](std::uint32_t v, int n) {
    for (int i = 0; i < n; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  auto tag = [&](const char *s) { b.insert(b.end(), s, s + 4); };
  const std::uint32_t data_len = static_cast<std::uint32_t>(pcm.size() * 2);
  tag("RIFF");
  put(36 + data_len, 4);
  tag("WAVE");
  tag("fmt ");
  put(16, 4);
  put(format, 2);
  put(channels, 2);
  put(rate, 4);
  put(rate * channels * bits / 8, 4);
  put(channels * bits / 8, 2);
  put(bits, 2);
  tag("data");
  put(data_len, 4);
  for (auto s : pcm) put(static_cast<std::uint16_t>(s), 2);
  return b;
}

Signal square(std::size_t n, std::size_t half_period, double amp) {
  Signal s;
  s.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.samples[i] = (i / half_period) % 2 ? -amp : amp;
  return s;
}

std::filesystem::path temp_dir(const std::string &name) {
  auto p = std::filesystem::temp_directory_path() / ("vadfuse_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("wav: PCM16 scaling") {
  const Signal s = parse_wav(wav_bytes(1, 16000, 16, 1, {0, 16384, -32768}));
  REQUIRE(s.samples.size() == 3);
  CHECK(s.samples[0] == 0.0);
  CHECK(s.samples[1] == 0.5);
  CHECK(s.samples[2] == -1.0);
  CHECK(s.sample_rate_hz == 16000);
}

TEST_CASE("wav: unsupported formats name the field") {
  auto expect_field = [](const std::vector<std::uint8_t> &bytes, const std::string &field) {
    try {
      parse_wav(bytes);
      FAIL("expected an error");
    } catch (const Error &e) {
      CHECK(e.kind() == ErrorKind::kFormat);
      CHECK(e.code() == ErrorCode::kUnsupportedFormat);
      const std::string msg = e.what();
      CHECK(msg.find("unsupported format") != std::string::npos);
      CHECK(msg.find(field) != std::string::npos);
    }
  };
  expect_field(wav_bytes(2, 16000, 16, 1, {0, 0}), "channels");
  expect_field(wav_bytes(1, 16000, 8, 1, {0}), "bits");
  expect_field(wav_bytes(1, 44100, 16, 1, {0}), "sample_rate");
  expect_field(wav_bytes(1, 16000, 16, 3, {0}), "format");
}

TEST_CASE("wav: malformed header") {
  auto b = wav_bytes(1, 16000, 16, 1, {1, 2, 3});
  CHECK_THROWS_AS(parse_wav({b.begin(), b.begin() + 20}), Error);
  b[0] = 'X';
  try {
    parse_wav(b);
    FAIL("expected an error");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kMalformedHeader);
  }
}

TEST_CASE("wav: duration and round trip") {
  Signal s;
  s.samples.assign(160000, 0.0);
  std::mt19937_64 rng(3);
  for (auto &v : s.samples) v = static_cast<double>(static_cast<std::int16_t>(rng())) / 32768.0;
  CHECK(s.duration_s() == 10.0);
  const Signal back = parse_wav(encode_wav(s));
  CHECK(back.samples == s.samples);
  CHECK(back.duration_s() == 10.0);
  const auto dir = temp_dir("wav");
  write_wav(dir / "a.wav", s);
  CHECK(read_wav(dir / "a.wav").samples == s.samples);
  CHECK_THROWS_AS(read_wav(dir / "missing.wav"), Error);
}

TEST_CASE("mix_at_snr: gain formula") {
  // Square waves have the same RMS over every block, so the active RMS is
  // exactly the amplitude.
  const Signal speech = square(16000, 40, 0.1);
  const Signal noise = square(32000, 25, 0.1);
  const MixResult m0 = mix_at_snr(speech, noise, 0.0, 1);
  CHECK(m0.gain == doctest::Approx(1.0).epsilon(1e-12));
  const MixResult m20 = mix_at_snr(speech, noise, 20.0, 1);
  CHECK(m20.gain == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(m20.clipped == 0);
  for (std::size_t i = 0; i < speech.samples.size(); ++i)
    CHECK_EQ(m20.mixed.samples[i],
             doctest::Approx(speech.samples[i] + 0.1 * noise.samples[m20.noise_offset + i]));
}

TEST_CASE("mix_at_snr: degenerate input") {
  const Signal speech = square(16000, 40, 0.1);
  Signal silent;
  silent.samples.assign(32000, 0.0);
  try {
    mix_at_snr(speech, silent, 0.0, 1);
    FAIL("expected an error");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kDegenerateInput);
    CHECK(std::string(e.what()).find("degenerate input") != std::string::npos);
  }
  Signal quiet;
  quiet.samples.assign(16000, 0.0);
  CHECK_THROWS_AS(mix_at_snr(quiet, square(32000, 25, 0.1), 0.0, 1), Error);
}

TEST_CASE("mix_at_snr: clipping is counted") {
  const Signal speech = square(16000, 40, 0.9);
  const Signal noise = square(32000, 25, 0.5);
  const MixResult m = mix_at_snr(speech, noise, 0.0, 2);
  CHECK(m.clipped > 0);
  for (double v : m.mixed.samples) CHECK(std::fabs(v) <= 1.0);
}

TEST_CASE("mix_at_snr: realized SNR within 0.1 dB") {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const auto sp = synth::speech(6.0, 100 + seed);
    const auto kind = synth::kAllNoises[seed % 4];
    const Signal noise = synth::noise(kind, 8 * 16000, 200 + seed);
    for (double snr : {0.0, 10.0, 20.0}) {
      const MixResult m = mix_at_snr(sp.signal, noise, snr, seed);
      if (m.clipped > 0) continue;
      CHECK(std::fabs(realized_snr_db(sp.signal, m.mixed) - snr) <= 0.1);
    }
  }
}

TEST_CASE("mix_at_snr: seeded offset is reproducible") {
  const Signal speech = square(8000, 40, 0.1);
  const Signal noise = synth::noise(synth::NoiseKind::kWhite, 64000, 9);
  const MixResult a = mix_at_snr(speech, noise, 5.0, 77);
  const MixResult b = mix_at_snr(speech, noise, 5.0, 77);
  CHECK(a.noise_offset == b.noise_offset);
  CHECK(a.mixed.samples == b.mixed.samples);
  CHECK(a.noise_offset + speech.samples.size() <= noise.samples.size());
}

TEST_CASE("pad_with_noise") {
  const Signal speech = synth::speech(5.0, 4).signal;
  const Signal noise = synth::noise(synth::NoiseKind::kPink, 10 * 16000, 5);
  const PaddedSignal p = pad_with_noise(speech, noise, 2.0, 6);
  CHECK(p.signal.duration_s() == 9.0);
  CHECK(p.offset_s == 2.0);
  for (std::size_t i = 0; i < speech.samples.size(); ++i)
    REQUIRE(p.signal.samples[32000 + i] == speech.samples[i]);

  const PaddedSignal none = pad_with_noise(speech, noise, 0.0, 6);
  CHECK(none.signal.samples == speech.samples);
  CHECK(none.offset_s == 0.0);

  const Signal short_noise = synth::noise(synth::NoiseKind::kWhite, 16000, 5);
  CHECK_THROWS_AS(pad_with_noise(speech, short_noise, 2.0, 6), Error);
  CHECK(kDefaultPadSeconds == 2.0);
}

TEST_CASE("energy_endpoint_labels: silence, tone, constant") {
  Signal silence;
  silence.samples.assign(16000, 0.0);
  const LabelTrack s = energy_endpoint_labels(silence, 0.032, 0.010);
  CHECK(s.size() == 100);
  for (auto l : s.labels) CHECK(l == 0);

  Signal tone;
  tone.samples.assign(48000, 0.0);
  for (std::size_t i = 16000; i < 32000; ++i)
    tone.samples[i] = std::sin(2.0 * M_PI * 1000.0 * static_cast<double>(i) / 16000.0);
  // 20 ms frames: a frame is touched by the tone iff its centre lies within
  // 10 ms of the tone region.
  const LabelTrack t = energy_endpoint_labels(tone, 0.020, 0.010);
  REQUIRE(t.size() == 300);
  const auto segs = segments_from_labels(t);
  REQUIRE(segs.size() == 1);
  const long first = std::lround(segs[0].start_s / 0.010);
  const long last = std::lround(segs[0].end_s / 0.010) - 1;
  CHECK(std::labs(first - 100) <= 1);
  CHECK(std::labs(last - 199) <= 1);

  Signal constant;
  constant.samples.assign(16000, 1.0);
  for (auto l : energy_endpoint_labels(constant, 0.032, 0.010).labels) CHECK(l == 1);

  Signal tiny;
  tiny.samples.assign(100, 0.5);
  CHECK_THROWS_AS(energy_endpoint_labels(tiny, 0.032, 0.010), Error);
}

TEST_CASE("energy_endpoint_labels: peak frames are always speech") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Signal x = synth::speech(4.0, seed).signal;
    // An isolated click would be removed by the median filter alone.
    x.samples[30000] = 1.0;
    const LabelTrack l = energy_endpoint_labels(x, 0.032, 0.010);
    const auto frames_peak = [&] {
      std::vector<double> e(l.size(), 0.0);
      const long half = 256;
      for (std::size_t t = 0; t < l.size(); ++t)
        for (long k = -half; k < half; ++k) {
          const long i = static_cast<long>(t) * 160 + k;
          if (i >= 0 && i < static_cast<long>(x.samples.size())) e[t] += x.samples[i] * x.samples[i];
        }
      return e;
    }();
    const double peak = *std::max_element(frames_peak.begin(), frames_peak.end());
    for (std::size_t t = 0; t < l.size(); ++t)
      if (frames_peak[t] == peak) CHECK(l.labels[t] == 1);
  }
}

TEST_CASE("segments <-> labels") {
  LabelTrack l;
  l.labels = {0, 1, 1, 0};
  l.hop_s = 0.01;
  const auto segs = segments_from_labels(l);
  REQUIRE(segs.size() == 1);
  CHECK(segs[0].start_s == doctest::Approx(0.01));
  CHECK(segs[0].end_s == doctest::Approx(0.03));
  CHECK(segments_from_labels(LabelTrack{}).empty());

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    LabelTrack r;
    r.labels.resize(rng() % 300);
    for (auto &v : r.labels) v = (rng() % 5) < 2;
    const auto back = labels_from_segments(segments_from_labels(r), r.size(), r.hop_s);
    REQUIRE(back.labels == r.labels);
  }
}

TEST_CASE("pad_labels") {
  LabelTrack l;
  l.labels = {1, 1};
  const LabelTrack p = pad_labels(l, 2, 3);
  CHECK(p.labels == std::vector<std::uint8_t>{0, 0, 1, 1, 0, 0, 0});
}

TEST_CASE("label and manifest files") {
  const auto dir = temp_dir("files");
  const SegmentList segs{{0.5, 1.25}, {2.0, 3.125}};
  write_label_file(dir / "a.lab", segs);
  std::ifstream in(dir / "a.lab");
  std::string line;
  std::getline(in, line);
  CHECK(line == "0.500\t1.250");
  CHECK(read_label_file(dir / "a.lab") == segs);

  write_manifest(dir / "m.tsv", {{"x.wav", "x.lab", "white_0dB"}, {"y.wav", "", "clean"}});
  const auto recs = read_manifest(dir / "m.tsv");
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].wav == dir / "x.wav");
  CHECK(recs[0].label == dir / "x.lab");
  CHECK(recs[0].condition == "white_0dB");
  CHECK(recs[1].label.empty());
  CHECK_THROWS_AS(read_manifest(dir / "nope.tsv"), Error);
}

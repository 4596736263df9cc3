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

#include "vadfuse/audio.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

#include "vadfuse/common.h"
#include "vadfuse/dsp.h"

namespace vadfuse {
namespace {

std::uint32_t ReadU32(const std::uint8_t *p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t ReadU16(const std::uint8_t *p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void PutU32(std::vector<std::uint8_t> &out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void PutU16(std::vector<std::uint8_t> &out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

[[noreturn]] void Malformed(const std::string &what) {
  throw Error(ErrorKind::kFormat, ErrorCode::kMalformedHeader, "malformed WAV: " + what);
}

[[noreturn]] void Unsupported(const std::string &field, long value) {
  throw Error(ErrorKind::kFormat, ErrorCode::kUnsupportedFormat,
              "unsupported format: " + field + "=" + std::to_string(value));
}

// Energies of consecutive non-overlapping 20 ms blocks.
std::vector<double> BlockEnergies(const Signal &s, std::vector<std::size_t> *block_len) {
  const std::size_t block = std::max<std::size_t>(1, samples_for(0.020, s.sample_rate_hz));
  std::vector<double> energies;
  for (std::size_t i = 0; i < s.samples.size(); i += block) {
    const std::size_t end = std::min(s.samples.size(), i + block);
    double e = 0.0;
    for (std::size_t j = i; j < end; ++j) e += s.samples[j] * s.samples[j];
    energies.push_back(e);
    if (block_len != nullptr) block_len->push_back(end - i);
  }
  return energies;
}

// Frames within threshold_db of the peak, excluding zero-energy frames.
std::vector<std::uint8_t> ActiveMask(const std::vector<double> &energies, double threshold_db) {
  std::vector<std::uint8_t> mask(energies.size(), 0);
  if (energies.empty()) return mask;
  const double peak = *std::max_element(energies.begin(), energies.end());
  if (!(peak > 0.0)) return mask;
  const double floor_db = 10.0 * std::log10(peak + kLogFloor) - threshold_db;
  for (std::size_t i = 0; i < energies.size(); ++i)
    mask[i] = energies[i] > 0.0 && 10.0 * std::log10(energies[i] + kLogFloor) >= floor_db;
  return mask;
}

void RequireSameRate(const Signal &a, const Signal &b, const char *op) {
  if (a.sample_rate_hz != b.sample_rate_hz)
    throw Error(ErrorKind::kData, ErrorCode::kDegenerateInput,
                std::string(op) + ": sample rates differ (" + std::to_string(a.sample_rate_hz) +
                    " vs " + std::to_string(b.sample_rate_hz) + ")");
}

}  // namespace

Signal parse_wav(const std::vector<std::uint8_t> &bytes) {
  if (bytes.size() < 12) Malformed("file shorter than RIFF header");
  if (std::memcmp(bytes.data(), "RIFF", 4) != 0) Malformed("missing RIFF tag");
  if (std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) Malformed("missing WAVE tag");

  bool have_fmt = false;
  std::uint16_t channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t *chunk = bytes.data() + pos;
    const std::uint32_t size = ReadU32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || body + size > bytes.size()) Malformed("fmt chunk truncated");
      std::uint16_t format = ReadU16(bytes.data() + body);
      channels = ReadU16(bytes.data() + body + 2);
      rate = ReadU32(bytes.data() + body + 4);
      bits = ReadU16(bytes.data() + body + 14);
      if (format == 0xFFFE && size >= 40) format = ReadU16(bytes.data() + body + 24);
      if (format != 1) Unsupported("audio_format", format);
      if (channels != 1) Unsupported("channels", channels);
      if (bits != 16) Unsupported("bits_per_sample", bits);
      if (rate != 8000 && rate != 16000) Unsupported("sample_rate", static_cast<long>(rate));
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) Malformed("data chunk before fmt chunk");
      if (body + size > bytes.size()) Malformed("data chunk truncated");
      if (size % 2 != 0) Malformed("odd data size for 16-bit samples");
      Signal s;
      s.sample_rate_hz = static_cast<int>(rate);
      s.samples.resize(size / 2);
      for (std::size_t i = 0; i < s.samples.size(); ++i) {
        const auto v = static_cast<std::int16_t>(ReadU16(bytes.data() + body + 2 * i));
        s.samples[i] = static_cast<double>(v) / 32768.0;
      }
      return s;
    }
    pos = body + size + (size & 1u);
  }
  Malformed(have_fmt ? "no data chunk" : "no fmt chunk");
}

Signal read_wav(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return parse_wav(bytes);
  } catch (const Error &e) {
    throw Error(e.kind(), e.code(), path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_wav(const Signal &signal) {
  const auto data_bytes = static_cast<std::uint32_t>(signal.samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  PutU32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  PutU32(out, 16);
  PutU16(out, 1);
  PutU16(out, 1);
  PutU32(out, static_cast<std::uint32_t>(signal.sample_rate_hz));
  PutU32(out, static_cast<std::uint32_t>(signal.sample_rate_hz) * 2);
  PutU16(out, 2);
  PutU16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  PutU32(out, data_bytes);
  for (double x : signal.samples) {
    const double q = std::clamp(std::round(x * 32768.0), -32768.0, 32767.0);
    PutU16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  return out;
}

void write_wav(const std::filesystem::path &path, const Signal &signal) {
  const auto bytes = encode_wav(signal);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char *>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::kIo, "short write to " + path.string());
}

double rms(const std::vector<double> &samples) {
  if (samples.empty()) return 0.0;
  double e = 0.0;
  for (double x : samples) e += x * x;
  return std::sqrt(e / static_cast<double>(samples.size()));
}

double active_rms(const Signal &signal) {
  std::vector<std::size_t> lens;
  const auto energies = BlockEnergies(signal, &lens);
  const auto mask = ActiveMask(energies, kActiveThresholdDb);
  double e = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < energies.size(); ++i) {
    if (!mask[i]) continue;
    e += energies[i];
    n += lens[i];
  }
  return n == 0 ? 0.0 : std::sqrt(e / static_cast<double>(n));
}

MixResult mix_at_snr(const Signal &speech, const Signal &noise, double snr_db,
                     std::uint64_t seed) {
  RequireSameRate(speech, noise, "mix_at_snr");
  const std::size_t n = speech.samples.size();
  if (noise.samples.size() < n)
    throw Error(ErrorKind::kData, ErrorCode::kDegenerateInput,
                "mix_at_snr: noise shorter than speech");

  std::mt19937_64 rng(seed);
  const std::size_t span = noise.samples.size() - n;
  const std::size_t offset = span == 0 ? 0 : static_cast<std::size_t>(rng() % (span + 1));
  std::vector<double> segment(noise.samples.begin() + offset,
                              noise.samples.begin() + offset + n);

  const double speech_rms = active_rms(speech);
  const double noise_rms = rms(segment);
  if (!(speech_rms > 0.0) || !(noise_rms > 0.0))
    throw Error(ErrorKind::kData, ErrorCode::kDegenerateInput,
                std::string("mix_at_snr: degenerate input (zero-energy ") +
                    (speech_rms > 0.0 ? "noise" : "speech") + ")");

  MixResult r;
  r.gain = speech_rms / (noise_rms * std::pow(10.0, snr_db / 20.0));
  r.noise_offset = offset;
  r.mixed.sample_rate_hz = speech.sample_rate_hz;
  r.mixed.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double y = speech.samples[i] + r.gain * segment[i];
    if (y > 1.0 || y < -1.0) {
      y = std::clamp(y, -1.0, 1.0);
      ++r.clipped;
    }
    r.mixed.samples[i] = y;
  }
  return r;
}

double realized_snr_db(const Signal &speech, const Signal &mixed) {
  if (speech.samples.size() != mixed.samples.size())
    throw Error(ErrorKind::kData, ErrorCode::kLengthMismatch, "realized_snr_db: lengths differ");
  std::vector<double> residual(speech.samples.size());
  for (std::size_t i = 0; i < residual.size(); ++i)
    residual[i] = mixed.samples[i] - speech.samples[i];
  return 20.0 * std::log10(active_rms(speech) / rms(residual));
}

PaddedSignal pad_with_noise(const Signal &speech, const Signal &noise, double pad_s,
                            std::uint64_t seed) {
  RequireSameRate(speech, noise, "pad_with_noise");
  if (pad_s < 0.0) throw Error(ErrorKind::kUsage, "pad_with_noise: negative pad");
  const std::size_t pad = samples_for(pad_s, speech.sample_rate_hz);
  PaddedSignal out;
  out.signal.sample_rate_hz = speech.sample_rate_hz;
  out.offset_s = static_cast<double>(pad) / speech.sample_rate_hz;
  if (pad == 0) {
    out.signal.samples = speech.samples;
    return out;
  }
  if (noise.samples.size() < 2 * pad)
    throw Error(ErrorKind::kData, ErrorCode::kDegenerateInput,
                "pad_with_noise: noise too short (" + std::to_string(noise.samples.size()) +
                    " samples, need " + std::to_string(2 * pad) + ")");
  std::mt19937_64 rng(seed);
  const std::size_t span = noise.samples.size() - 2 * pad;
  const std::size_t offset = span == 0 ? 0 : static_cast<std::size_t>(rng() % (span + 1));
  auto &s = out.signal.samples;
  s.reserve(speech.samples.size() + 2 * pad);
  s.insert(s.end(), noise.samples.begin() + offset, noise.samples.begin() + offset + pad);
  s.insert(s.end(), speech.samples.begin(), speech.samples.end());
  s.insert(s.end(), noise.samples.begin() + offset + pad,
           noise.samples.begin() + offset + 2 * pad);
  return out;
}

LabelTrack energy_endpoint_labels(const Signal &clean, double frame_len_s, double hop_s,
                                  const EndpointOptions &opts) {
  if (clean.samples.size() < samples_for(frame_len_s, clean.sample_rate_hz))
    throw Error(ErrorKind::kData, ErrorCode::kDegenerateInput,
                "energy_endpoint_labels: signal shorter than one frame");
  const FrameSequence frames =
      frame_signal(clean, frame_len_s, hop_s, FrameAlignment::kCentered);
  std::vector<double> energies(frames.n_frames);
  for (std::size_t t = 0; t < frames.n_frames; ++t) {
    const auto f = frames.frame(t);
    double e = 0.0;
    for (double x : f) e += x * x;
    energies[t] = e;
  }
  const auto mask = ActiveMask(energies, opts.threshold_db);

  std::vector<double> raw(mask.begin(), mask.end());
  const auto smoothed = running_median(raw, opts.median_width);
  LabelTrack labels;
  labels.hop_s = hop_s;
  labels.labels.resize(smoothed.size());
  for (std::size_t t = 0; t < smoothed.size(); ++t) labels.labels[t] = smoothed[t] > 0.5;
  // The loudest frames stay speech even if the median removed them.
  const double peak = energies.empty() ? 0.0 : *std::max_element(energies.begin(), energies.end());
  for (std::size_t t = 0; t < energies.size(); ++t)
    if (peak > 0.0 && energies[t] == peak) labels.labels[t] = 1;

  // Fill interior gaps shorter than gap_close_s.
  const auto max_gap = static_cast<std::size_t>(std::llround(opts.gap_close_s / hop_s));
  auto &l = labels.labels;
  std::size_t t = 0;
  while (t < l.size() && !l[t]) ++t;
  while (t < l.size()) {
    while (t < l.size() && l[t]) ++t;
    const std::size_t gap_start = t;
    while (t < l.size() && !l[t]) ++t;
    if (t < l.size() && t - gap_start < max_gap)
      std::fill(l.begin() + gap_start, l.begin() + t, 1);
  }
  return labels;
}

SegmentList segments_from_labels(const LabelTrack &labels) {
  SegmentList segs;
  const auto &l = labels.labels;
  std::size_t t = 0;
  while (t < l.size()) {
    if (!l[t]) {
      ++t;
      continue;
    }
    const std::size_t start = t;
    while (t < l.size() && l[t]) ++t;
    segs.push_back({static_cast<double>(start) * labels.hop_s,
                    static_cast<double>(t) * labels.hop_s});
  }
  return segs;
}

LabelTrack labels_from_segments(const SegmentList &segments, std::size_t n_frames,
                                double hop_s) {
  LabelTrack out;
  out.hop_s = hop_s;
  out.labels.assign(n_frames, 0);
  for (const Segment &s : segments) {
    const auto a = std::max<long long>(0, std::llround(s.start_s / hop_s));
    const auto b = std::min<long long>(static_cast<long long>(n_frames),
                                       std::llround(s.end_s / hop_s));
    for (long long t = a; t < b; ++t) out.labels[static_cast<std::size_t>(t)] = 1;
  }
  return out;
}

LabelTrack pad_labels(const LabelTrack &labels, std::size_t before, std::size_t after) {
  LabelTrack out;
  out.hop_s = labels.hop_s;
  out.labels.assign(before, 0);
  out.labels.insert(out.labels.end(), labels.labels.begin(), labels.labels.end());
  out.labels.insert(out.labels.end(), after, 0);
  return out;
}

void write_label_file(const std::filesystem::path &path, const SegmentList &segments) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  char line[64];
  for (const Segment &s : segments) {
    std::snprintf(line, sizeof(line), "%.3f\t%.3f\n", s.start_s, s.end_s);
    out << line;
  }
  if (!out) throw Error(ErrorKind::kIo, "short write to " + path.string());
}

SegmentList read_label_file(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  SegmentList segs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    Segment s;
    if (!(ss >> s.start_s >> s.end_s) || !(s.start_s < s.end_s) ||
        (!segs.empty() && s.start_s < segs.back().end_s))
      throw Error(ErrorKind::kFormat, path.string() + ":" + std::to_string(lineno) +
                                          ": bad segment line");
    segs.push_back(s);
  }
  return segs;
}

std::vector<ManifestRecord> read_manifest(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  const auto base = path.parent_path();
  auto resolve = [&](const std::string &p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };
  std::vector<ManifestRecord> records;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const std::size_t tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 3 || fields[0].empty())
      throw Error(ErrorKind::kFormat, path.string() + ":" + std::to_string(lineno) +
                                          ": expected wav<TAB>label<TAB>condition");
    ManifestRecord r;
    r.wav = resolve(fields[0]);
    if (fields[1] != "-" && !fields[1].empty()) r.label = resolve(fields[1]);
    r.condition = fields[2];
    records.push_back(std::move(r));
  }
  return records;
}

void write_manifest(const std::filesystem::path &path,
                    const std::vector<ManifestRecord> &records) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  for (const auto &r : records)
    out << r.wav.string() << '\t' << (r.label.empty() ? "-" : r.label.string()) << '\t'
        << r.condition << '\n';
  if (!out) throw Error(ErrorKind::kIo, "short write to " + path.string());
}

}  // namespace vadfuse

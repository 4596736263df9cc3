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

#include "vadfuse/extract.h"

#include <algorithm>
#include <array>

#include "vadfuse/common.h"
#include "vadfuse/dsp.h"

namespace vadfuse {
namespace {

constexpr std::array<std::size_t, 4> kSadjadiColumns = {4, 5, 6, 7};
constexpr std::array<std::size_t, 3> kNewColumns = {8, 9, 10};

struct StreamInfo {
  Stream stream;
  std::string_view tag;
};

constexpr std::array<StreamInfo, 6> kStreams = {{
    {Stream::kMfcc, "MFCC"},
    {Stream::kPlp, "PLP"},
    {Stream::kCgd, "CGD"},
    {Stream::kSrc, "SRC"},
    {Stream::kSadjadi, "SADJADI"},
    {Stream::kNew, "NEW"},
}};

FeatureTrack Columns(const FeatureTrack &src, std::span<const std::size_t> cols, Stream s) {
  FeatureTrack out(src.n_frames, cols.size(), src.hop_s, std::string(stream_tag(s)));
  for (std::size_t t = 0; t < src.n_frames; ++t)
    for (std::size_t i = 0; i < cols.size(); ++i) out.at(t, i) = src.at(t, cols[i]);
  return out;
}

}  // namespace

std::string_view stream_tag(Stream s) {
  for (const auto &info : kStreams)
    if (info.stream == s) return info.tag;
  return "?";
}

std::optional<Stream> parse_stream(std::string_view tag) {
  for (const auto &info : kStreams)
    if (info.tag == tag) return info.stream;
  return std::nullopt;
}

std::vector<Stream> parse_stream_list(std::string_view list) {
  std::vector<Stream> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    const std::size_t comma = std::min(list.find(',', start), list.size());
    const std::string_view tag = list.substr(start, comma - start);
    const auto s = parse_stream(tag);
    if (!s) throw Error(ErrorKind::kUsage, "unknown stream '" + std::string(tag) + "'");
    if (std::find(out.begin(), out.end(), *s) != out.end())
      throw Error(ErrorKind::kUsage, "stream listed twice: " + std::string(tag));
    out.push_back(*s);
    start = comma + 1;
  }
  return out;
}

std::string format_stream_list(const std::vector<Stream> &streams) {
  std::string s;
  for (Stream st : streams) s += (s.empty() ? "" : ",") + std::string(stream_tag(st));
  return s;
}

std::size_t stream_dim(Stream s) {
  switch (s) {
    case Stream::kMfcc:
    case Stream::kPlp:
    case Stream::kCgd:
      return kFilterCoeffs;
    case Stream::kSrc:
      return kSourceFeatureCount;
    case Stream::kSadjadi:
      return kSadjadiColumns.size();
    case Stream::kNew:
      return kNewColumns.size();
  }
  return 0;
}

std::vector<std::string> stream_column_names(Stream s) {
  std::vector<std::string> names;
  const auto &src = source_feature_names();
  switch (s) {
    case Stream::kSrc:
      for (auto n : src) names.emplace_back(n);
      break;
    case Stream::kSadjadi:
      for (auto c : kSadjadiColumns) names.emplace_back(src[c]);
      break;
    case Stream::kNew:
      for (auto c : kNewColumns) names.emplace_back(src[c]);
      break;
    default:
      for (std::size_t i = 0; i < kFilterCoeffs; ++i)
        names.push_back(std::string(stream_tag(s)) + "_" + std::to_string(i));
  }
  return names;
}

std::map<Stream, FeatureTrack> extract_streams(const Signal &signal,
                                               const std::vector<Stream> &streams,
                                               const FeatureConfig &config) {
  const auto wants = [&](Stream s) {
    return std::find(streams.begin(), streams.end(), s) != streams.end();
  };
  const bool need_source = wants(Stream::kSrc) || wants(Stream::kSadjadi) || wants(Stream::kNew);

  const FrameSequence frames =
      frame_signal(signal, config.frame_len_s, config.hop_s, FrameAlignment::kCentered);
  const std::size_t n = frames.n_frames;
  const int fs = signal.sample_rate_hz;
  const std::vector<double> hamming = window_coefficients(frames.frame_len, WindowKind::kHamming);

  std::optional<MfccComputer> mfcc_computer;
  std::optional<PlpComputer> plp_computer;
  std::optional<CgdComputer> cgd_computer;
  std::optional<SourceFeatureExtractor> source_extractor;
  if (wants(Stream::kMfcc)) mfcc_computer.emplace(fs, config.nfft, config.mfcc);
  if (wants(Stream::kPlp)) plp_computer.emplace(fs, config.nfft, config.plp);
  if (wants(Stream::kCgd)) cgd_computer.emplace(CgdOptions{config.cgd_rho, config.nfft});
  if (need_source) {
    SourceFeatureOptions so = config.source;
    so.nfft = config.nfft;
    source_extractor.emplace(fs, so);
  }

  FeatureTrack mfcc_track(n, kFilterCoeffs, config.hop_s, "MFCC");
  FeatureTrack plp_track(n, kFilterCoeffs, config.hop_s, "PLP");
  FeatureTrack cgd_track(n, kFilterCoeffs, config.hop_s, "CGD");
  FeatureTrack src_track(n, kSourceFeatureCount, config.hop_s, "SRC");

  std::vector<double> windowed(frames.frame_len);
  for (std::size_t t = 0; t < n; ++t) {
    const auto frame = frames.frame(t);
    for (std::size_t i = 0; i < frame.size(); ++i) windowed[i] = frame[i] * hamming[i];
    const Spectrum spec = magnitude_spectrum(windowed, fs, config.nfft);
    if (mfcc_computer) {
      const auto v = (*mfcc_computer)(spec);
      std::copy(v.coeffs.begin(), v.coeffs.end(), mfcc_track.row(t).begin());
    }
    if (plp_computer) {
      const auto v = (*plp_computer)(spec);
      std::copy(v.coeffs.begin(), v.coeffs.end(), plp_track.row(t).begin());
    }
    if (cgd_computer) {
      const auto v = (*cgd_computer)(windowed);
      std::copy(v.coeffs.begin(), v.coeffs.end(), cgd_track.row(t).begin());
    }
    if (source_extractor) {
      const auto v = (*source_extractor)(frame, windowed, spec).to_array();
      std::copy(v.begin(), v.end(), src_track.row(t).begin());
    }
  }

  std::map<Stream, FeatureTrack> out;
  for (Stream s : streams) {
    switch (s) {
      case Stream::kMfcc:
        out[s] = mfcc_track;
        break;
      case Stream::kPlp:
        out[s] = plp_track;
        break;
      case Stream::kCgd:
        out[s] = cgd_track;
        break;
      case Stream::kSrc:
        out[s] = src_track;
        break;
      case Stream::kSadjadi:
        out[s] = Columns(src_track, kSadjadiColumns, s);
        break;
      case Stream::kNew:
        out[s] = Columns(src_track, kNewColumns, s);
        break;
    }
  }
  return out;
}

}  // namespace vadfuse

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

#include "vadfuse/feature_io.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "vadfuse/common.h"

namespace vadfuse {
namespace {

void PutU32(std::vector<std::uint8_t> &out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t GetU32(const std::uint8_t *p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

std::vector<std::uint8_t> encode_feature_matrix(const FeatureTrack &track) {
  std::vector<std::uint8_t> out;
  out.reserve(20 + 4 * track.values.size());
  for (char c : {'V', 'A', 'D', 'F'}) out.push_back(static_cast<std::uint8_t>(c));
  PutU32(out, kFeatureFileVersion);
  PutU32(out, static_cast<std::uint32_t>(track.n_frames));
  PutU32(out, static_cast<std::uint32_t>(track.dim));
  PutU32(out, std::bit_cast<std::uint32_t>(static_cast<float>(track.hop_s * 1000.0)));
  for (double v : track.values) PutU32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

FeatureTrack decode_feature_matrix(const std::vector<std::uint8_t> &bytes) {
  if (bytes.size() < 20 || std::memcmp(bytes.data(), "VADF", 4) != 0)
    throw Error(ErrorKind::kFormat, ErrorCode::kMalformedHeader, "not a VADF feature file");
  const std::uint32_t version = GetU32(bytes.data() + 4);
  if (version != kFeatureFileVersion)
    throw Error(ErrorKind::kFormat, ErrorCode::kVersion,
                "feature file version " + std::to_string(version) + " not supported");
  const std::uint32_t n_frames = GetU32(bytes.data() + 8);
  const std::uint32_t dim = GetU32(bytes.data() + 12);
  const float hop_ms = std::bit_cast<float>(GetU32(bytes.data() + 16));
  const std::size_t count = static_cast<std::size_t>(n_frames) * dim;
  if (bytes.size() != 20 + 4 * count)
    throw Error(ErrorKind::kFormat, ErrorCode::kMalformedHeader, "feature file size mismatch");
  FeatureTrack t(n_frames, dim, hop_ms / 1000.0);
  for (std::size_t i = 0; i < count; ++i)
    t.values[i] = std::bit_cast<float>(GetU32(bytes.data() + 20 + 4 * i));
  return t;
}

void write_feature_file(const std::filesystem::path &path, const FeatureTrack &track) {
  const auto bytes = encode_feature_matrix(track);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char *>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::kIo, "short write to " + path.string());
}

FeatureTrack read_feature_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  FeatureTrack t = decode_feature_matrix(bytes);
  t.tag = path.stem().extension().string();
  if (!t.tag.empty() && t.tag[0] == '.') t.tag.erase(0, 1);
  return t;
}

void write_feature_csv(const std::filesystem::path &path, const FeatureTrack &track,
                       const std::vector<std::string> &column_names) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << "frame_index";
  for (std::size_t d = 0; d < track.dim; ++d)
    out << ',' << (d < column_names.size() ? column_names[d] : "c" + std::to_string(d));
  out << '\n';
  char buf[32];
  for (std::size_t t = 0; t < track.n_frames; ++t) {
    out << t;
    for (std::size_t d = 0; d < track.dim; ++d) {
      std::snprintf(buf, sizeof(buf), ",%.9g", static_cast<float>(track.at(t, d)));
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::kIo, "short write to " + path.string());
}

}  // namespace vadfuse

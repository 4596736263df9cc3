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

#include "vadfuse/model_io.h"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "json.hpp"
#include "vadfuse/common.h"

namespace vadfuse {
namespace {

class Writer {
 public:
  void U8(std::uint8_t v) { bytes_.push_back(v); }
  void U32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void U64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void F64(double v) { U64(std::bit_cast<std::uint64_t>(v)); }
  void F64s(const std::vector<double> &v) {
    for (double x : v) F64(x);
  }
  void Str(const std::string &s) {
    U32(static_cast<std::uint32_t>(s.size()));
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }
  std::vector<std::uint8_t> &bytes() { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  Reader(const std::uint8_t *data, std::size_t size) : data_(data), size_(size) {}

  std::uint8_t U8() {
    Need(1);
    return data_[pos_++];
  }
  std::uint32_t U32() {
    Need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_++]) << (8 * i);
    return v;
  }
  double F64() {
    Need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_++]) << (8 * i);
    return std::bit_cast<double>(v);
  }
  std::vector<double> F64s(std::size_t n) {
    Need(8 * n);
    std::vector<double> v(n);
    for (double &x : v) x = F64();
    return v;
  }
  std::string Str() {
    const std::uint32_t n = U32();
    Need(n);
    std::string s(reinterpret_cast<const char *>(data_ + pos_), n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == size_; }

 private:
  void Need(std::size_t n) const {
    if (size_ - pos_ < n)
      throw Error(ErrorKind::kFormat, ErrorCode::kMalformedHeader, "model file truncated");
  }
  const std::uint8_t *data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

std::uint32_t Crc32(const std::uint8_t *data, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  return static_cast<std::uint32_t>(crc32(crc, data, static_cast<uInt>(n)));
}

}  // namespace

std::vector<std::uint8_t> encode_system(const VadSystem &system) {
  Writer w;
  for (char c : {'V', 'A', 'D', 'M'}) w.U8(static_cast<std::uint8_t>(c));
  w.U32(kModelFileVersion);
  w.U8(system.mode == FusionMode::kFeature ? 0 : 1);
  w.U8(system.rule == FusionRule::kGeometric ? 0 : 1);
  w.U8(system.smooth_before_fusion ? 1 : 0);
  w.U8(0);
  w.F64(system.theta);
  w.U32(static_cast<std::uint32_t>(system.nets.size()));
  for (const MlpModel &m : system.nets) {
    w.U32(static_cast<std::uint32_t>(m.streams.size()));
    for (const auto &s : m.streams) w.Str(s);
    w.U32(static_cast<std::uint32_t>(m.norm.mean.size()));
    w.F64s(m.norm.mean);
    w.F64s(m.norm.stddev);
    w.U32(static_cast<std::uint32_t>(m.in_dim));
    w.U32(static_cast<std::uint32_t>(m.hidden));
    w.F64s(m.w1);
    w.F64s(m.b1);
    w.F64s(m.w2);
    w.F64(m.b2);
  }
  auto &bytes = w.bytes();
  w.U32(Crc32(bytes.data(), bytes.size()));
  return std::move(bytes);
}

VadSystem decode_system(const std::vector<std::uint8_t> &bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "VADM", 4) != 0)
    throw Error(ErrorKind::kFormat, ErrorCode::kMalformedHeader, "not a VADM model file");
  if (bytes.size() < 12)
    throw Error(ErrorKind::kFormat, ErrorCode::kChecksum, "model file checksum failure (truncated)");
  const std::size_t body = bytes.size() - 4;
  std::uint32_t stored = 0;
  for (int i = 0; i < 4; ++i) stored |= static_cast<std::uint32_t>(bytes[body + i]) << (8 * i);
  if (Crc32(bytes.data(), body) != stored)
    throw Error(ErrorKind::kFormat, ErrorCode::kChecksum, "model file checksum failure");

  Reader r(bytes.data() + 4, body - 4);
  const std::uint32_t version = r.U32();
  if (version != kModelFileVersion)
    throw Error(ErrorKind::kFormat, ErrorCode::kVersion,
                "model file version " + std::to_string(version) + ", expected " +
                    std::to_string(kModelFileVersion));
  VadSystem s;
  s.mode = r.U8() == 0 ? FusionMode::kFeature : FusionMode::kDecision;
  s.rule = r.U8() == 0 ? FusionRule::kGeometric : FusionRule::kArithmetic;
  s.smooth_before_fusion = r.U8() != 0;
  r.U8();
  s.theta = r.F64();
  const std::uint32_t n_nets = r.U32();
  for (std::uint32_t i = 0; i < n_nets; ++i) {
    MlpModel m;
    const std::uint32_t n_streams = r.U32();
    for (std::uint32_t k = 0; k < n_streams; ++k) m.streams.push_back(r.Str());
    const std::uint32_t dim = r.U32();
    m.norm.mean = r.F64s(dim);
    m.norm.stddev = r.F64s(dim);
    m.in_dim = r.U32();
    m.hidden = r.U32();
    m.w1 = r.F64s(m.in_dim * m.hidden);
    m.b1 = r.F64s(m.hidden);
    m.w2 = r.F64s(m.hidden);
    m.b2 = r.F64();
    s.nets.push_back(std::move(m));
  }
  if (!r.done())
    throw Error(ErrorKind::kFormat, ErrorCode::kMalformedHeader, "trailing bytes in model file");
  return s;
}

void save_system(const std::filesystem::path &path, const VadSystem &system) {
  const auto bytes = encode_system(system);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char *>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::kIo, "short write to " + path.string());
}

VadSystem load_system(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_system(bytes);
  } catch (const Error &e) {
    throw Error(e.kind(), e.code(), path.string() + ": " + e.what());
  }
}

void save_model(const std::filesystem::path &path, const MlpModel &model) {
  VadSystem s;
  s.mode = FusionMode::kFeature;
  s.nets.push_back(model);
  save_system(path, s);
}

MlpModel load_model(const std::filesystem::path &path) {
  VadSystem s = load_system(path);
  if (s.nets.size() != 1)
    throw Error(ErrorKind::kFormat, path.string() + ": holds " + std::to_string(s.nets.size()) +
                                        " networks, expected 1");
  return std::move(s.nets[0]);
}

std::string system_to_json(const VadSystem &system) {
  nlohmann::ordered_json j;
  j["format"] = "VADM";
  j["version"] = kModelFileVersion;
  j["fusion_mode"] = to_string(system.mode);
  j["fusion_rule"] = to_string(system.rule);
  j["smooth_before_fusion"] = system.smooth_before_fusion;
  j["theta"] = system.theta;
  j["nets"] = nlohmann::ordered_json::array();
  for (const MlpModel &m : system.nets) {
    nlohmann::ordered_json n;
    n["streams"] = m.streams;
    n["in_dim"] = m.in_dim;
    n["hidden"] = m.hidden;
    n["norm_mean"] = m.norm.mean;
    n["norm_stddev"] = m.norm.stddev;
    n["w1"] = m.w1;
    n["b1"] = m.b1;
    n["w2"] = m.w2;
    n["b2"] = m.b2;
    j["nets"].push_back(std::move(n));
  }
  return j.dump(2);
}

}  // namespace vadfuse

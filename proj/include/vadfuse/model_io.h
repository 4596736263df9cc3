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

// Model container.
//
// A VadSystem is one or more MlpModels plus how to combine them: a single
// network over concatenated streams (feature fusion, or a single stream) or
// one network per stream whose posteriors are merged (decision fusion).
//
// Binary layout, little-endian:
//   "VADM" | u32 version | u8 mode | u8 rule | u8 smooth_before_fusion | u8 0
//   | f64 theta | u32 n_nets | net[n_nets] | u32 crc32(all preceding bytes)
// net:
//   u32 n_streams | (u32 len, bytes)[n_streams]
//   | u32 dim | f64 mean[dim] | f64 stddev[dim]
//   | u32 in_dim | u32 hidden | f64 w1[hidden*in_dim] | f64 b1[hidden]
//   | f64 w2[hidden] | f64 b2

#ifndef VADFUSE_MODEL_IO_H_
#define VADFUSE_MODEL_IO_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vadfuse/fusion.h"
#include "vadfuse/mlp.h"

namespace vadfuse {

inline constexpr std::uint32_t kModelFileVersion = 1;

struct VadSystem {
  FusionMode mode = FusionMode::kDecision;
  FusionRule rule = FusionRule::kGeometric;
  // Smooth each network's posteriors before merging instead of smoothing the
  // merged track.
  bool smooth_before_fusion = false;
  double theta = 0.5;
  std::vector<MlpModel> nets;

  bool operator==(const VadSystem &) const = default;
};

std::vector<std::uint8_t> encode_system(const VadSystem &system);
// Throws Error(kFormat) with kChecksum / kVersion / kMalformedHeader.
VadSystem decode_system(const std::vector<std::uint8_t> &bytes);

void save_system(const std::filesystem::path &path, const VadSystem &system);
VadSystem load_system(const std::filesystem::path &path);

// Single-network convenience wrappers.
void save_model(const std::filesystem::path &path, const MlpModel &model);
MlpModel load_model(const std::filesystem::path &path);

// Human-readable dump; not accepted by load_system.
std::string system_to_json(const VadSystem &system);

}  // namespace vadfuse

#endif  // VADFUSE_MODEL_IO_H_

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

// Feature matrix files.
//
// Binary layout (little-endian):
//   "VADF" | u32 version | u32 n_frames | u32 dim | f32 hop_ms | f32 values[n_frames * dim]
// Values are row-major. The stream tag is carried by the file name.

#ifndef VADFUSE_FEATURE_IO_H_
#define VADFUSE_FEATURE_IO_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vadfuse/pipeline.h"

namespace vadfuse {

inline constexpr std::uint32_t kFeatureFileVersion = 1;

std::vector<std::uint8_t> encode_feature_matrix(const FeatureTrack &track);
FeatureTrack decode_feature_matrix(const std::vector<std::uint8_t> &bytes);

void write_feature_file(const std::filesystem::path &path, const FeatureTrack &track);
FeatureTrack read_feature_file(const std::filesystem::path &path);

// "frame_index,<name_0>,...": one row per frame, %.9g values.
void write_feature_csv(const std::filesystem::path &path, const FeatureTrack &track,
                       const std::vector<std::string> &column_names);

}  // namespace vadfuse

#endif  // VADFUSE_FEATURE_IO_H_

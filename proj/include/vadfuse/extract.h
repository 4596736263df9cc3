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

// Frame-synchronous extraction of every feature stream from one signal.

#ifndef VADFUSE_EXTRACT_H_
#define VADFUSE_EXTRACT_H_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vadfuse/audio.h"
#include "vadfuse/filter_features.h"
#include "vadfuse/pipeline.h"
#include "vadfuse/source_features.h"

namespace vadfuse {

// SRC holds all eleven source scalars; SADJADI (harmonicity, clarity, LP
// error, HPS) and NEW (CPP, SRH, SRH*) are column subsets of it.
enum class Stream { kMfcc, kPlp, kCgd, kSrc, kSadjadi, kNew };

std::string_view stream_tag(Stream s);
std::optional<Stream> parse_stream(std::string_view tag);
// Comma-separated tags, e.g. "MFCC,SADJADI,NEW". Throws Error(kUsage).
std::vector<Stream> parse_stream_list(std::string_view list);
std::string format_stream_list(const std::vector<Stream> &streams);

std::size_t stream_dim(Stream s);
std::vector<std::string> stream_column_names(Stream s);

struct FeatureConfig {
  double frame_len_s = kDefaultFrameSeconds;
  double hop_s = kDefaultHopSeconds;
  std::size_t nfft = kDefaultNfft;
  MfccOptions mfcc;
  PlpOptions plp;
  double cgd_rho = 1.12;
  SourceFeatureOptions source;
};

// Frames are centred at t * hop (FrameAlignment::kCentered) so feature row t
// matches label t. Every returned track has the same number of rows.
std::map<Stream, FeatureTrack> extract_streams(const Signal &signal,
                                               const std::vector<Stream> &streams,
                                               const FeatureConfig &config = {});

}  // namespace vadfuse

#endif  // VADFUSE_EXTRACT_H_

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

// Training and inference of a complete VadSystem from per-stream feature
// tracks: dev split, per-network normalization, posterior fusion.

#ifndef VADFUSE_DETECTOR_H_
#define VADFUSE_DETECTOR_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "vadfuse/audio.h"
#include "vadfuse/extract.h"
#include "vadfuse/fusion.h"
#include "vadfuse/mlp.h"
#include "vadfuse/model_io.h"
#include "vadfuse/pipeline.h"

namespace vadfuse {

using StreamTracks = std::map<Stream, FeatureTrack>;

struct LabeledUtterance {
  StreamTracks features;
  LabelTrack labels;
  std::string condition;
};

inline constexpr double kDefaultDevFraction = 0.05;

struct SystemSpec {
  std::vector<Stream> streams{Stream::kMfcc, Stream::kSadjadi, Stream::kNew};
  FusionMode mode = FusionMode::kDecision;
  FusionRule rule = FusionRule::kGeometric;
  bool smooth_before_fusion = false;
  double theta = 0.5;
  std::size_t hidden = kHiddenUnits;
  PipelineOptions pipeline;
  TrainConfig train;
  // Share of files held out for early stopping. With a single file the last
  // frames are held out instead.
  double dev_fraction = kDefaultDevFraction;
};

struct SystemTrainReport {
  std::vector<TrainHistory> histories;  // one per network
  std::size_t train_frames = 0;
  std::size_t dev_frames = 0;
};

// Feature mode: one network over all streams concatenated in order.
// Decision mode: one network per stream.
VadSystem train_system(std::span<const LabeledUtterance> data, const SystemSpec &spec,
                       SystemTrainReport *report = nullptr);

// Unsmoothed posteriors of each network.
std::vector<PosteriorTrack> network_posteriors(const VadSystem &system,
                                               const StreamTracks &features,
                                               const PipelineOptions &pipeline = {});

// Fused posteriors, median smoothed either per network before fusion or
// once after it, as the system specifies.
PosteriorTrack system_posteriors(const VadSystem &system, const StreamTracks &features,
                                 const PipelineOptions &pipeline = {},
                                 int median_width = kMedianWidth);

// Streams a system needs as input, in first-use order.
std::vector<Stream> required_streams(const VadSystem &system);

}  // namespace vadfuse

#endif  // VADFUSE_DETECTOR_H_

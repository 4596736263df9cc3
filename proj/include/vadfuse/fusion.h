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

// Posterior-level fusion and frame decision post-processing: geometric or
// arithmetic merging of per-stream posteriors, median smoothing,
// thresholding, and the closing-plus-extension hangover.

#ifndef VADFUSE_FUSION_H_
#define VADFUSE_FUSION_H_

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "vadfuse/audio.h"
#include "vadfuse/pipeline.h"

namespace vadfuse {

inline constexpr double kPosteriorFloor = 1e-6;
inline constexpr double kHangoverCloseMs = 600.0;
inline constexpr double kHangoverExtendMs = 200.0;

struct PosteriorTrack {
  std::vector<double> p;
  double hop_s = 0.010;

  std::size_t size() const { return p.size(); }
};

// Feature fusion concatenates streams into one classifier; decision fusion
// trains one classifier per stream and merges their posteriors.
enum class FusionMode { kFeature, kDecision };
enum class FusionRule { kGeometric, kArithmetic };

std::string_view to_string(FusionMode m);
std::string_view to_string(FusionRule r);
std::optional<FusionMode> parse_fusion_mode(std::string_view s);
std::optional<FusionRule> parse_fusion_rule(std::string_view s);

// Clamps to [kPosteriorFloor, 1 - kPosteriorFloor].
double floor_posterior(double p);

// Per frame: exp(mean log p_i) or mean p_i over floored inputs.
PosteriorTrack fuse_posteriors(std::span<const PosteriorTrack> tracks,
                               FusionRule rule = FusionRule::kGeometric);

PosteriorTrack smooth_posteriors(const PosteriorTrack &track, int width = kMedianWidth);

// label = 1 iff p >= theta.
LabelTrack threshold(const PosteriorTrack &track, double theta);

struct HangoverOptions {
  double close_ms = kHangoverCloseMs;
  double extend_ms = kHangoverExtendMs;
};

// Morphological closing with a flat element of round(close_ms / hop) frames
// (fills interior gaps shorter than the element), then every speech run is
// extended by round(extend_ms / hop) frames on each side.
LabelTrack hangover(const LabelTrack &labels, const HangoverOptions &opts = {});

struct DecisionOptions {
  int median_width = kMedianWidth;
  double theta = 0.5;
  HangoverOptions hangover;
};

// threshold + hangover on an already smoothed posterior track.
LabelTrack decide(const PosteriorTrack &smoothed, const DecisionOptions &opts);

}  // namespace vadfuse

#endif  // VADFUSE_FUSION_H_

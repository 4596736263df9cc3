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

#include "vadfuse/fusion.h"

#include <algorithm>
#include <cmath>

#include "vadfuse/common.h"
#include "vadfuse/dsp.h"

namespace vadfuse {

std::string_view to_string(FusionMode m) {
  return m == FusionMode::kFeature ? "feature" : "decision";
}

std::string_view to_string(FusionRule r) {
  return r == FusionRule::kGeometric ? "geometric" : "arithmetic";
}

std::optional<FusionMode> parse_fusion_mode(std::string_view s) {
  if (s == "feature") return FusionMode::kFeature;
  if (s == "decision") return FusionMode::kDecision;
  return std::nullopt;
}

std::optional<FusionRule> parse_fusion_rule(std::string_view s) {
  if (s == "geometric") return FusionRule::kGeometric;
  if (s == "arithmetic") return FusionRule::kArithmetic;
  return std::nullopt;
}

double floor_posterior(double p) {
  return std::clamp(p, kPosteriorFloor, 1.0 - kPosteriorFloor);
}

PosteriorTrack fuse_posteriors(std::span<const PosteriorTrack> tracks, FusionRule rule) {
  if (tracks.empty()) throw Error(ErrorKind::kUsage, "fuse_posteriors: no tracks");
  for (const auto &t : tracks)
    if (t.size() != tracks[0].size())
      throw Error(ErrorKind::kData, ErrorCode::kLengthMismatch,
                  "fuse_posteriors: length mismatch (" + std::to_string(tracks[0].size()) +
                      " vs " + std::to_string(t.size()) + ")");
  PosteriorTrack out;
  out.hop_s = tracks[0].hop_s;
  out.p.resize(tracks[0].size());
  const double inv = 1.0 / static_cast<double>(tracks.size());
  for (std::size_t f = 0; f < out.p.size(); ++f) {
    double acc = 0.0;
    if (rule == FusionRule::kGeometric) {
      for (const auto &t : tracks) acc += std::log(floor_posterior(t.p[f]));
      out.p[f] = std::exp(acc * inv);
    } else {
      for (const auto &t : tracks) acc += floor_posterior(t.p[f]);
      out.p[f] = acc * inv;
    }
  }
  return out;
}

PosteriorTrack smooth_posteriors(const PosteriorTrack &track, int width) {
  return {running_median(track.p, width), track.hop_s};
}

LabelTrack threshold(const PosteriorTrack &track, double theta) {
  LabelTrack out;
  out.hop_s = track.hop_s;
  out.labels.resize(track.size());
  for (std::size_t f = 0; f < track.size(); ++f) out.labels[f] = track.p[f] >= theta;
  return out;
}

LabelTrack hangover(const LabelTrack &labels, const HangoverOptions &opts) {
  const double hop_ms = labels.hop_s * 1000.0;
  const auto element = static_cast<std::size_t>(std::llround(opts.close_ms / hop_ms));
  const auto extend = static_cast<std::size_t>(std::llround(opts.extend_ms / hop_ms));

  LabelTrack out = labels;
  auto &l = out.labels;
  const std::size_t n = l.size();

  // Closing: background runs shorter than the element vanish unless they
  // touch a track edge (the outside counts as background).
  std::size_t t = 0;
  while (t < n && !l[t]) ++t;
  while (t < n) {
    while (t < n && l[t]) ++t;
    const std::size_t gap = t;
    while (t < n && !l[t]) ++t;
    if (t < n && t - gap < element) std::fill(l.begin() + gap, l.begin() + t, 1);
  }

  if (extend == 0) return out;
  std::vector<std::uint8_t> extended(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!l[i]) continue;
    const std::size_t lo = i >= extend ? i - extend : 0;
    const std::size_t hi = std::min(n, i + extend + 1);
    std::fill(extended.begin() + lo, extended.begin() + hi, 1);
  }
  out.labels = std::move(extended);
  return out;
}

LabelTrack decide(const PosteriorTrack &smoothed, const DecisionOptions &opts) {
  return hangover(threshold(smoothed, opts.theta), opts.hangover);
}

}  // namespace vadfuse

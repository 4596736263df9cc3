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

// Per-stream trajectory post-processing before classification: median
// smoothing, backward-difference deltas, and z-normalization.

#ifndef VADFUSE_PIPELINE_H_
#define VADFUSE_PIPELINE_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace vadfuse {

inline constexpr int kMedianWidth = 11;
inline constexpr int kDeltaContext = 10;
inline constexpr double kStddevFloor = 1e-6;

// n_frames x dim matrix of one feature stream (or a concatenation of several).
struct FeatureTrack {
  std::size_t n_frames = 0;
  std::size_t dim = 0;
  std::vector<double> values;  // row-major
  double hop_s = 0.010;
  std::string tag;

  FeatureTrack() = default;
  FeatureTrack(std::size_t frames, std::size_t d, double hop, std::string stream_tag = {})
      : n_frames(frames), dim(d), values(frames * d, 0.0), hop_s(hop), tag(std::move(stream_tag)) {}

  std::span<const double> row(std::size_t t) const { return {values.data() + t * dim, dim}; }
  std::span<double> row(std::size_t t) { return {values.data() + t * dim, dim}; }
  double &at(std::size_t t, std::size_t d) { return values[t * dim + d]; }
  double at(std::size_t t, std::size_t d) const { return values[t * dim + d]; }
  std::vector<double> column(std::size_t d) const;
};

struct NormStats {
  std::vector<double> mean;
  std::vector<double> stddev;  // population convention, floored at kStddevFloor

  bool operator==(const NormStats &) const = default;
};

struct PipelineOptions {
  int median_width = kMedianWidth;
  int delta_context = kDeltaContext;
};

// Per-dimension running median, edges replicate-padded.
FeatureTrack median_smooth(const FeatureTrack &track, int width = kMedianWidth);

// x'_t = (1/N) sum_{i=1..N} (x_t - x_{t-i}), with x_{t-i} := x_0 before the
// start of the track.
FeatureTrack deltas(const FeatureTrack &track, int context = kDeltaContext);

// median_smooth, then [static | delta | delta-delta] (3 x dim columns).
FeatureTrack expand_stream(const FeatureTrack &track, const PipelineOptions &opts = {});

// Column-wise concatenation in the given order. Frame counts and hops must
// agree.
FeatureTrack concat_tracks(std::span<const FeatureTrack> tracks);

NormStats fit_norm_stats(std::span<const FeatureTrack> tracks);
void normalize_in_place(FeatureTrack &track, const NormStats &stats);

// expand_stream on every track, concat_tracks, then normalize with `stats`.
FeatureTrack assemble(std::span<const FeatureTrack> tracks, const NormStats &stats,
                      const PipelineOptions &opts = {});
// As above without normalization; used to fit the statistics.
FeatureTrack assemble_raw(std::span<const FeatureTrack> tracks, const PipelineOptions &opts = {});

}  // namespace vadfuse

#endif  // VADFUSE_PIPELINE_H_

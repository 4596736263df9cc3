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

#include "vadfuse/pipeline.h"

#include <algorithm>
#include <cmath>

#include "vadfuse/common.h"
#include "vadfuse/dsp.h"

namespace vadfuse {

std::vector<double> FeatureTrack::column(std::size_t d) const {
  std::vector<double> c(n_frames);
  for (std::size_t t = 0; t < n_frames; ++t) c[t] = at(t, d);
  return c;
}

FeatureTrack median_smooth(const FeatureTrack &track, int width) {
  FeatureTrack out = track;
  for (std::size_t d = 0; d < track.dim; ++d) {
    const auto smoothed = running_median(track.column(d), width);
    for (std::size_t t = 0; t < track.n_frames; ++t) out.at(t, d) = smoothed[t];
  }
  return out;
}

FeatureTrack deltas(const FeatureTrack &track, int context) {
  if (context < 1) throw Error(ErrorKind::kUsage, "deltas: context must be >= 1");
  FeatureTrack out(track.n_frames, track.dim, track.hop_s, track.tag);
  const double inv = 1.0 / context;
  for (std::size_t t = 0; t < track.n_frames; ++t) {
    for (std::size_t d = 0; d < track.dim; ++d) {
      const double x = track.at(t, d);
      double acc = 0.0;
      for (int i = 1; i <= context; ++i) {
        const std::size_t past = t >= static_cast<std::size_t>(i) ? t - i : 0;
        acc += x - track.at(past, d);
      }
      out.at(t, d) = inv * acc;
    }
  }
  return out;
}

FeatureTrack expand_stream(const FeatureTrack &track, const PipelineOptions &opts) {
  const FeatureTrack smooth = median_smooth(track, opts.median_width);
  const FeatureTrack d1 = deltas(smooth, opts.delta_context);
  const FeatureTrack d2 = deltas(d1, opts.delta_context);
  FeatureTrack out(track.n_frames, 3 * track.dim, track.hop_s, track.tag);
  for (std::size_t t = 0; t < track.n_frames; ++t) {
    auto row = out.row(t);
    std::copy_n(smooth.row(t).begin(), track.dim, row.begin());
    std::copy_n(d1.row(t).begin(), track.dim, row.begin() + track.dim);
    std::copy_n(d2.row(t).begin(), track.dim, row.begin() + 2 * track.dim);
  }
  return out;
}

FeatureTrack concat_tracks(std::span<const FeatureTrack> tracks) {
  if (tracks.empty()) return {};
  std::size_t dim = 0;
  std::string tag;
  for (const auto &t : tracks) {
    if (t.n_frames != tracks[0].n_frames || std::fabs(t.hop_s - tracks[0].hop_s) > 1e-12)
      throw Error(ErrorKind::kData, ErrorCode::kLengthMismatch,
                  "frame-count mismatch between streams " + tracks[0].tag + " (" +
                      std::to_string(tracks[0].n_frames) + ") and " + t.tag + " (" +
                      std::to_string(t.n_frames) + ")");
    dim += t.dim;
    tag += (tag.empty() ? "" : "+") + t.tag;
  }
  FeatureTrack out(tracks[0].n_frames, dim, tracks[0].hop_s, tag);
  for (std::size_t f = 0; f < out.n_frames; ++f) {
    auto dst = out.row(f).begin();
    for (const auto &t : tracks) dst = std::copy_n(t.row(f).begin(), t.dim, dst);
  }
  return out;
}

NormStats fit_norm_stats(std::span<const FeatureTrack> tracks) {
  std::size_t frames = 0;
  for (const auto &t : tracks) frames += t.n_frames;
  if (tracks.empty() || frames == 0)
    throw Error(ErrorKind::kData, ErrorCode::kDegenerateInput, "fit_norm_stats: empty input");
  const std::size_t dim = tracks[0].dim;
  NormStats s;
  s.mean.assign(dim, 0.0);
  s.stddev.assign(dim, 0.0);
  for (const auto &t : tracks) {
    if (t.dim != dim)
      throw Error(ErrorKind::kData, ErrorCode::kDimensionMismatch, "fit_norm_stats: dim mismatch");
    for (std::size_t f = 0; f < t.n_frames; ++f)
      for (std::size_t d = 0; d < dim; ++d) s.mean[d] += t.at(f, d);
  }
  for (double &m : s.mean) m /= static_cast<double>(frames);
  for (const auto &t : tracks)
    for (std::size_t f = 0; f < t.n_frames; ++f)
      for (std::size_t d = 0; d < dim; ++d) {
        const double c = t.at(f, d) - s.mean[d];
        s.stddev[d] += c * c;
      }
  for (double &v : s.stddev) v = std::max(std::sqrt(v / static_cast<double>(frames)), kStddevFloor);
  return s;
}

void normalize_in_place(FeatureTrack &track, const NormStats &stats) {
  if (stats.mean.size() != track.dim || stats.stddev.size() != track.dim)
    throw Error(ErrorKind::kData, ErrorCode::kDimensionMismatch,
                "normalize: stats have " + std::to_string(stats.mean.size()) +
                    " dims, track has " + std::to_string(track.dim));
  for (std::size_t f = 0; f < track.n_frames; ++f)
    for (std::size_t d = 0; d < track.dim; ++d) {
      double &v = track.at(f, d);
      v = (v - stats.mean[d]) / std::max(stats.stddev[d], kStddevFloor);
    }
}

FeatureTrack assemble_raw(std::span<const FeatureTrack> tracks, const PipelineOptions &opts) {
  std::vector<FeatureTrack> expanded;
  expanded.reserve(tracks.size());
  for (const auto &t : tracks) expanded.push_back(expand_stream(t, opts));
  return concat_tracks(expanded);
}

FeatureTrack assemble(std::span<const FeatureTrack> tracks, const NormStats &stats,
                      const PipelineOptions &opts) {
  FeatureTrack out = assemble_raw(tracks, opts);
  normalize_in_place(out, stats);
  return out;
}

}  // namespace vadfuse

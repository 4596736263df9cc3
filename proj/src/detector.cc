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

#include "vadfuse/detector.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "vadfuse/common.h"

namespace vadfuse {
namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

const FeatureTrack &find_stream(const StreamTracks &features, Stream s) {
  auto it = features.find(s);
  if (it == features.end())
    throw Error(ErrorKind::kData, ErrorCode::kDimensionMismatch,
                "missing feature stream " + std::string(stream_tag(s)));
  return it->second;
}

std::vector<FeatureTrack> gather(const StreamTracks &features, std::span<const Stream> streams) {
  std::vector<FeatureTrack> out;
  for (Stream s : streams) out.push_back(find_stream(features, s));
  return out;
}

std::vector<Stream> net_streams(const MlpModel &net) {
  std::vector<Stream> out;
  for (const std::string &tag : net.streams) {
    auto s = parse_stream(tag);
    if (!s) throw Error(ErrorKind::kFormat, ErrorCode::kMalformedHeader, "unknown stream tag " + tag);
    out.push_back(*s);
  }
  return out;
}

// Row range [begin, end) of one utterance taking part in a split.
struct Piece {
  std::size_t utt;
  std::size_t begin;
  std::size_t end;
};

// Every utterance contributes one seeded contiguous block of dev frames, so
// the dev set covers every recording condition.
void split_dev(std::span<const LabeledUtterance> data, double fraction, std::uint64_t seed,
               std::vector<Piece> &train, std::vector<Piece> &dev) {
  const std::size_t n = data.size();
  if (fraction <= 0.0) {
    for (std::size_t i = 0; i < n; ++i) train.push_back({i, 0, data[i].labels.size()});
    dev = train;
    return;
  }
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t frames = data[i].labels.size();
    if (frames < 2) {
      train.push_back({i, 0, frames});
      continue;
    }
    std::size_t n_dev = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(frames)));
    n_dev = std::clamp<std::size_t>(n_dev, 1, frames - 1);
    const std::size_t at = static_cast<std::size_t>(rng() % (frames - n_dev + 1));
    if (at > 0) train.push_back({i, 0, at});
    dev.push_back({i, at, at + n_dev});
    if (at + n_dev < frames) train.push_back({i, at + n_dev, frames});
  }
  if (dev.empty()) dev = train;
}

Dataset build_dataset(std::span<const FeatureTrack> assembled, std::span<const LabeledUtterance> data,
                      std::span<const Piece> pieces) {
  Dataset ds;
  const std::size_t dim = assembled.empty() ? 0 : assembled[0].dim;
  std::size_t rows = 0;
  for (const Piece &p : pieces) rows += p.end - p.begin;
  ds.x = FeatureTrack(rows, dim, assembled.empty() ? 0.010 : assembled[0].hop_s);
  ds.y.reserve(rows);
  std::size_t r = 0;
  for (const Piece &p : pieces) {
    const FeatureTrack &src = assembled[p.utt];
    std::copy(src.values.begin() + static_cast<std::ptrdiff_t>(p.begin * dim),
              src.values.begin() + static_cast<std::ptrdiff_t>(p.end * dim),
              ds.x.values.begin() + static_cast<std::ptrdiff_t>(r * dim));
    r += p.end - p.begin;
    const auto &lab = data[p.utt].labels.labels;
    ds.y.insert(ds.y.end(), lab.begin() + static_cast<std::ptrdiff_t>(p.begin),
                lab.begin() + static_cast<std::ptrdiff_t>(p.end));
  }
  return ds;
}

MlpModel train_net(std::span<const LabeledUtterance> data, std::span<const Stream> streams,
                   const SystemSpec &spec, std::span<const Piece> train_pieces,
                   std::span<const Piece> dev_pieces, std::uint64_t net_index,
                   SystemTrainReport *report) {
  std::vector<FeatureTrack> raw;
  raw.reserve(data.size());
  for (const LabeledUtterance &u : data) {
    raw.push_back(assemble_raw(gather(u.features, streams), spec.pipeline));
    if (raw.back().n_frames != u.labels.size())
      throw Error(ErrorKind::kData, ErrorCode::kLengthMismatch,
                  "frame-count mismatch between features (" + std::to_string(raw.back().n_frames) +
                      ") and labels (" + std::to_string(u.labels.size()) + ")");
  }

  // Statistics from training rows only.
  std::vector<FeatureTrack> fit_rows;
  {
    const Dataset tmp = build_dataset(raw, data, train_pieces);
    fit_rows.push_back(tmp.x);
  }
  const NormStats stats = fit_norm_stats(fit_rows);
  fit_rows.clear();
  for (FeatureTrack &t : raw) normalize_in_place(t, stats);

  const Dataset train_set = build_dataset(raw, data, train_pieces);
  const Dataset dev_set = build_dataset(raw, data, dev_pieces);
  raw.clear();

  MlpModel init = init_mlp(train_set.x.dim, spec.hidden, derive_seed(spec.train.seed, 2 * net_index));
  TrainConfig tc = spec.train;
  tc.seed = derive_seed(spec.train.seed, 2 * net_index + 1);
  TrainResult result = train(init, train_set, dev_set, tc);
  result.model.norm = stats;
  for (Stream s : streams) result.model.streams.emplace_back(stream_tag(s));
  if (report) {
    report->histories.push_back(std::move(result.history));
    report->train_frames = train_set.y.size();
    report->dev_frames = dev_set.y.size();
  }
  return std::move(result.model);
}

}  // namespace

VadSystem train_system(std::span<const LabeledUtterance> data, const SystemSpec &spec,
                       SystemTrainReport *report) {
  if (data.empty()) throw Error(ErrorKind::kData, ErrorCode::kDegenerateLabels, "no training data");
  if (spec.streams.empty()) throw Error(ErrorKind::kUsage, "no feature streams selected");

  std::vector<Piece> train_pieces, dev_pieces;
  split_dev(data, spec.dev_fraction, derive_seed(spec.train.seed, 0xde5), train_pieces, dev_pieces);

  VadSystem system;
  system.mode = spec.mode;
  system.rule = spec.rule;
  system.smooth_before_fusion = spec.smooth_before_fusion;
  system.theta = spec.theta;
  if (spec.mode == FusionMode::kFeature) {
    system.nets.push_back(train_net(data, spec.streams, spec, train_pieces, dev_pieces, 0, report));
  } else {
    for (std::size_t k = 0; k < spec.streams.size(); ++k) {
      const Stream one[1] = {spec.streams[k]};
      system.nets.push_back(train_net(data, one, spec, train_pieces, dev_pieces, k, report));
    }
  }
  return system;
}

std::vector<PosteriorTrack> network_posteriors(const VadSystem &system,
                                               const StreamTracks &features,
                                               const PipelineOptions &pipeline) {
  std::vector<PosteriorTrack> out;
  for (const MlpModel &net : system.nets) {
    const std::vector<Stream> streams = net_streams(net);
    const FeatureTrack x = assemble(gather(features, streams), net.norm, pipeline);
    if (x.dim != net.in_dim)
      throw Error(ErrorKind::kData, ErrorCode::kDimensionMismatch,
                  "feature dimension " + std::to_string(x.dim) + " does not match model input " +
                      std::to_string(net.in_dim));
    out.push_back({forward_track(net, x), x.hop_s});
  }
  return out;
}

PosteriorTrack system_posteriors(const VadSystem &system, const StreamTracks &features,
                                 const PipelineOptions &pipeline, int median_width) {
  std::vector<PosteriorTrack> tracks = network_posteriors(system, features, pipeline);
  if (tracks.empty()) throw Error(ErrorKind::kData, ErrorCode::kDimensionMismatch, "model holds no networks");
  if (system.smooth_before_fusion) {
    for (PosteriorTrack &t : tracks) t = smooth_posteriors(t, median_width);
    return tracks.size() == 1 ? tracks[0] : fuse_posteriors(tracks, system.rule);
  }
  const PosteriorTrack fused = tracks.size() == 1 ? tracks[0] : fuse_posteriors(tracks, system.rule);
  return smooth_posteriors(fused, median_width);
}

std::vector<Stream> required_streams(const VadSystem &system) {
  std::vector<Stream> out;
  for (const MlpModel &net : system.nets)
    for (Stream s : net_streams(net))
      if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
  return out;
}

}  // namespace vadfuse

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

// Detection metrics: histogram-based normalized mutual information, frame-level
// ROC and equal error rate, utterance-level precision/recall/F1 over
// segments, and decision threshold tuning.

#ifndef VADFUSE_EVALUATION_H_
#define VADFUSE_EVALUATION_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vadfuse/audio.h"
#include "vadfuse/fusion.h"

namespace vadfuse {

inline constexpr int kMiBins = 50;
inline constexpr double kCollarSeconds = 0.200;

// I(X; C) / H(C) with X quantized into `bins` equal-width bins over its
// observed range. Throws Error(kDegenerateLabels) if only one class occurs.
double nmi(std::span<const double> feature, std::span<const std::uint8_t> labels,
           int bins = kMiBins);

// Column layout of an assembled (static | delta | delta-delta) feature set.
struct FeatureGroup {
  std::string name;        // e.g. "MFCC" or "srh_star"
  std::size_t offset = 0;  // first static column
  std::size_t dim = 1;     // scalars per scope
  std::size_t stride = 0;  // columns between scopes; 0 means dim
};

struct MiEntry {
  std::string feature;
  std::string scope;  // "static", "delta", "delta2" or "all"
  double nmi = 0.0;
};

struct MiReport {
  std::vector<MiEntry> entries;
  std::vector<double> per_column;  // NMI of every input column
};

// Per-column NMI, averaged over the coefficients of each group (per scope)
// and then over the three scopes ("all").
MiReport nmi_grouped(const FeatureTrack &assembled, std::span<const FeatureGroup> groups,
                     std::span<const std::uint8_t> labels, int bins = kMiBins);

struct RocPoint {
  double theta = 0.0;
  double far = 0.0;  // false accepts / non-speech frames
  double frr = 0.0;  // false rejects / speech frames
  std::size_t false_accepts = 0;
  std::size_t false_rejects = 0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // ascending theta
  std::size_t n_speech = 0;
  std::size_t n_nonspeech = 0;
};

// Accept iff p >= theta; theta sweeps every distinct posterior plus 0 and 1.
RocCurve roc(std::span<const double> posteriors, std::span<const std::uint8_t> labels);

struct EerPoint {
  double eer = 0.0;
  double theta = 0.0;
};

// Linear interpolation where far - frr changes sign.
EerPoint eer_point(const RocCurve &curve);
inline double eer(const RocCurve &curve) { return eer_point(curve).eer; }

struct F1Result {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t n_ref = 0;
  std::size_t n_hyp = 0;
  std::size_t matched = 0;
};

// A reference segment is detected by the first unused hypothesis segment
// (in time order) whose start and end both lie within +-collar_s of its own.
F1Result f1_utterance(const SegmentList &hyp, const SegmentList &ref,
                      double collar_s = kCollarSeconds);
// Pools counts from several utterances.
F1Result f1_from_counts(std::size_t n_ref, std::size_t n_hyp, std::size_t matched);

enum class TuneObjective { kEer, kF1 };

struct Utterance {
  PosteriorTrack posteriors;  // fused and median smoothed
  LabelTrack labels;
};

struct TuneOptions {
  DecisionOptions decision;  // theta is ignored
  double collar_s = kCollarSeconds;
};

// EER: theta at the interpolated EER point of the pooled posteriors.
// F1: grid theta = 0.01..0.99; threshold, hangover and segmentation per
// candidate, pooled counts; ties go to the smallest theta. Smoothing does not
// depend on theta and is expected to be done already.
double tune_threshold(std::span<const Utterance> dev, TuneObjective objective,
                      const TuneOptions &opts = {});

// Pooled F1 at one theta (threshold, hangover, segmentation).
F1Result evaluate_f1(std::span<const Utterance> utterances, double theta,
                     const TuneOptions &opts = {});

}  // namespace vadfuse

#endif  // VADFUSE_EVALUATION_H_

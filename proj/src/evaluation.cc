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

#include "vadfuse/evaluation.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vadfuse/common.h"

namespace vadfuse {
namespace {

void RequireBothClasses(std::size_t pos, std::size_t neg, const char *who) {
  if (pos == 0 || neg == 0)
    throw Error(ErrorKind::kData, ErrorCode::kDegenerateLabels,
                std::string(who) + ": degenerate labels (only one class present)");
}

}  // namespace

double nmi(std::span<const double> feature, std::span<const std::uint8_t> labels, int bins) {
  if (feature.size() != labels.size())
    throw Error(ErrorKind::kData, ErrorCode::kLengthMismatch, "nmi: length mismatch");
  if (bins < 1) throw Error(ErrorKind::kUsage, "nmi: bins must be >= 1");
  const std::size_t n = feature.size();
  std::size_t pos = 0;
  for (auto l : labels) pos += l != 0;
  RequireBothClasses(pos, n - pos, "nmi");

  const auto [lo_it, hi_it] = std::minmax_element(feature.begin(), feature.end());
  const double lo = *lo_it, range = *hi_it - *lo_it;
  std::vector<double> joint(2 * static_cast<std::size_t>(bins), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    int b = 0;
    if (range > 0.0) b = std::min(bins - 1, static_cast<int>((feature[i] - lo) / range * bins));
    joint[2 * static_cast<std::size_t>(b) + (labels[i] != 0)] += 1.0;
  }

  const double total = static_cast<double>(n);
  const double pc[2] = {static_cast<double>(n - pos) / total, static_cast<double>(pos) / total};
  const double h_c = -(pc[0] * std::log(pc[0]) + pc[1] * std::log(pc[1]));
  double mi = 0.0;
  for (int b = 0; b < bins; ++b) {
    const double px = (joint[2 * b] + joint[2 * b + 1]) / total;
    for (int c = 0; c < 2; ++c) {
      const double pxc = joint[2 * b + c] / total;
      if (pxc > 0.0) mi += pxc * std::log(pxc / (px * pc[c]));
    }
  }
  return std::clamp(mi / h_c, 0.0, 1.0);
}

MiReport nmi_grouped(const FeatureTrack &assembled, std::span<const FeatureGroup> groups,
                     std::span<const std::uint8_t> labels, int bins) {
  MiReport report;
  report.per_column.resize(assembled.dim);
  for (std::size_t d = 0; d < assembled.dim; ++d)
    report.per_column[d] = nmi(assembled.column(d), labels, bins);

  static constexpr const char *kScopes[3] = {"static", "delta", "delta2"};
  for (const FeatureGroup &g : groups) {
    const std::size_t stride = g.stride == 0 ? g.dim : g.stride;
    double all = 0.0;
    for (std::size_t s = 0; s < 3; ++s) {
      double acc = 0.0;
      for (std::size_t i = 0; i < g.dim; ++i) {
        const std::size_t col = g.offset + s * stride + i;
        if (col >= assembled.dim)
          throw Error(ErrorKind::kData, ErrorCode::kDimensionMismatch,
                      "nmi_grouped: group " + g.name + " exceeds feature dimension");
        acc += report.per_column[col];
      }
      acc /= static_cast<double>(g.dim);
      report.entries.push_back({g.name, kScopes[s], acc});
      all += acc;
    }
    report.entries.push_back({g.name, "all", all / 3.0});
  }
  return report;
}

RocCurve roc(std::span<const double> posteriors, std::span<const std::uint8_t> labels) {
  if (posteriors.size() != labels.size())
    throw Error(ErrorKind::kData, ErrorCode::kLengthMismatch, "roc: length mismatch");
  const std::size_t n = posteriors.size();
  RocCurve curve;
  for (auto l : labels) curve.n_speech += l != 0;
  curve.n_nonspeech = n - curve.n_speech;
  RequireBothClasses(curve.n_speech, curve.n_nonspeech, "roc");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return posteriors[a] < posteriors[b]; });

  std::vector<double> thetas(posteriors.begin(), posteriors.end());
  thetas.push_back(0.0);
  thetas.push_back(1.0);
  std::sort(thetas.begin(), thetas.end());
  thetas.erase(std::unique(thetas.begin(), thetas.end()), thetas.end());

  // Walk thresholds upward; frames with p < theta are rejected.
  std::size_t rejected_speech = 0, rejected_nonspeech = 0, i = 0;
  const double ns = static_cast<double>(curve.n_speech);
  const double nn = static_cast<double>(curve.n_nonspeech);
  for (double theta : thetas) {
    while (i < n && posteriors[order[i]] < theta) {
      (labels[order[i]] ? rejected_speech : rejected_nonspeech)++;
      ++i;
    }
    RocPoint p;
    p.theta = theta;
    p.false_rejects = rejected_speech;
    p.false_accepts = curve.n_nonspeech - rejected_nonspeech;
    p.far = static_cast<double>(p.false_accepts) / nn;
    p.frr = static_cast<double>(p.false_rejects) / ns;
    curve.points.push_back(p);
  }
  return curve;
}

EerPoint eer_point(const RocCurve &curve) {
  const auto &pts = curve.points;
  if (pts.empty()) return {};
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = pts[i].far - pts[i].frr;
    if (d == 0.0) return {pts[i].far, pts[i].theta};
    if (i + 1 < pts.size()) {
      const double d_next = pts[i + 1].far - pts[i + 1].frr;
      if (d > 0.0 && d_next < 0.0) {
        const double w = d / (d - d_next);
        return {pts[i].far + w * (pts[i + 1].far - pts[i].far),
                pts[i].theta + w * (pts[i + 1].theta - pts[i].theta)};
      }
    }
  }
  // No crossing: far stays above frr (or below) everywhere; take the closest point.
  std::size_t best = 0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (std::fabs(pts[i].far - pts[i].frr) < std::fabs(pts[best].far - pts[best].frr)) best = i;
  return {0.5 * (pts[best].far + pts[best].frr), pts[best].theta};
}

F1Result f1_from_counts(std::size_t n_ref, std::size_t n_hyp, std::size_t matched) {
  F1Result r;
  r.n_ref = n_ref;
  r.n_hyp = n_hyp;
  r.matched = matched;
  r.precision = n_hyp == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(n_hyp);
  r.recall = n_ref == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(n_ref);
  const double denom = r.precision + r.recall;
  r.f1 = denom > 0.0 ? 2.0 * r.precision * r.recall / denom : 0.0;
  return r;
}

F1Result f1_utterance(const SegmentList &hyp, const SegmentList &ref, double collar_s) {
  // Small slack so that boundaries written with 3 decimals still compare
  // exactly at the collar edge.
  constexpr double kSlack = 1e-9;
  std::vector<bool> used(hyp.size(), false);
  std::size_t matched = 0;
  for (const Segment &r : ref) {
    for (std::size_t h = 0; h < hyp.size(); ++h) {
      if (used[h]) continue;
      if (std::fabs(hyp[h].start_s - r.start_s) <= collar_s + kSlack &&
          std::fabs(hyp[h].end_s - r.end_s) <= collar_s + kSlack) {
        used[h] = true;
        ++matched;
        break;
      }
    }
  }
  return f1_from_counts(ref.size(), hyp.size(), matched);
}

F1Result evaluate_f1(std::span<const Utterance> utterances, double theta,
                     const TuneOptions &opts) {
  std::size_t n_ref = 0, n_hyp = 0, matched = 0;
  DecisionOptions decision = opts.decision;
  decision.theta = theta;
  for (const Utterance &u : utterances) {
    const F1Result r = f1_utterance(segments_from_labels(decide(u.posteriors, decision)),
                                    segments_from_labels(u.labels), opts.collar_s);
    n_ref += r.n_ref;
    n_hyp += r.n_hyp;
    matched += r.matched;
  }
  return f1_from_counts(n_ref, n_hyp, matched);
}

double tune_threshold(std::span<const Utterance> dev, TuneObjective objective,
                      const TuneOptions &opts) {
  if (dev.empty()) throw Error(ErrorKind::kData, ErrorCode::kDegenerateLabels, "tune: no data");
  std::vector<double> p;
  std::vector<std::uint8_t> l;
  for (const Utterance &u : dev) {
    if (u.posteriors.size() != u.labels.size())
      throw Error(ErrorKind::kData, ErrorCode::kLengthMismatch, "tune: length mismatch");
    p.insert(p.end(), u.posteriors.p.begin(), u.posteriors.p.end());
    l.insert(l.end(), u.labels.labels.begin(), u.labels.labels.end());
  }
  if (objective == TuneObjective::kEer) return eer_point(roc(p, l)).theta;

  std::size_t pos = 0;
  for (auto v : l) pos += v != 0;
  RequireBothClasses(pos, l.size() - pos, "tune");
  double best_theta = 0.01, best_f1 = -1.0;
  for (int i = 1; i <= 99; ++i) {
    const double theta = i / 100.0;
    const double f1 = evaluate_f1(dev, theta, opts).f1;
    if (f1 > best_f1) {
      best_f1 = f1;
      best_theta = theta;
    }
  }
  return best_theta;
}

}  // namespace vadfuse

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

#include "vadfuse/config.h"

#include <cmath>

#include "vadfuse/common.h"
#include "vadfuse/fft.h"

namespace vadfuse {
namespace {

void check(bool ok, const std::string &what) {
  if (!ok) throw Error(ErrorKind::kUsage, "invalid config: " + what);
}

}  // namespace

void validate(const RunConfig &c) {
  check(c.frame_ms > 0.0, "frame.length_ms must be positive");
  check(c.hop_ms > 0.0, "frame.hop_ms must be positive");
  check(is_power_of_two(c.nfft), "frame.nfft must be a power of two");
  parse_stream_list(c.streams);
  check(c.lp_order >= 1, "features.lp_order must be >= 1");
  check(c.mel_bands >= 2, "features.mel_bands must be >= 2");
  check(c.plp_order >= 1, "features.plp_order must be >= 1");
  check(c.cgd_rho > 1.0, "features.cgd_rho must exceed 1");
  check(c.median_width >= 1 && c.median_width % 2 == 1, "pipeline.median_width must be odd");
  check(c.delta_context >= 1, "pipeline.delta_context must be >= 1");
  check(c.hidden >= 1, "model.hidden must be >= 1");
  check(c.epochs >= 0, "model.epochs must be >= 0");
  check(c.batch_size >= 1, "model.batch_size must be >= 1");
  check(c.learning_rate > 0.0, "model.learning_rate must be positive");
  check(c.momentum >= 0.0 && c.momentum < 1.0, "model.momentum must be in [0, 1)");
  check(c.patience >= 1, "model.patience must be >= 1");
  check(c.dev_fraction >= 0.0 && c.dev_fraction < 1.0, "model.dev_fraction must be in [0, 1)");
  check(parse_fusion_mode(c.fusion).has_value(), "fusion.mode must be feature or decision");
  check(parse_fusion_rule(c.rule).has_value(), "fusion.rule must be geometric or arithmetic");
  check(c.theta >= 0.0 && c.theta <= 1.0, "decision.theta must be in [0, 1]");
  check(c.close_ms >= 0.0 && c.extend_ms >= 0.0, "decision hangover lengths must be >= 0");
  check(c.mi_bins >= 1, "eval.mi_bins must be >= 1");
  check(c.collar_s >= 0.0, "eval.collar_s must be >= 0");
  check(c.eer == "pooled" || c.eer == "per-condition", "eval.eer must be pooled or per-condition");
  check(c.objective == "f1" || c.objective == "eer", "eval.objective must be f1 or eer");
  check(!c.snr_db.empty(), "corpus.snr_db must not be empty");
  for (double s : c.snr_db) check(std::isfinite(s), "corpus.snr_db must be finite");
  check(c.pad_s >= 0.0, "corpus.pad_s must be >= 0");
  check(c.jobs >= 1, "run.jobs must be >= 1");
}

FeatureConfig feature_config(const RunConfig &c) {
  FeatureConfig f;
  f.frame_len_s = c.frame_ms / 1000.0;
  f.hop_s = c.hop_ms / 1000.0;
  f.nfft = c.nfft;
  f.mfcc.n_mels = c.mel_bands;
  f.plp.model_order = c.plp_order;
  f.cgd_rho = c.cgd_rho;
  f.source.lp_order = c.lp_order;
  f.source.nfft = c.nfft;
  return f;
}

PipelineOptions pipeline_options(const RunConfig &c) { return {c.median_width, c.delta_context}; }

SystemSpec system_spec(const RunConfig &c) {
  SystemSpec s;
  s.streams = parse_stream_list(c.streams);
  s.mode = *parse_fusion_mode(c.fusion);
  s.rule = *parse_fusion_rule(c.rule);
  s.smooth_before_fusion = c.smooth_before_fusion;
  s.theta = c.theta;
  s.hidden = c.hidden;
  s.pipeline = pipeline_options(c);
  s.train.epochs = c.epochs;
  s.train.batch_size = c.batch_size;
  s.train.learning_rate = c.learning_rate;
  s.train.momentum = c.momentum;
  s.train.early_stop_patience = c.patience;
  s.train.seed = require_seed(c, "train");
  s.dev_fraction = c.dev_fraction;
  return s;
}

DecisionOptions decision_options(const RunConfig &c) {
  DecisionOptions d;
  d.median_width = c.median_width;
  d.theta = c.theta;
  d.hangover.close_ms = c.close_ms;
  d.hangover.extend_ms = c.extend_ms;
  return d;
}

TuneOptions tune_options(const RunConfig &c) { return {decision_options(c), c.collar_s}; }

TuneObjective tune_objective(const RunConfig &c) {
  return c.objective == "eer" ? TuneObjective::kEer : TuneObjective::kF1;
}

std::uint64_t require_seed(const RunConfig &c, const char *command) {
  if (!c.seed)
    throw Error(ErrorKind::kUsage,
                std::string(command) + ": a seed is required (run.seed in the config or --seed)");
  return *c.seed;
}

}  // namespace vadfuse

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

// Run configuration shared by every subcommand. Defaults are the module
// constants; the command-line layer binds each field to a "section.key"
// entry of the config file and to a flag.

#ifndef VADFUSE_CONFIG_H_
#define VADFUSE_CONFIG_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vadfuse/audio.h"
#include "vadfuse/detector.h"
#include "vadfuse/dsp.h"
#include "vadfuse/evaluation.h"
#include "vadfuse/extract.h"
#include "vadfuse/fusion.h"
#include "vadfuse/mlp.h"
#include "vadfuse/pipeline.h"

namespace vadfuse {

inline constexpr std::array<double, 2> kDefaultSnrsDb{0.0, 10.0};

struct RunConfig {
  // [frame]
  double frame_ms = kDefaultFrameSeconds * 1000.0;
  double hop_ms = kDefaultHopSeconds * 1000.0;
  std::size_t nfft = kDefaultNfft;
  // [features]
  std::string streams = "MFCC,SADJADI,NEW";
  int lp_order = kDefaultLpOrder;
  int mel_bands = MfccOptions{}.n_mels;
  int plp_order = PlpOptions{}.model_order;
  double cgd_rho = FeatureConfig{}.cgd_rho;
  // [pipeline]
  int median_width = kMedianWidth;
  int delta_context = kDeltaContext;
  // [model]
  std::size_t hidden = kHiddenUnits;
  int epochs = TrainConfig{}.epochs;
  std::size_t batch_size = TrainConfig{}.batch_size;
  double learning_rate = TrainConfig{}.learning_rate;
  double momentum = TrainConfig{}.momentum;
  int patience = TrainConfig{}.early_stop_patience;
  double dev_fraction = kDefaultDevFraction;
  // [fusion]
  std::string fusion = "decision";
  std::string rule = "geometric";
  bool smooth_before_fusion = false;
  // [decision]
  double theta = 0.5;
  double close_ms = kHangoverCloseMs;
  double extend_ms = kHangoverExtendMs;
  // [eval]
  int mi_bins = kMiBins;
  double collar_s = kCollarSeconds;
  std::string eer = "pooled";  // or "per-condition"
  std::string objective = "f1";  // threshold tuning: "f1" or "eer"
  // [corpus]
  std::vector<double> snr_db{kDefaultSnrsDb.begin(), kDefaultSnrsDb.end()};
  double pad_s = kDefaultPadSeconds;
  // [run]
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};

// Throws Error(kUsage) naming the first invalid field.
void validate(const RunConfig &config);

FeatureConfig feature_config(const RunConfig &config);
PipelineOptions pipeline_options(const RunConfig &config);
SystemSpec system_spec(const RunConfig &config);  // requires a seed
DecisionOptions decision_options(const RunConfig &config);
TuneOptions tune_options(const RunConfig &config);
TuneObjective tune_objective(const RunConfig &config);

// Throws Error(kUsage) when the seed is missing.
std::uint64_t require_seed(const RunConfig &config, const char *command);

}  // namespace vadfuse

#endif  // VADFUSE_CONFIG_H_

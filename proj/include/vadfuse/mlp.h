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

// One-hidden-layer perceptron producing per-frame speech posteriors:
// tanh hidden units, a single sigmoid output, trained on binary cross-entropy
// by mini-batch gradient descent with momentum and dev-set early stopping.

#ifndef VADFUSE_MLP_H_
#define VADFUSE_MLP_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vadfuse/pipeline.h"

namespace vadfuse {

inline constexpr std::size_t kHiddenUnits = 32;

struct MlpModel {
  std::size_t in_dim = 0;
  std::size_t hidden = 0;
  std::vector<double> w1;  // hidden x in_dim, row-major
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // hidden
  double b2 = 0.0;
  NormStats norm;                    // applied to assembled features upstream
  std::vector<std::string> streams;  // stream tags, in assembly order

  bool operator==(const MlpModel &) const = default;
};

// Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
MlpModel init_mlp(std::size_t in_dim, std::size_t hidden = kHiddenUnits, std::uint64_t seed = 0);

// Pre-sigmoid activation w2 . tanh(w1 x + b1) + b2.
double forward_logit(const MlpModel &model, std::span<const double> x);
// sigmoid(forward_logit), kept strictly inside (0, 1).
double forward(const MlpModel &model, std::span<const double> x);
std::vector<double> forward_track(const MlpModel &model, const FeatureTrack &features);

struct Gradients {
  std::vector<double> w1, b1, w2;
  double b2 = 0.0;
};

// Mean binary cross-entropy over the rows in `rows` and, if `grad` is given,
// its gradient with respect to every parameter.
double loss_and_gradient(const MlpModel &model, const FeatureTrack &x,
                         std::span<const std::uint8_t> y, std::span<const std::size_t> rows,
                         Gradients *grad);
double mean_loss(const MlpModel &model, const FeatureTrack &x, std::span<const std::uint8_t> y);

struct TrainConfig {
  int epochs = 100;
  std::size_t batch_size = 256;
  double learning_rate = 0.01;
  double momentum = 0.9;
  int early_stop_patience = 10;
  std::uint64_t seed = 0;
};

struct Dataset {
  FeatureTrack x;
  std::vector<std::uint8_t> y;
};

struct TrainHistory {
  std::vector<double> train_loss;  // after each epoch
  std::vector<double> dev_loss;
  int best_epoch = 0;  // 0 = the initial model
};

struct TrainResult {
  MlpModel model;
  TrainHistory history;
};

// Returns the snapshot with the lowest dev loss. Throws Error(kDivergence)
// naming the epoch if a loss turns non-finite.
TrainResult train(const MlpModel &initial, const Dataset &train_set, const Dataset &dev_set,
                  const TrainConfig &config);

}  // namespace vadfuse

#endif  // VADFUSE_MLP_H_

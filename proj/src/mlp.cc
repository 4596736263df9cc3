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

#include "vadfuse/mlp.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "vadfuse/common.h"
#include "vadfuse/simd/kernels.h"

namespace vadfuse {
namespace {

// Portable across standard libraries, unlike std::uniform_real_distribution.
double Uniform01(std::mt19937_64 &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double Softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

void CheckDims(const MlpModel &model, std::size_t dim) {
  if (dim != model.in_dim)
    throw Error(ErrorKind::kData, ErrorCode::kDimensionMismatch,
                "mlp: input has " + std::to_string(dim) + " dims, model expects " +
                    std::to_string(model.in_dim));
}

void Hidden(const MlpModel &m, std::span<const double> x, std::vector<double> &h) {
  h.resize(m.hidden);
  for (std::size_t j = 0; j < m.hidden; ++j)
    h[j] = std::tanh(simd::dot({m.w1.data() + j * m.in_dim, m.in_dim}, x) + m.b1[j]);
}

bool AllFinite(const MlpModel &m) {
  auto finite = [](const std::vector<double> &v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  return finite(m.w1) && finite(m.b1) && finite(m.w2) && std::isfinite(m.b2);
}

}  // namespace

MlpModel init_mlp(std::size_t in_dim, std::size_t hidden, std::uint64_t seed) {
  if (in_dim == 0 || hidden == 0)
    throw Error(ErrorKind::kUsage, "init_mlp: in_dim and hidden must be >= 1");
  MlpModel m;
  m.in_dim = in_dim;
  m.hidden = hidden;
  std::mt19937_64 rng(seed);
  const double limit1 = std::sqrt(6.0 / static_cast<double>(in_dim + hidden));
  const double limit2 = std::sqrt(6.0 / static_cast<double>(hidden + 1));
  m.w1.resize(hidden * in_dim);
  for (double &w : m.w1) w = limit1 * (2.0 * Uniform01(rng) - 1.0);
  m.b1.assign(hidden, 0.0);
  m.w2.resize(hidden);
  for (double &w : m.w2) w = limit2 * (2.0 * Uniform01(rng) - 1.0);
  m.b2 = 0.0;
  return m;
}

double forward_logit(const MlpModel &model, std::span<const double> x) {
  CheckDims(model, x.size());
  std::vector<double> h;
  Hidden(model, x, h);
  return simd::dot(model.w2, h) + model.b2;
}

double forward(const MlpModel &model, std::span<const double> x) {
  constexpr double kEdge = 1e-12;
  return std::clamp(Sigmoid(forward_logit(model, x)), kEdge, 1.0 - kEdge);
}

std::vector<double> forward_track(const MlpModel &model, const FeatureTrack &features) {
  CheckDims(model, features.dim);
  std::vector<double> p(features.n_frames);
  for (std::size_t t = 0; t < features.n_frames; ++t) p[t] = forward(model, features.row(t));
  return p;
}

double loss_and_gradient(const MlpModel &model, const FeatureTrack &x,
                         std::span<const std::uint8_t> y, std::span<const std::size_t> rows,
                         Gradients *grad) {
  CheckDims(model, x.dim);
  if (y.size() != x.n_frames)
    throw Error(ErrorKind::kData, ErrorCode::kLengthMismatch, "mlp: label count != frame count");
  if (grad != nullptr) {
    grad->w1.assign(model.w1.size(), 0.0);
    grad->b1.assign(model.hidden, 0.0);
    grad->w2.assign(model.hidden, 0.0);
    grad->b2 = 0.0;
  }
  if (rows.empty()) return 0.0;

  std::vector<double> h, dh(model.hidden);
  double loss = 0.0;
  for (std::size_t r : rows) {
    const auto xr = x.row(r);
    Hidden(model, xr, h);
    const double z = simd::dot(model.w2, h) + model.b2;
    const double target = y[r] ? 1.0 : 0.0;
    loss += Softplus(z) - target * z;
    if (grad == nullptr) continue;
    const double dz = Sigmoid(z) - target;
    simd::axpy(dz, h, grad->w2);
    grad->b2 += dz;
    for (std::size_t j = 0; j < model.hidden; ++j) {
      dh[j] = dz * model.w2[j] * (1.0 - h[j] * h[j]);
      grad->b1[j] += dh[j];
      simd::axpy(dh[j], xr, {grad->w1.data() + j * model.in_dim, model.in_dim});
    }
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  if (grad != nullptr) {
    for (double &g : grad->w1) g *= inv;
    for (double &g : grad->b1) g *= inv;
    for (double &g : grad->w2) g *= inv;
    grad->b2 *= inv;
  }
  return loss * inv;
}

double mean_loss(const MlpModel &model, const FeatureTrack &x, std::span<const std::uint8_t> y) {
  std::vector<std::size_t> rows(x.n_frames);
  std::iota(rows.begin(), rows.end(), 0);
  return loss_and_gradient(model, x, y, rows, nullptr);
}

TrainResult train(const MlpModel &initial, const Dataset &train_set, const Dataset &dev_set,
                  const TrainConfig &config) {
  if (train_set.x.n_frames == 0 || dev_set.x.n_frames == 0)
    throw Error(ErrorKind::kData, ErrorCode::kDegenerateInput, "train: empty train or dev set");
  if (config.batch_size == 0 || config.learning_rate <= 0.0 || config.epochs < 0)
    throw Error(ErrorKind::kUsage, "train: invalid configuration");
  for (const auto *set : {&train_set, &dev_set})
    for (std::uint8_t v : set->y)
      if (v > 1) throw Error(ErrorKind::kData, "train: labels must be 0 or 1");

  TrainResult result;
  result.model = initial;
  if (config.epochs == 0) return result;

  MlpModel model = initial;
  double best_dev = mean_loss(model, dev_set.x, dev_set.y);
  Gradients velocity{std::vector<double>(model.w1.size(), 0.0),
                     std::vector<double>(model.hidden, 0.0),
                     std::vector<double>(model.hidden, 0.0), 0.0};
  Gradients grad;
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train_set.x.n_frames);
  std::iota(order.begin(), order.end(), 0);

  const double mu = config.momentum;
  const double lr = config.learning_rate;
  auto step = [&](std::vector<double> &w, std::vector<double> &v, const std::vector<double> &g) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      v[i] = mu * v[i] - lr * g[i];
      w[i] += v[i];
    }
  };

  int since_best = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);

    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      loss_and_gradient(model, train_set.x, train_set.y,
                        std::span<const std::size_t>(order).subspan(start, end - start), &grad);
      step(model.w1, velocity.w1, grad.w1);
      step(model.b1, velocity.b1, grad.b1);
      step(model.w2, velocity.w2, grad.w2);
      velocity.b2 = mu * velocity.b2 - lr * grad.b2;
      model.b2 += velocity.b2;
    }

    const double train_loss = mean_loss(model, train_set.x, train_set.y);
    const double dev_loss = mean_loss(model, dev_set.x, dev_set.y);
    if (!std::isfinite(train_loss) || !std::isfinite(dev_loss) || !AllFinite(model))
      throw Error(ErrorKind::kNumeric, ErrorCode::kDivergence,
                  "train: divergence at epoch " + std::to_string(epoch) + " (non-finite loss)");
    result.history.train_loss.push_back(train_loss);
    result.history.dev_loss.push_back(dev_loss);

    if (dev_loss < best_dev) {
      best_dev = dev_loss;
      result.model = model;
      result.history.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.early_stop_patience) {
      break;
    }
  }
  return result;
}

}  // namespace vadfuse

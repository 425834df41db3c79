// Copyright 2026 The COLE Authors.
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

#pragma once

// MLP surrogate head: input -> [Linear -> LeakyReLU -> Dropout] x hidden_layers
// -> Linear(1), trained with Adam on either the pairwise hinge loss or MSE.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cole/error.hpp"
#include "cole/losses.hpp"
#include "cole/pca.hpp"
#include "cole/rng.hpp"

namespace cole::numerics {

struct MlpConfig {
  std::size_t input_dim = 0;
  std::size_t hidden_width = 128;
  std::size_t hidden_layers = 3;
  double leaky_slope = 0.01;
  double dropout_p = 0.1;
  std::size_t output_dim = 1;

  void validate() const {
    if (input_dim == 0 || hidden_width == 0 || hidden_layers == 0 || output_dim != 1) {
      throw InputError("MlpConfig: widths must be positive and output_dim must be 1");
    }
    if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw InputError("MlpConfig: dropout_p must be in [0, 1)");
  }
};

struct LossKind {
  enum class Kind { PairwiseHinge, Mse };
  Kind kind = Kind::PairwiseHinge;
  double epsilon = 0.1;  // percent-scale margin, hinge only

  static LossKind hinge(double eps = 0.1) { return {Kind::PairwiseHinge, eps}; }
  static LossKind mse() { return {Kind::Mse, 0.1}; }
};

struct OptimizerConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int epochs = 200;
  std::size_t full_batch_below = 256;
  std::size_t batch_size = 128;
  double clip_norm = 5.0;
};

struct TrainConfig {
  MlpConfig mlp;
  LossKind loss;
  OptimizerConfig optimizer;
  std::uint64_t seed = 0;
};

struct SurrogateModel {
  MlpConfig config;
  std::vector<Eigen::MatrixXd> weights;  // layer l: out x in
  std::vector<Eigen::VectorXd> biases;
  std::uint64_t seed = 0;
  double final_loss = 0.0;
  std::optional<PcaModel> pca;  // applied to raw features before the MLP
};

inline LossValue evaluate_loss(const LossKind& loss, const Eigen::VectorXd& pred,
                               const Eigen::VectorXd& target) {
  return loss.kind == LossKind::Kind::Mse ? mse_loss(pred, target)
                                          : pairwise_hinge_loss(pred, target, loss.epsilon);
}

namespace detail {

inline Eigen::MatrixXd leaky(const Eigen::MatrixXd& z, double slope) {
  return z.unaryExpr([slope](double v) { return v > 0.0 ? v : slope * v; });
}

inline Eigen::MatrixXd affine(const Eigen::MatrixXd& h, const Eigen::MatrixXd& w,
                              const Eigen::VectorXd& b) {
  Eigen::MatrixXd z = h * w.transpose();
  z.rowwise() += b.transpose();
  return z;
}

}  // namespace detail

/// Dropout-free forward pass on already reduced features.
inline Eigen::VectorXd mlp_forward(const SurrogateModel& m, const Eigen::MatrixXd& X) {
  Eigen::MatrixXd h = X;
  const std::size_t layers = m.weights.size();
  for (std::size_t l = 0; l + 1 < layers; ++l) {
    h = detail::leaky(detail::affine(h, m.weights[l], m.biases[l]), m.config.leaky_slope);
  }
  return detail::affine(h, m.weights.back(), m.biases.back()).col(0);
}

/// Predictions for raw features. Applies the attached PCA, if any.
inline Eigen::VectorXd predict(const SurrogateModel& m, const Eigen::MatrixXd& X) {
  if (m.pca) {
    if (X.cols() != m.pca->input_dim()) {
      throw InputError("predict: expected " + std::to_string(m.pca->input_dim()) +
                       " features, got " + std::to_string(X.cols()));
    }
    return mlp_forward(m, pca_transform_rows(*m.pca, X));
  }
  if (static_cast<std::size_t>(X.cols()) != m.config.input_dim) {
    throw InputError("predict: expected " + std::to_string(m.config.input_dim) + " features, got " +
                     std::to_string(X.cols()));
  }
  return mlp_forward(m, X);
}

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases; the output
/// bias starts at `output_bias`.
inline SurrogateModel init_mlp(const MlpConfig& cfg, Rng& rng, double output_bias = 0.0) {
  cfg.validate();
  SurrogateModel m;
  m.config = cfg;
  std::size_t fan_in = cfg.input_dim;
  for (std::size_t l = 0; l <= cfg.hidden_layers; ++l) {
    const std::size_t fan_out = l == cfg.hidden_layers ? cfg.output_dim : cfg.hidden_width;
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Eigen::MatrixXd w(fan_out, fan_in);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(-bound, bound);
    }
    Eigen::VectorXd b(fan_out);
    for (Eigen::Index r = 0; r < b.size(); ++r) b(r) = rng.uniform(-bound, bound);
    m.weights.push_back(std::move(w));
    m.biases.push_back(std::move(b));
    fan_in = fan_out;
  }
  m.biases.back().setConstant(output_bias);
  return m;
}

/// Deterministic given cfg.seed: initialization, per-epoch shuffles, and
/// dropout masks all draw from one seeded source. Full-batch below
/// `full_batch_below` samples, else shuffled mini-batches. Gradients are
/// clipped to a global norm before each Adam step.
inline SurrogateModel train_surrogate(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                      const TrainConfig& cfg) {
  const std::size_t n = static_cast<std::size_t>(X.rows());
  if (n < 2) throw InputError("train_surrogate: need at least 2 samples");
  if (static_cast<std::size_t>(y.size()) != n) throw InputError("train_surrogate: X/y length mismatch");
  if (static_cast<std::size_t>(X.cols()) != cfg.mlp.input_dim) {
    throw InputError("train_surrogate: feature dim " + std::to_string(X.cols()) +
                     " != config input_dim " + std::to_string(cfg.mlp.input_dim));
  }
  if (!X.allFinite() || !y.allFinite()) throw NumericError("train_surrogate: non-finite training data");

  Rng rng(cfg.seed);
  SurrogateModel m = init_mlp(cfg.mlp, rng, y.mean());
  m.seed = cfg.seed;
  const std::size_t layers = m.weights.size();
  const OptimizerConfig& opt = cfg.optimizer;
  const double p = cfg.mlp.dropout_p;
  const double keep_scale = 1.0 / (1.0 - p);
  const double slope = cfg.mlp.leaky_slope;

  std::vector<Eigen::MatrixXd> mw, vw, gw(layers);
  std::vector<Eigen::VectorXd> mb, vb, gb(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    mw.push_back(Eigen::MatrixXd::Zero(m.weights[l].rows(), m.weights[l].cols()));
    vw.push_back(mw.back());
    mb.push_back(Eigen::VectorXd::Zero(m.biases[l].size()));
    vb.push_back(mb.back());
  }

  const std::size_t batch = n < opt.full_batch_below ? n : std::max<std::size_t>(2, opt.batch_size);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Eigen::MatrixXd> pre(layers), post(layers), mask(layers);
  long step = 0;

  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    if (batch < n) rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t epoch_batches = 0;
    for (std::size_t start = 0; start < n;) {
      std::size_t stop = std::min(n, start + batch);
      // A trailing singleton cannot form a pair; fold it into this batch.
      if (n - stop == 1) stop = n;
      const Eigen::Index b = static_cast<Eigen::Index>(stop - start);
      Eigen::MatrixXd xb(b, X.cols());
      Eigen::VectorXd yb(b);
      for (Eigen::Index r = 0; r < b; ++r) {
        xb.row(r) = X.row(static_cast<Eigen::Index>(order[start + static_cast<std::size_t>(r)]));
        yb(r) = y(static_cast<Eigen::Index>(order[start + static_cast<std::size_t>(r)]));
      }

      // Forward with dropout.
      const Eigen::MatrixXd* h = &xb;
      for (std::size_t l = 0; l + 1 < layers; ++l) {
        pre[l] = detail::affine(*h, m.weights[l], m.biases[l]);
        post[l] = detail::leaky(pre[l], slope);
        if (p > 0.0) {
          mask[l].resize(post[l].rows(), post[l].cols());
          for (Eigen::Index c = 0; c < mask[l].cols(); ++c) {
            for (Eigen::Index r = 0; r < mask[l].rows(); ++r) {
              mask[l](r, c) = rng.bernoulli(p) ? 0.0 : keep_scale;
            }
          }
          post[l] = post[l].cwiseProduct(mask[l]);
        }
        h = &post[l];
      }
      const Eigen::VectorXd out = detail::affine(*h, m.weights.back(), m.biases.back()).col(0);
      const LossValue lv = evaluate_loss(cfg.loss, out, yb);
      if (!std::isfinite(lv.value)) {
        throw NumericError("train_surrogate: non-finite loss at epoch " + std::to_string(epoch));
      }
      epoch_loss += lv.value;
      ++epoch_batches;

      // Backward.
      Eigen::MatrixXd g = lv.grad;  // b x 1
      for (std::size_t l = layers; l-- > 0;) {
        const Eigen::MatrixXd& input = l == 0 ? xb : post[l - 1];
        gw[l] = g.transpose() * input;
        gb[l] = g.colwise().sum().transpose();
        if (l == 0) break;
        g = g * m.weights[l];
        if (p > 0.0) g = g.cwiseProduct(mask[l - 1]);
        g = g.cwiseProduct(pre[l - 1].unaryExpr([slope](double v) { return v > 0.0 ? 1.0 : slope; }));
      }

      double sq = 0.0;
      for (std::size_t l = 0; l < layers; ++l) sq += gw[l].squaredNorm() + gb[l].squaredNorm();
      const double norm = std::sqrt(sq);
      const double clip = (opt.clip_norm > 0.0 && norm > opt.clip_norm) ? opt.clip_norm / norm : 1.0;

      ++step;
      const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(step));
      const double lr = opt.learning_rate;
      const auto adam = [&](auto& param, auto& mom, auto& vel, const auto& grad) {
        mom = opt.beta1 * mom + (1.0 - opt.beta1) * (clip * grad);
        vel = opt.beta2 * vel + (1.0 - opt.beta2) * (clip * grad).cwiseAbs2();
        param.array() -= lr * (mom.array() / c1) / ((vel.array() / c2).sqrt() + opt.adam_eps);
      };
      for (std::size_t l = 0; l < layers; ++l) {
        adam(m.weights[l], mw[l], vw[l], gw[l]);
        adam(m.biases[l], mb[l], vb[l], gb[l]);
      }
      start = stop;
    }
    m.final_loss = epoch_loss / static_cast<double>(std::max<std::size_t>(1, epoch_batches));
  }
  for (std::size_t l = 0; l < layers; ++l) {
    if (!m.weights[l].allFinite() || !m.biases[l].allFinite()) {
      throw NumericError("train_surrogate: non-finite parameters after training");
    }
  }
  return m;
}

/// PCA (optional) followed by MLP training; the fitted PCA is attached so
/// predict() accepts raw features.
struct PipelineConfig {
  std::optional<int> pca_components = 128;
  TrainConfig train;
};

inline SurrogateModel fit_pipeline(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                   const PipelineConfig& cfg) {
  TrainConfig tc = cfg.train;
  if (cfg.pca_components) {
    PcaModel pca = pca_fit(X, *cfg.pca_components);
    const Eigen::MatrixXd reduced = pca_transform_rows(pca, X);
    tc.mlp.input_dim = static_cast<std::size_t>(reduced.cols());
    SurrogateModel m = train_surrogate(reduced, y, tc);
    m.pca = std::move(pca);
    return m;
  }
  tc.mlp.input_dim = static_cast<std::size_t>(X.cols());
  return train_surrogate(X, y, tc);
}

}  // namespace cole::numerics

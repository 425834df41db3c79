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

#include <cmath>
#include <cstddef>
#include <string>

#include <Eigen/Dense>

#include "cole/error.hpp"

namespace cole::numerics {

struct LossValue {
  double value = 0.0;
  Eigen::VectorXd grad;  // d value / d pred
};

/// Mean over unordered pairs i<j with y_i != y_j of
///   max(0, eps - sign(y_i - y_j) * (pred_i - pred_j)).
/// Tied-target pairs are skipped; the subgradient at the kink is 0.
inline LossValue pairwise_hinge_loss(const Eigen::VectorXd& pred, const Eigen::VectorXd& target,
                                     double epsilon) {
  const Eigen::Index n = pred.size();
  if (target.size() != n) throw InputError("pairwise_hinge_loss: length mismatch");
  if (n < 2) throw InputError("pairwise_hinge_loss: need at least 2 items");
  if (!(epsilon > 0.0)) throw InputError("pairwise_hinge_loss: epsilon must be > 0");
  LossValue out;
  out.grad = Eigen::VectorXd::Zero(n);
  double total = 0.0;
  std::size_t pairs = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double yi = target(i), pi = pred(i);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double dy = yi - target(j);
      if (dy == 0.0) continue;
      ++pairs;
      const double s = dy > 0.0 ? 1.0 : -1.0;
      const double margin = epsilon - s * (pi - pred(j));
      if (margin > 0.0) {
        total += margin;
        out.grad(i) -= s;
        out.grad(j) += s;
      }
    }
  }
  if (pairs == 0) return out;
  const double inv = 1.0 / static_cast<double>(pairs);
  out.value = total * inv;
  out.grad *= inv;
  return out;
}

/// Mean squared error with gradient 2 (pred - target) / n.
inline LossValue mse_loss(const Eigen::VectorXd& pred, const Eigen::VectorXd& target) {
  if (pred.size() != target.size()) {
    throw InputError("mse_loss: length mismatch (" + std::to_string(pred.size()) + " vs " +
                     std::to_string(target.size()) + ")");
  }
  if (pred.size() == 0) throw InputError("mse_loss: empty input");
  const Eigen::VectorXd diff = pred - target;
  const double n = static_cast<double>(pred.size());
  return {diff.squaredNorm() / n, (2.0 / n) * diff};
}

}  // namespace cole::numerics

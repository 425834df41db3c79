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

#include <algorithm>
#include <cmath>
#include <cstddef>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "cole/error.hpp"

namespace cole::numerics {

/// Fitted principal-component projection. Rows of `components` are
/// orthonormal directions in input space, ordered by decreasing variance.
struct PcaModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd components;          // k_eff x D
  Eigen::VectorXd explained_variance;  // k_eff, non-increasing
  int k_requested = 128;

  Eigen::Index k_eff() const { return components.rows(); }
  Eigen::Index input_dim() const { return mean.size(); }
};

/// k_eff = min(k_requested, N - 1, D). Each component's sign is fixed so its
/// largest-magnitude entry is positive.
inline PcaModel pca_fit(const Eigen::MatrixXd& X, int k_requested = 128) {
  const Eigen::Index n = X.rows(), d = X.cols();
  if (n < 2) throw InputError("pca_fit: need at least 2 samples, got " + std::to_string(n));
  if (d < 1) throw InputError("pca_fit: empty feature dimension");
  if (k_requested < 1) throw InputError("pca_fit: k must be >= 1");
  if (!X.allFinite()) throw NumericError("pca_fit: non-finite input");

  PcaModel m;
  m.k_requested = k_requested;
  m.mean = X.colwise().mean().transpose();
  const Eigen::MatrixXd centered = X.rowwise() - m.mean.transpose();
  Eigen::VectorXd sv;
  Eigen::MatrixXd V;
  {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
    sv = svd.singularValues();
    V = svd.matrixV();
  }
  if (!sv.allFinite() || !V.allFinite()) {
    // BDCSVD can break down on strongly rank-deficient inputs (e.g. binary
    // features with many duplicate columns); one-sided Jacobi does not.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
    sv = svd.singularValues();
    V = svd.matrixV();
    if (!sv.allFinite() || !V.allFinite()) throw NumericError("pca_fit: SVD did not converge");
  }
  if (sv.size() == 0 || sv(0) <= 1e-12 * std::max(1.0, X.cwiseAbs().maxCoeff())) {
    throw NumericError("pca_fit: data has zero variance");
  }
  const Eigen::Index k = std::min<Eigen::Index>({static_cast<Eigen::Index>(k_requested), n - 1, d});
  m.components = V.leftCols(k).transpose();
  m.explained_variance = sv.head(k).array().square() / static_cast<double>(n - 1);
  for (Eigen::Index r = 0; r < k; ++r) {
    Eigen::Index arg = 0;
    m.components.row(r).cwiseAbs().maxCoeff(&arg);
    if (m.components(r, arg) < 0) m.components.row(r) *= -1.0;
  }
  return m;
}

inline Eigen::VectorXd pca_transform(const PcaModel& m, const Eigen::VectorXd& x) {
  if (x.size() != m.input_dim()) {
    throw InputError("pca_transform: expected length " + std::to_string(m.input_dim()) + ", got " +
                     std::to_string(x.size()));
  }
  return m.components * (x - m.mean);
}

/// Row-wise transform of an N x D matrix into N x k_eff scores.
inline Eigen::MatrixXd pca_transform_rows(const PcaModel& m, const Eigen::MatrixXd& X) {
  if (X.cols() != m.input_dim()) {
    throw InputError("pca_transform: expected " + std::to_string(m.input_dim()) + " columns, got " +
                     std::to_string(X.cols()));
  }
  return (X.rowwise() - m.mean.transpose()) * m.components.transpose();
}

}  // namespace cole::numerics

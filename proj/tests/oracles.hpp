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


// Independent reference implementations shared by the unit tests and the
// acceptance runner.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cole/einspace.hpp"
#include "cole/rng.hpp"

namespace cole::testing {

inline Eigen::MatrixXd random_matrix(cole::Rng& rng, Eigen::Index r, Eigen::Index c) {
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.normal();
  }
  return m;
}

inline Eigen::VectorXd random_vector(cole::Rng& rng, Eigen::Index n) { return random_matrix(rng, n, 1).col(0); }

// Cyclic Jacobi eigen-decomposition of a symmetric matrix. Returns
// eigenvalues (descending) and matching unit eigenvectors as columns.
inline void jacobi_eigen(Eigen::MatrixXd a, Eigen::VectorXd& values, Eigen::MatrixXd& vectors) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (off < 1e-30) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return a(x, x) > a(y, y); });
  values.resize(n);
  vectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    values(i) = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
    vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
}

// Hinge value from an independent formulation: ordered pairs where i
// outranks j in the target.
inline double hinge_oracle(const Eigen::VectorXd& p, const Eigen::VectorXd& y, double eps) {
  double total = 0.0;
  std::size_t pairs = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    for (Eigen::Index j = 0; j < p.size(); ++j) {
      if (y(i) > y(j)) {
        total += std::max(0.0, eps - (p(i) - p(j)));
        ++pairs;
      }
    }
  }
  return pairs ? total / static_cast<double>(pairs) : 0.0;
}

inline bool near_kink(const Eigen::VectorXd& p, const Eigen::VectorXd& y, double eps, double guard) {
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    for (Eigen::Index j = i + 1; j < p.size(); ++j) {
      if (y(i) == y(j)) continue;
      const double s = y(i) > y(j) ? 1.0 : -1.0;
      if (std::abs(eps - s * (p(i) - p(j))) < guard) return true;
    }
  }
  return false;
}

// Largest relative gap between central finite differences of `value` at `x`
// and the analytic gradient.
template <class F>
double fd_max_rel_error(F value, const Eigen::VectorXd& x, const Eigen::VectorXd& grad) {
  const double h = 1e-6;
  double worst = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    Eigen::VectorXd up = x, down = x;
    up(k) += h;
    down(k) -= h;
    const double fd = (value(up) - value(down)) / (2.0 * h);
    const double scale = std::max({std::abs(fd), std::abs(grad(k)), 1e-6});  // floor absorbs roundoff on zero-gradient coordinates
    worst = std::max(worst, std::abs(fd - grad(k)) / scale);
  }
  return worst;
}

inline einspace::DerivationTree terminal(std::string base, std::vector<std::int64_t> params, einspace::Shape shape) {
  einspace::DerivationTree t;
  t.base = std::move(base);
  t.params = std::move(params);
  t.out_feature_shape = std::move(shape);
  return t;
}

inline einspace::DerivationTree node(einspace::NodeKind kind, std::vector<einspace::DerivationTree> children, std::vector<std::int64_t> params = {}) {
  einspace::DerivationTree t;
  t.kind = kind;
  t.base = std::string(einspace::kind_keyword(kind));
  t.params = std::move(params);
  t.children = std::move(children);
  return t;
}

// Random well-formed trees for the round-trip property.
inline einspace::DerivationTree random_tree(cole::Rng& rng, int depth) {
  static const std::vector<std::string> kOps = {"linear", "relu", "identity", "im2col", "conv", "norm", "clone", "cat"};
  const auto leaf = [&] {
    std::vector<std::int64_t> params;
    for (std::size_t k = rng.uniform_index(4); k > 0; --k) params.push_back(static_cast<std::int64_t>(rng.uniform_index(64)));
    einspace::Shape shape;
    for (std::size_t k = 1 + rng.uniform_index(3); k > 0; --k) shape.push_back(1 + static_cast<std::int64_t>(rng.uniform_index(512)));
    auto t = terminal(kOps[rng.uniform_index(kOps.size())], params, shape);
    if (rng.bernoulli(0.2)) t.out_feature_shape.reset();
    return t;
  };
  if (depth == 0) return node(einspace::NodeKind::Computation, {leaf()});
  switch (rng.uniform_index(4)) {
    case 0: {
      std::vector<einspace::DerivationTree> kids;
      for (std::size_t k = 2 + rng.uniform_index(2); k > 0; --k) kids.push_back(random_tree(rng, depth - 1));
      return node(einspace::NodeKind::Sequential, kids);
    }
    case 1: {
      std::vector<einspace::DerivationTree> kids = {leaf()};
      for (std::size_t k = 1 + rng.uniform_index(2); k > 0; --k) kids.push_back(random_tree(rng, depth - 1));
      kids.push_back(leaf());
      return node(einspace::NodeKind::Branching, kids, {static_cast<std::int64_t>(2 + rng.uniform_index(3))});
    }
    case 2:
      return node(einspace::NodeKind::Routing, {leaf(), random_tree(rng, depth - 1), leaf()});
    default:
      return node(einspace::NodeKind::Computation, {leaf()});
  }
}

}  // namespace cole::testing

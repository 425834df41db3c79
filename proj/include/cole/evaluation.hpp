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

// Rank correlation, the stratified subsampled cross-validation protocol, and
// aggregation of per-trial results.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cole/error.hpp"
#include "cole/rng.hpp"
#include "cole/surrogate.hpp"

namespace cole::evaluation {

// --------------------------------------------------------------------------
// Kendall's tau-b

struct TauCounts {
  std::int64_t score = 0;   // concordant - discordant
  std::int64_t pairs = 0;   // n (n - 1) / 2
  std::int64_t ties_a = 0;  // pairs tied in a (joint ties included)
  std::int64_t ties_b = 0;
};

inline double tau_from_counts(const TauCounts& c) {
  const double denom_sq = static_cast<double>(c.pairs - c.ties_a) * static_cast<double>(c.pairs - c.ties_b);
  if (denom_sq <= 0.0) throw NumericError("kendall_tau: undefined for an all-tied input");
  return static_cast<double>(c.score) / std::sqrt(denom_sq);
}

namespace detail {

inline void check_tau_inputs(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InputError("kendall_tau: length mismatch");
  if (a.size() < 2) throw InputError("kendall_tau: need at least 2 items");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::isnan(a[i]) || std::isnan(b[i])) throw NumericError("kendall_tau: NaN input");
  }
}

inline int sgn(double x) { return (x > 0.0) - (x < 0.0); }

inline std::int64_t tie_pairs_sorted(std::span<const double> sorted) {
  std::int64_t total = 0, run = 1;
  for (std::size_t i = 1; i <= sorted.size(); ++i) {
    if (i < sorted.size() && sorted[i] == sorted[i - 1]) {
      ++run;
    } else {
      total += run * (run - 1) / 2;
      run = 1;
    }
  }
  return total;
}

// Stable merge sort that counts strict inversions.
inline std::int64_t count_inversions(std::vector<double>& v, std::vector<double>& buf, std::size_t lo,
                                     std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t inv = count_inversions(v, buf, lo, mid) + count_inversions(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      inv += static_cast<std::int64_t>(mid - i);
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return inv;
}

}  // namespace detail

/// O(n^2) pair enumeration.
inline TauCounts tau_counts_bruteforce(std::span<const double> a, std::span<const double> b) {
  detail::check_tau_inputs(a, b);
  TauCounts c;
  const std::size_t n = a.size();
  c.pairs = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const int sa = detail::sgn(a[i] - a[j]);
      const int sb = detail::sgn(b[i] - b[j]);
      c.score += sa * sb;
      c.ties_a += sa == 0;
      c.ties_b += sb == 0;
    }
  }
  return c;
}

/// O(n log n) counts via sort + merge-sort inversion counting.
inline TauCounts tau_counts(std::span<const double> a, std::span<const double> b) {
  detail::check_tau_inputs(a, b);
  const std::size_t n = a.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
    return a[x] < a[y] || (a[x] == a[y] && b[x] < b[y]);
  });
  TauCounts c;
  c.pairs = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;

  std::vector<double> sa(n), sb(n);
  for (std::size_t i = 0; i < n; ++i) {
    sa[i] = a[idx[i]];
    sb[i] = b[idx[i]];
  }
  c.ties_a = detail::tie_pairs_sorted(sa);
  std::int64_t joint = 0, run = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i < n && sa[i] == sa[i - 1] && sb[i] == sb[i - 1]) {
      ++run;
    } else {
      joint += run * (run - 1) / 2;
      run = 1;
    }
  }
  std::vector<double> buf(n);
  const std::int64_t swaps = detail::count_inversions(sb, buf, 0, n);
  c.ties_b = detail::tie_pairs_sorted(sb);  // sb is sorted now
  c.score = c.pairs - c.ties_a - c.ties_b + joint - 2 * swaps;
  return c;
}

inline double kendall_tau_bruteforce(std::span<const double> a, std::span<const double> b) {
  return tau_from_counts(tau_counts_bruteforce(a, b));
}

/// Tie-corrected tau-b.
inline double kendall_tau(std::span<const double> a, std::span<const double> b) {
  return tau_from_counts(tau_counts(a, b));
}

// --------------------------------------------------------------------------
// Stratification

struct BinLabels {
  std::vector<int> labels;
  std::vector<std::size_t> sizes;
  bool degenerate = false;  // some bin is empty
};

/// Equal-mass quantile bins by rank. Items with equal values share the bin of
/// the first of them in stable (value, input) order.
inline BinLabels stratify_bins(std::span<const double> y, int n_bins = 5) {
  if (y.empty()) throw InputError("stratify_bins: empty input");
  if (n_bins < 1) throw InputError("stratify_bins: n_bins must be >= 1");
  const std::size_t n = y.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });
  BinLabels out;
  out.labels.assign(n, 0);
  out.sizes.assign(static_cast<std::size_t>(n_bins), 0);
  int current = 0;
  for (std::size_t r = 0; r < n; ++r) {
    if (r == 0 || y[order[r]] != y[order[r - 1]]) {
      current = static_cast<int>(r * static_cast<std::size_t>(n_bins) / n);
    }
    out.labels[order[r]] = current;
    ++out.sizes[static_cast<std::size_t>(current)];
  }
  out.degenerate = std::any_of(out.sizes.begin(), out.sizes.end(), [](std::size_t s) { return s == 0; });
  return out;
}

/// Largest-remainder apportionment of `n` draws over bins proportional to
/// their sizes. Equal remainders favour the lower bin index.
inline std::vector<std::size_t> allocate_proportional(std::span<const std::size_t> sizes, std::size_t n) {
  const std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  if (n > total) throw InputError("stratified sample of " + std::to_string(n) + " from a pool of " + std::to_string(total));
  std::vector<std::size_t> alloc(sizes.size());
  std::vector<std::pair<std::size_t, std::size_t>> rem;  // (remainder, bin)
  std::size_t given = 0;
  for (std::size_t b = 0; b < sizes.size(); ++b) {
    const std::size_t num = n * sizes[b];
    alloc[b] = total ? num / total : 0;
    given += alloc[b];
    rem.emplace_back(total ? num % total : 0, b);
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  for (std::size_t k = 0; given < n; ++k, ++given) ++alloc[rem[k].second];
  return alloc;
}

/// Draws `n` pool members without replacement, per-bin counts from
/// allocate_proportional(). `bins.labels` is aligned with `pool`.
inline std::vector<std::size_t> stratified_sample(std::span<const std::size_t> pool, const BinLabels& bins,
                                                  std::size_t n, Rng& rng) {
  if (bins.labels.size() != pool.size()) throw InputError("stratified_sample: labels do not match pool");
  if (n > pool.size()) {
    throw InputError("stratified_sample: budget " + std::to_string(n) + " exceeds pool size " +
                     std::to_string(pool.size()));
  }
  std::vector<std::vector<std::size_t>> members(bins.sizes.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    members[static_cast<std::size_t>(bins.labels[i])].push_back(pool[i]);
  }
  const auto alloc = allocate_proportional(bins.sizes, n);
  std::vector<std::size_t> out;
  out.reserve(n);
  for (std::size_t b = 0; b < members.size(); ++b) {
    auto& m = members[b];
    for (std::size_t k = 0; k < alloc[b]; ++k) {
      std::swap(m[k], m[k + rng.uniform_index(m.size() - k)]);
      out.push_back(m[k]);
    }
  }
  return out;
}

// --------------------------------------------------------------------------
// Cross-validation plan and runner

inline const std::vector<std::size_t>& default_budgets() {
  static const std::vector<std::size_t> kBudgets = {14, 55, 220, 879, 3516};
  return kBudgets;
}

struct CvPlan {
  std::vector<int> fold_of;  // item -> fold
  int n_folds = 10;
  std::vector<std::uint64_t> seeds;
  std::vector<std::size_t> budgets;
  int n_bins = 5;
  std::uint64_t fold_seed = 0;

  std::vector<std::size_t> fold_sizes() const {
    std::vector<std::size_t> s(static_cast<std::size_t>(n_folds), 0);
    for (int f : fold_of) ++s[static_cast<std::size_t>(f)];
    return s;
  }

  void validate() const {
    if (n_folds < 2) throw InputError("cv plan: need at least 2 folds");
    if (seeds.empty()) throw InputError("cv plan: no seeds");
    if (budgets.empty()) throw InputError("cv plan: no budgets");
    if (!std::is_sorted(budgets.begin(), budgets.end())) throw InputError("cv plan: budgets must be ascending");
    const auto sizes = fold_sizes();
    const std::size_t smallest_pool = fold_of.size() - *std::max_element(sizes.begin(), sizes.end());
    if (budgets.back() > smallest_pool) {
      throw InputError("cv plan: budget " + std::to_string(budgets.back()) + " exceeds training pool of " +
                       std::to_string(smallest_pool));
    }
  }
};

/// Folds from a seeded shuffle of the canonical item order: position k of
/// the shuffled order goes to fold k mod n_folds.
inline CvPlan make_cv_plan(std::size_t n_items, std::uint64_t fold_seed = 0,
                           std::vector<std::size_t> budgets = default_budgets(), int n_folds = 10,
                           std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, int n_bins = 5) {
  if (n_items < static_cast<std::size_t>(n_folds)) throw InputError("cv plan: fewer items than folds");
  CvPlan plan;
  plan.n_folds = n_folds;
  plan.seeds = std::move(seeds);
  plan.budgets = std::move(budgets);
  plan.n_bins = n_bins;
  plan.fold_seed = fold_seed;
  std::vector<std::size_t> perm(n_items);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(derive_seed({0xf01d, fold_seed}));
  rng.shuffle(perm);
  plan.fold_of.assign(n_items, 0);
  for (std::size_t k = 0; k < n_items; ++k) plan.fold_of[perm[k]] = static_cast<int>(k % static_cast<std::size_t>(n_folds));
  plan.validate();
  return plan;
}

struct TrialResult {
  std::string config;
  int fold = 0;
  std::uint64_t seed = 0;
  std::size_t budget = 0;
  double tau = 0.0;
  double mse = 0.0;
  double train_time = 0.0;  // seconds
};

/// Features and targets for every corpus item, rows aligned with `ids`.
struct CvCorpus {
  std::vector<std::string> ids;
  Eigen::MatrixXd features;
  Eigen::VectorXd targets;
};

struct CvOptions {
  std::string config_name = "Base";
  unsigned jobs = 1;
  bool record_timing = false;  // wall-clock seconds are non-deterministic
};

inline std::uint64_t trial_seed(int fold, std::uint64_t seed, std::size_t budget) {
  return derive_seed({static_cast<std::uint64_t>(fold), seed, budget});
}

/// Tau on held-out predictions; constant predictions carry no ranking and
/// score 0.
inline double heldout_tau(std::span<const double> pred, std::span<const double> truth) {
  const bool constant = std::all_of(pred.begin(), pred.end(), [&](double v) { return v == pred.front(); });
  if (constant) return 0.0;
  return kendall_tau(pred, truth);
}

inline TrialResult run_trial(const CvPlan& plan, const CvCorpus& corpus, const numerics::PipelineConfig& pipeline,
                             int fold, std::uint64_t seed, std::size_t budget, const CvOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::size_t> pool, held;
  for (std::size_t i = 0; i < plan.fold_of.size(); ++i) (plan.fold_of[i] == fold ? held : pool).push_back(i);
  std::vector<double> pool_y(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) pool_y[i] = corpus.targets(static_cast<Eigen::Index>(pool[i]));
  const BinLabels bins = stratify_bins(pool_y, plan.n_bins);
  Rng rng(trial_seed(fold, seed, budget));
  const auto sample = stratified_sample(pool, bins, budget, rng);

  Eigen::MatrixXd X(static_cast<Eigen::Index>(sample.size()), corpus.features.cols());
  Eigen::VectorXd y(static_cast<Eigen::Index>(sample.size()));
  for (std::size_t r = 0; r < sample.size(); ++r) {
    X.row(static_cast<Eigen::Index>(r)) = corpus.features.row(static_cast<Eigen::Index>(sample[r]));
    y(static_cast<Eigen::Index>(r)) = corpus.targets(static_cast<Eigen::Index>(sample[r]));
  }
  numerics::PipelineConfig cfg = pipeline;
  cfg.train.seed = rng.next_u64();
  const numerics::SurrogateModel model = numerics::fit_pipeline(X, y, cfg);

  Eigen::MatrixXd Xv(static_cast<Eigen::Index>(held.size()), corpus.features.cols());
  std::vector<double> yv(held.size());
  for (std::size_t r = 0; r < held.size(); ++r) {
    Xv.row(static_cast<Eigen::Index>(r)) = corpus.features.row(static_cast<Eigen::Index>(held[r]));
    yv[r] = corpus.targets(static_cast<Eigen::Index>(held[r]));
  }
  const Eigen::VectorXd pred = numerics::predict(model, Xv);
  std::vector<double> pv(pred.data(), pred.data() + pred.size());

  TrialResult r;
  r.config = opts.config_name;
  r.fold = fold;
  r.seed = seed;
  r.budget = budget;
  r.tau = heldout_tau(pv, yv);
  double sq = 0.0;
  for (std::size_t i = 0; i < yv.size(); ++i) sq += (pv[i] - yv[i]) * (pv[i] - yv[i]);
  r.mse = sq / static_cast<double>(yv.size());
  if (opts.record_timing) {
    r.train_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  return r;
}

/// Every (fold, seed, budget) trial; results sorted by (budget, fold, seed).
inline std::vector<TrialResult> run_cv(const CvPlan& plan, const CvCorpus& corpus,
                                       const numerics::PipelineConfig& pipeline, const CvOptions& opts = {}) {
  plan.validate();
  const auto n = static_cast<Eigen::Index>(plan.fold_of.size());
  if (corpus.features.rows() != n || corpus.targets.size() != n) {
    throw InputError("run_cv: corpus has " + std::to_string(corpus.features.rows()) + " rows, plan expects " +
                     std::to_string(n));
  }
  struct Job {
    int fold;
    std::uint64_t seed;
    std::size_t budget;
  };
  std::vector<Job> jobs;
  for (std::size_t budget : plan.budgets) {
    for (int f = 0; f < plan.n_folds; ++f) {
      for (std::uint64_t s : plan.seeds) jobs.push_back({f, s, budget});
    }
  }
  std::vector<TrialResult> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;
  const auto worker = [&] {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= jobs.size()) return;
      try {
        results[k] = run_trial(plan, corpus, pipeline, jobs[k].fold, jobs[k].seed, jobs[k].budget, opts);
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!first_error) first_error = std::current_exception();
        next.store(jobs.size());
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(opts.jobs, static_cast<unsigned>(jobs.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  std::sort(results.begin(), results.end(), [](const TrialResult& a, const TrialResult& b) {
    return std::tie(a.budget, a.fold, a.seed) < std::tie(b.budget, b.fold, b.seed);
  });
  return results;
}

// --------------------------------------------------------------------------
// Aggregation and reporting

struct SummaryRow {
  std::string config;
  std::size_t budget = 0;
  std::size_t trials = 0;
  double tau_mean = 0.0, tau_std = 0.0;
  double mse_mean = 0.0, mse_std = 0.0;
  double seconds_mean = 0.0;
};

namespace detail {

inline std::pair<double, double> mean_std(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  const double mean = s / static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

}  // namespace detail

/// Mean and sample standard deviation per (configuration, budget).
/// Configurations keep first-appearance order; budgets ascend.
inline std::vector<SummaryRow> aggregate(std::span<const TrialResult> results) {
  if (results.empty()) throw InputError("aggregate: no results");
  std::vector<std::string> config_order;
  std::map<std::pair<std::string, std::size_t>, std::vector<const TrialResult*>> groups;
  for (const auto& r : results) {
    if (std::find(config_order.begin(), config_order.end(), r.config) == config_order.end()) {
      config_order.push_back(r.config);
    }
    groups[{r.config, r.budget}].push_back(&r);
  }
  std::vector<SummaryRow> rows;
  for (const auto& cfg : config_order) {
    for (const auto& [key, members] : groups) {
      if (key.first != cfg) continue;
      std::vector<double> taus, mses, secs;
      for (const auto* r : members) {
        taus.push_back(r->tau);
        mses.push_back(r->mse);
        secs.push_back(r->train_time);
      }
      SummaryRow row;
      row.config = cfg;
      row.budget = key.second;
      row.trials = members.size();
      std::tie(row.tau_mean, row.tau_std) = detail::mean_std(taus);
      std::tie(row.mse_mean, row.mse_std) = detail::mean_std(mses);
      row.seconds_mean = detail::mean_std(secs).first;
      rows.push_back(row);
    }
  }
  return rows;
}

/// Shortest decimal text that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline constexpr const char* kResultsHeader = "config,budget,fold,seed,tau,mse,seconds";

inline void write_results_csv(std::ostream& out, std::span<const TrialResult> results) {
  out << kResultsHeader << '\n';
  for (const auto& r : results) {
    out << r.config << ',' << r.budget << ',' << r.fold << ',' << r.seed << ',' << format_double(r.tau) << ','
        << format_double(r.mse) << ',' << format_double(r.train_time) << '\n';
  }
}

inline std::vector<TrialResult> read_results_csv(std::istream& in, const std::string& name = "results") {
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader) {
    throw InputError(name + ": expected header '" + std::string(kResultsHeader) + "'");
  }
  std::vector<TrialResult> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      f.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (f.size() != 7) throw InputError(name + ":" + std::to_string(lineno) + ": expected 7 fields");
    try {
      TrialResult r;
      r.config = f[0];
      r.budget = std::stoull(f[1]);
      r.fold = std::stoi(f[2]);
      r.seed = std::stoull(f[3]);
      r.tau = std::stod(f[4]);
      r.mse = std::stod(f[5]);
      r.train_time = std::stod(f[6]);
      out.push_back(std::move(r));
    } catch (const std::exception&) {
      throw InputError(name + ":" + std::to_string(lineno) + ": malformed number");
    }
  }
  return out;
}

inline void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows) {
  out << "config,budget,trials,tau_mean,tau_std,mse_mean,mse_std,seconds_mean\n";
  for (const auto& r : rows) {
    out << r.config << ',' << r.budget << ',' << r.trials << ',' << format_double(r.tau_mean) << ','
        << format_double(r.tau_std) << ',' << format_double(r.mse_mean) << ',' << format_double(r.mse_std) << ','
        << format_double(r.seconds_mean) << '\n';
  }
}

/// One entry per configuration with per-budget arrays, like a table whose
/// columns are training-set sizes.
inline nlohmann::ordered_json summary_json(std::span<const SummaryRow> rows) {
  std::vector<std::size_t> budgets;
  std::vector<std::string> configs;
  for (const auto& r : rows) {
    if (std::find(budgets.begin(), budgets.end(), r.budget) == budgets.end()) budgets.push_back(r.budget);
    if (std::find(configs.begin(), configs.end(), r.config) == configs.end()) configs.push_back(r.config);
  }
  std::sort(budgets.begin(), budgets.end());
  nlohmann::ordered_json j;
  j["budgets"] = budgets;
  j["configurations"] = nlohmann::ordered_json::array();
  for (const auto& cfg : configs) {
    nlohmann::ordered_json c;
    c["name"] = cfg;
    std::vector<nlohmann::ordered_json> tau, tau_std, mse, mse_std, trials;
    for (std::size_t b : budgets) {
      const auto it = std::find_if(rows.begin(), rows.end(),
                                   [&](const SummaryRow& r) { return r.config == cfg && r.budget == b; });
      if (it == rows.end()) {
        for (auto* v : {&tau, &tau_std, &mse, &mse_std, &trials}) v->push_back(nullptr);
        continue;
      }
      tau.push_back(it->tau_mean);
      tau_std.push_back(it->tau_std);
      mse.push_back(it->mse_mean);
      mse_std.push_back(it->mse_std);
      trials.push_back(it->trials);
    }
    c["tau_mean"] = tau;
    c["tau_std"] = tau_std;
    c["mse_mean"] = mse;
    c["mse_std"] = mse_std;
    c["trials"] = trials;
    j["configurations"].push_back(std::move(c));
  }
  return j;
}

}  // namespace cole::evaluation

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

// Surrogate-assisted search over the NAS-Bench-201 cell space: a short
// regularized-evolution warm-up, then rounds of mutation around the best
// evaluated cells with the surrogate choosing which mutants to evaluate.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <numeric>
#include <optional>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cole/codegen.hpp"
#include "cole/embedding.hpp"
#include "cole/error.hpp"
#include "cole/evaluation.hpp"
#include "cole/nb201.hpp"
#include "cole/oracle.hpp"
#include "cole/rng.hpp"
#include "cole/surrogate.hpp"

namespace cole::search {

// --------------------------------------------------------------------------
// Architecture representations

class FeatureSource {
 public:
  virtual ~FeatureSource() = default;
  virtual std::string name() const = 0;
  /// Whether the surrogate should PCA-reduce these features first.
  virtual bool reduce_with_pca() const = 0;
  virtual Eigen::MatrixXd features(std::span<const nb201::CellGenotype> archs) const = 0;
};

class PathEncodingFeatures final : public FeatureSource {
 public:
  std::string name() const override { return "path"; }
  bool reduce_with_pca() const override { return false; }
  Eigen::MatrixXd features(std::span<const nb201::CellGenotype> archs) const override {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(archs.size()), static_cast<Eigen::Index>(nb201::kPathEncodingBits));
    for (std::size_t r = 0; r < archs.size(); ++r) {
      const auto bits = nb201::path_encode(archs[r]);
      for (std::size_t c = 0; c < nb201::kPathEncodingBits; ++c) {
        X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = bits[c] ? 1.0 : 0.0;
      }
    }
    return X;
  }
};

/// Code-text embeddings: emit each cell as source text, embed it with the
/// provider, and let the surrogate PCA-reduce the result.
class ColeFeatures final : public FeatureSource {
 public:
  ColeFeatures(std::shared_ptr<const embedding::EmbeddingProvider> provider,
               codegen::VerbosityMode mode = codegen::VerbosityMode::ExcludedHelper,
               codegen::ContextAddOns addons = {}, std::optional<codegen::TaskDescriptor> task = std::nullopt,
               std::shared_ptr<embedding::EmbeddingCache> cache = std::make_shared<embedding::EmbeddingCache>(),
               embedding::EmbedOptions options = {})
      : provider_(std::move(provider)),
        mode_(mode),
        addons_(addons),
        task_(std::move(task)),
        cache_(std::move(cache)),
        options_(options) {}

  std::string name() const override { return "cole"; }
  bool reduce_with_pca() const override { return true; }

  Eigen::MatrixXd features(std::span<const nb201::CellGenotype> archs) const override {
    std::vector<std::string> texts;
    texts.reserve(archs.size());
    for (const auto& g : archs) texts.push_back(codegen::emit_cell_code(g, mode_, addons_, task_).text);
    const auto vecs = embedding::embed_batch(*provider_, std::span<const std::string>(texts), cache_.get(), options_);
    Eigen::MatrixXd X(static_cast<Eigen::Index>(archs.size()), static_cast<Eigen::Index>(provider_->dim()));
    for (std::size_t r = 0; r < vecs.size(); ++r) {
      for (std::size_t c = 0; c < vecs[r].values.size(); ++c) {
        X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = vecs[r].values[c];
      }
    }
    return X;
  }

 private:
  std::shared_ptr<const embedding::EmbeddingProvider> provider_;
  codegen::VerbosityMode mode_;
  codegen::ContextAddOns addons_;
  std::optional<codegen::TaskDescriptor> task_;
  std::shared_ptr<embedding::EmbeddingCache> cache_;
  embedding::EmbedOptions options_;
};

/// Same value for every architecture; isolates the loop structure from the
/// features in tests.
class ConstantFeatures final : public FeatureSource {
 public:
  explicit ConstantFeatures(std::size_t dim = 4) : dim_(dim) {}
  std::string name() const override { return "constant"; }
  bool reduce_with_pca() const override { return false; }
  Eigen::MatrixXd features(std::span<const nb201::CellGenotype> archs) const override {
    return Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(archs.size()), static_cast<Eigen::Index>(dim_));
  }

 private:
  std::size_t dim_;
};

// --------------------------------------------------------------------------
// Configuration and traces

enum class Acquisition { GreedyMean, EnsembleMeanStd };

struct SearchConfig {
  std::size_t total_budget = 500;
  std::size_t init_evals = 20;
  std::size_t retrain_interval = 10;
  std::size_t round_size = 10;
  std::size_t parents_per_round = 10;
  std::size_t mutants_per_parent = 10;
  std::size_t population_size = 10;  // warm-up population
  std::size_t tournament_size = 5;
  std::size_t ensemble_size = 1;
  Acquisition acquisition = Acquisition::GreedyMean;
  double ucb_lambda = 1.0;
  numerics::PipelineConfig surrogate;

  void validate() const {
    if (init_evals >= total_budget) throw InputError("search: init_evals must be < total_budget");
    if (population_size == 0 || population_size > init_evals) {
      throw InputError("search: warm-up population must be in [1, init_evals]");
    }
    if (tournament_size == 0 || tournament_size > population_size) {
      throw InputError("search: tournament size must be in [1, population_size]");
    }
    if (retrain_interval == 0 || round_size == 0) throw InputError("search: retrain interval and round size must be > 0");
    if (round_size > parents_per_round * mutants_per_parent) {
      throw InputError("search: round_size exceeds candidates generated per round");
    }
    if (ensemble_size == 0) throw InputError("search: ensemble_size must be >= 1");
    if (acquisition == Acquisition::EnsembleMeanStd && ensemble_size < 2) {
      throw InputError("search: mean+std acquisition needs an ensemble of at least 2");
    }
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["total_budget"] = total_budget;
    j["init_evals"] = init_evals;
    j["retrain_interval"] = retrain_interval;
    j["round_size"] = round_size;
    j["parents_per_round"] = parents_per_round;
    j["mutants_per_parent"] = mutants_per_parent;
    j["population_size"] = population_size;
    j["tournament_size"] = tournament_size;
    j["ensemble_size"] = ensemble_size;
    j["acquisition"] = acquisition == Acquisition::GreedyMean ? "greedy_mean" : "ensemble_mean_std";
    j["ucb_lambda"] = ucb_lambda;
    j["pca_components"] = surrogate.pca_components ? nlohmann::ordered_json(*surrogate.pca_components) : nlohmann::ordered_json(nullptr);
    const auto& t = surrogate.train;
    j["loss"] = t.loss.kind == numerics::LossKind::Kind::Mse ? "mse" : "hinge";
    j["epsilon"] = t.loss.epsilon;
    j["hidden_width"] = t.mlp.hidden_width;
    j["hidden_layers"] = t.mlp.hidden_layers;
    j["dropout_p"] = t.mlp.dropout_p;
    j["learning_rate"] = t.optimizer.learning_rate;
    j["epochs"] = t.optimizer.epochs;
    return j;
  }
};

enum class RecordOrigin { Warmup, Surrogate, RandomFallback, Random };

inline std::string_view origin_name(RecordOrigin o) {
  switch (o) {
    case RecordOrigin::Warmup: return "warmup";
    case RecordOrigin::Surrogate: return "surrogate";
    case RecordOrigin::RandomFallback: return "random_fallback";
    case RecordOrigin::Random: return "random";
  }
  return "random";
}

struct TraceRecord {
  std::size_t eval_index = 0;  // 1-based
  nb201::CellGenotype arch;
  double accuracy = 0.0;
  double best_so_far = 0.0;
  RecordOrigin origin = RecordOrigin::Surrogate;
};

struct SearchTrace {
  std::vector<TraceRecord> records;
  std::vector<std::size_t> retrain_points;  // evaluation counts at which the surrogate was (re)fitted
  std::string representation;
  std::string config_digest;
  std::uint64_t seed = 0;

  void append(const nb201::CellGenotype& g, double acc, RecordOrigin origin) {
    const double best = records.empty() ? acc : std::max(records.back().best_so_far, acc);
    records.push_back({records.size() + 1, g, acc, best, origin});
  }
};

inline std::string config_digest(const SearchConfig& cfg, const std::string& representation) {
  nlohmann::ordered_json j = cfg.to_json();
  j["representation"] = representation;
  return embedding::sha256_hex(j.dump());
}

// --------------------------------------------------------------------------
// Warm-up

namespace detail {

inline nb201::CellGenotype random_unevaluated(const oracle::EvaluationSession& session, Rng& rng) {
  const auto& table = session.table();
  if (session.evaluations() >= table.size()) throw Error("search: every architecture has been evaluated");
  while (true) {
    const auto& g = table.genotype(rng.uniform_index(table.size()));
    if (!session.evaluated(g)) return g;
  }
}

inline nb201::CellGenotype fresh_mutant(const nb201::CellGenotype& parent, const oracle::EvaluationSession& session,
                                        Rng& rng) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    nb201::CellGenotype child = nb201::mutate(parent, rng);
    if (session.table().contains(child) && !session.evaluated(child)) return child;
  }
  return random_unevaluated(session, rng);
}

}  // namespace detail

struct Individual {
  nb201::CellGenotype arch;
  double accuracy = 0.0;
};

/// Evaluates `population_size` random cells, then runs aging evolution
/// (tournament of `tournament_size` drawn without replacement, mutate the
/// winner, evaluate, drop the oldest) until `n` evaluations are spent.
/// Returns the final population; every evaluation is appended to `trace`.
inline std::deque<Individual> regularized_evolution_init(oracle::EvaluationSession& session, std::size_t n,
                                                         std::size_t population_size, std::size_t tournament_size,
                                                         Rng& rng, SearchTrace& trace) {
  if (population_size == 0 || population_size > n || tournament_size == 0 || tournament_size > population_size) {
    throw InputError("regularized evolution: need 1 <= tournament <= population <= n");
  }
  std::deque<Individual> population;
  while (population.size() < population_size) {
    const auto g = detail::random_unevaluated(session, rng);
    const double acc = session.evaluate(g);
    trace.append(g, acc, RecordOrigin::Warmup);
    population.push_back({g, acc});
  }
  std::vector<std::size_t> slots(population_size);
  while (session.evaluations() < n) {
    std::iota(slots.begin(), slots.end(), std::size_t{0});
    std::size_t winner = 0;
    double best = -1.0;
    for (std::size_t k = 0; k < tournament_size; ++k) {
      std::swap(slots[k], slots[k + rng.uniform_index(slots.size() - k)]);
      const auto& cand = population[slots[k]];
      if (cand.accuracy > best) {
        best = cand.accuracy;
        winner = slots[k];
      }
    }
    const auto child = detail::fresh_mutant(population[winner].arch, session, rng);
    const double acc = session.evaluate(child);
    trace.append(child, acc, RecordOrigin::Warmup);
    population.push_back({child, acc});
    population.pop_front();
  }
  return population;
}

// --------------------------------------------------------------------------
// Search loops

/// One full surrogate-assisted run. Exactly `total_budget` oracle
/// evaluations, warm-up included.
inline SearchTrace surrogate_search(const SearchConfig& cfg, const FeatureSource& features,
                                    const oracle::BenchmarkTable& table, oracle::Task task, std::uint64_t seed) {
  cfg.validate();
  if (cfg.total_budget > table.size()) {
    throw InputError("search: budget " + std::to_string(cfg.total_budget) + " exceeds the " +
                     std::to_string(table.size()) + " architectures available");
  }
  SearchTrace trace;
  trace.seed = seed;
  trace.representation = features.name();
  trace.config_digest = config_digest(cfg, features.name());
  oracle::EvaluationSession session(table, task);
  Rng rng(derive_seed({0x5ea4c4, seed}));
  regularized_evolution_init(session, cfg.init_evals, cfg.population_size, cfg.tournament_size, rng, trace);

  std::vector<nb201::CellGenotype> train_archs;
  Eigen::MatrixXd train_x;
  std::vector<numerics::SurrogateModel> models;
  std::size_t next_retrain = cfg.init_evals;
  std::size_t round = 0;

  while (session.evaluations() < cfg.total_budget) {
    const std::size_t spent = session.evaluations();
    if (spent >= next_retrain || models.empty()) {
      // Features for newly evaluated cells only; earlier rows are reused.
      std::vector<nb201::CellGenotype> fresh;
      for (std::size_t r = train_archs.size(); r < trace.records.size(); ++r) fresh.push_back(trace.records[r].arch);
      const Eigen::MatrixXd fx = features.features(fresh);
      Eigen::MatrixXd grown(static_cast<Eigen::Index>(trace.records.size()), fx.cols());
      if (train_x.rows() > 0) grown.topRows(train_x.rows()) = train_x;
      grown.bottomRows(fx.rows()) = fx;
      train_x = std::move(grown);
      train_archs.insert(train_archs.end(), fresh.begin(), fresh.end());
      Eigen::VectorXd y(static_cast<Eigen::Index>(trace.records.size()));
      for (std::size_t r = 0; r < trace.records.size(); ++r) y(static_cast<Eigen::Index>(r)) = trace.records[r].accuracy;

      numerics::PipelineConfig pc = cfg.surrogate;
      if (!features.reduce_with_pca()) pc.pca_components.reset();
      models.clear();
      for (std::size_t m = 0; m < cfg.ensemble_size; ++m) {
        pc.train.seed = derive_seed({seed, round, m});
        models.push_back(numerics::fit_pipeline(train_x, y, pc));
      }
      trace.retrain_points.push_back(spent);
      next_retrain = (spent / cfg.retrain_interval + 1) * cfg.retrain_interval;
    }

    // Parents: best evaluated cells by true accuracy (earlier first on ties).
    std::vector<std::size_t> order(trace.records.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return trace.records[a].accuracy > trace.records[b].accuracy;
    });
    const std::size_t n_parents = std::min(cfg.parents_per_round, order.size());

    std::vector<nb201::CellGenotype> pool;
    std::vector<RecordOrigin> pool_origin;
    std::unordered_set<std::size_t> seen;
    const auto offer = [&](const nb201::CellGenotype& g, RecordOrigin o) {
      if (!table.contains(g) || session.evaluated(g) || !seen.insert(g.index()).second) return;
      pool.push_back(g);
      pool_origin.push_back(o);
    };
    for (std::size_t p = 0; p < n_parents; ++p) {
      for (std::size_t k = 0; k < cfg.mutants_per_parent; ++k) {
        offer(nb201::mutate(trace.records[order[p]].arch, rng), RecordOrigin::Surrogate);
      }
    }
    const std::size_t want = std::min(cfg.round_size, cfg.total_budget - session.evaluations());
    if (pool.size() < want) {
      for (std::size_t p = 0; p < n_parents; ++p) {
        for (std::size_t k = 0; k < cfg.mutants_per_parent; ++k) {
          offer(nb201::mutate(nb201::mutate(trace.records[order[p]].arch, rng), rng), RecordOrigin::Surrogate);
        }
      }
    }
    while (pool.size() < want) offer(detail::random_unevaluated(session, rng), RecordOrigin::RandomFallback);

    const Eigen::MatrixXd cx = features.features(pool);
    Eigen::MatrixXd preds(cx.rows(), static_cast<Eigen::Index>(models.size()));
    for (std::size_t m = 0; m < models.size(); ++m) preds.col(static_cast<Eigen::Index>(m)) = numerics::predict(models[m], cx);
    Eigen::VectorXd score = preds.rowwise().mean();
    if (cfg.acquisition == Acquisition::EnsembleMeanStd) {
      const Eigen::MatrixXd centered = preds.colwise() - score;
      const Eigen::VectorXd sd =
          (centered.array().square().rowwise().sum() / static_cast<double>(models.size() - 1)).sqrt();
      score += cfg.ucb_lambda * sd;
    }
    std::vector<std::size_t> rank(pool.size());
    std::iota(rank.begin(), rank.end(), std::size_t{0});
    std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
      return score(static_cast<Eigen::Index>(a)) > score(static_cast<Eigen::Index>(b));
    });
    for (std::size_t k = 0; k < want; ++k) {
      const auto& g = pool[rank[k]];
      trace.append(g, session.evaluate(g), pool_origin[rank[k]]);
    }
    ++round;
  }
  return trace;
}

/// Uniform sampling without replacement over the table.
inline SearchTrace random_search(const oracle::BenchmarkTable& table, oracle::Task task, std::size_t budget,
                                 std::uint64_t seed) {
  if (budget > table.size()) {
    throw InputError("random search: budget " + std::to_string(budget) + " exceeds the " +
                     std::to_string(table.size()) + " architectures available");
  }
  SearchTrace trace;
  trace.seed = seed;
  trace.representation = "random";
  trace.config_digest = embedding::sha256_hex("random_search:budget=" + std::to_string(budget));
  std::vector<std::size_t> rows(table.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  Rng rng(derive_seed({0x4a4d, seed}));
  oracle::EvaluationSession session(table, task);
  for (std::size_t k = 0; k < budget; ++k) {
    std::swap(rows[k], rows[k + rng.uniform_index(rows.size() - k)]);
    const auto& g = table.genotype(rows[k]);
    trace.append(g, session.evaluate(g), RecordOrigin::Random);
  }
  return trace;
}

// --------------------------------------------------------------------------
// Trajectory metrics

/// Threshold for "within pct% of top": relative (1 - pct/100) * top by
/// default, or absolute top - pct.
inline double within_threshold(double top_accuracy, double pct, bool relative) {
  return relative ? (1.0 - pct / 100.0) * top_accuracy : top_accuracy - pct;
}

/// Smallest 1-based evaluation index whose best_so_far reaches the
/// threshold, or nullopt.
inline std::optional<std::size_t> evals_to_within_pct(const SearchTrace& trace, double top_accuracy, double pct = 1.0,
                                                      bool relative = true) {
  if (!(top_accuracy > 0.0)) throw InputError("evals_to_within_pct: top accuracy must be > 0");
  const double thr = within_threshold(top_accuracy, pct, relative);
  for (const auto& r : trace.records) {
    if (r.best_so_far >= thr) return r.eval_index;
  }
  return std::nullopt;
}

struct TrajectoryComparison {
  std::vector<double> mean_a, std_a, mean_b, std_b;  // per evaluation index
  std::optional<double> median_evals_a, median_evals_b;
  std::size_t reached_a = 0, reached_b = 0;
};

namespace detail {

// Runs that never reach the threshold count as budget + 1; a median above
// the budget is reported as "not reached".
inline std::optional<double> median_evals(std::span<const SearchTrace> traces, double top, double pct, bool relative,
                                          std::size_t budget, std::size_t& reached) {
  std::vector<double> v;
  reached = 0;
  for (const auto& t : traces) {
    const auto e = evals_to_within_pct(t, top, pct, relative);
    reached += e.has_value();
    v.push_back(e ? static_cast<double>(*e) : static_cast<double>(budget + 1));
  }
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  const double med = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  if (med > static_cast<double>(budget)) return std::nullopt;
  return med;
}

inline void per_index_stats(std::span<const SearchTrace> traces, std::size_t len, std::vector<double>& mean,
                            std::vector<double>& sd) {
  mean.assign(len, 0.0);
  sd.assign(len, 0.0);
  const double n = static_cast<double>(traces.size());
  for (std::size_t i = 0; i < len; ++i) {
    double s = 0.0;
    for (const auto& t : traces) s += t.records[i].best_so_far;
    mean[i] = s / n;
    if (traces.size() > 1) {
      double ss = 0.0;
      for (const auto& t : traces) ss += (t.records[i].best_so_far - mean[i]) * (t.records[i].best_so_far - mean[i]);
      sd[i] = std::sqrt(ss / (n - 1.0));
    }
  }
}

}  // namespace detail

/// Per-index mean and sample std of best_so_far for two groups of runs,
/// plus each group's median evaluations-to-threshold.
inline TrajectoryComparison compare_trajectories(std::span<const SearchTrace> a, std::span<const SearchTrace> b,
                                                 double top_accuracy, double pct = 1.0, bool relative = true) {
  if (a.empty() || b.empty()) throw InputError("compare_trajectories: both sides need at least one trace");
  const std::size_t len = a.front().records.size();
  for (auto side : {a, b}) {
    for (const auto& t : side) {
      if (t.records.size() != len) throw InputError("compare_trajectories: ragged trace lengths");
    }
  }
  TrajectoryComparison out;
  detail::per_index_stats(a, len, out.mean_a, out.std_a);
  detail::per_index_stats(b, len, out.mean_b, out.std_b);
  out.median_evals_a = detail::median_evals(a, top_accuracy, pct, relative, len, out.reached_a);
  out.median_evals_b = detail::median_evals(b, top_accuracy, pct, relative, len, out.reached_b);
  return out;
}

inline void write_comparison_csv(std::ostream& out, const TrajectoryComparison& c) {
  using evaluation::format_double;
  out << "eval_index,mean_a,std_a,mean_b,std_b\n";
  for (std::size_t i = 0; i < c.mean_a.size(); ++i) {
    out << i + 1 << ',' << format_double(c.mean_a[i]) << ',' << format_double(c.std_a[i]) << ','
        << format_double(c.mean_b[i]) << ',' << format_double(c.std_b[i]) << '\n';
  }
}

inline void write_trace_csv(std::ostream& out, const SearchTrace& t) {
  using evaluation::format_double;
  out << "eval_index,arch,accuracy,best_so_far\n";
  for (const auto& r : t.records) {
    out << r.eval_index << ",\"" << nb201::format_arch_string(r.arch) << "\"," << format_double(r.accuracy) << ','
        << format_double(r.best_so_far) << '\n';
  }
}

inline nlohmann::ordered_json trace_header_json(const SearchTrace& t) {
  nlohmann::ordered_json j;
  j["representation"] = t.representation;
  j["config_digest"] = t.config_digest;
  j["seed"] = t.seed;
  j["evaluations"] = t.records.size();
  j["retrain_points"] = t.retrain_points;
  std::vector<std::size_t> fallback;
  for (const auto& r : t.records) {
    if (r.origin == RecordOrigin::RandomFallback) fallback.push_back(r.eval_index);
  }
  j["random_fallback_evals"] = fallback;
  return j;
}

/// Reads a trace CSV back (accuracy columns only; origins are not stored).
inline SearchTrace read_trace_csv(std::istream& in, const std::string& name = "trace") {
  std::string line;
  if (!std::getline(in, line) || line != "eval_index,arch,accuracy,best_so_far") {
    throw InputError(name + ": expected trace header");
  }
  SearchTrace t;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::size_t q1 = line.find('"'), q2 = line.find('"', q1 + 1);
    if (q1 == std::string::npos || q2 == std::string::npos || q2 + 1 >= line.size()) {
      throw InputError(name + ":" + std::to_string(lineno) + ": malformed row");
    }
    try {
      TraceRecord r;
      r.eval_index = std::stoull(line.substr(0, q1 - 1));
      r.arch = nb201::parse_arch_string(line.substr(q1 + 1, q2 - q1 - 1));
      const std::size_t c = line.find(',', q2 + 2);
      r.accuracy = std::stod(line.substr(q2 + 2, c - q2 - 2));
      r.best_so_far = std::stod(line.substr(c + 1));
      if (r.eval_index != t.records.size() + 1) throw InputError("non-contiguous eval_index");
      t.records.push_back(r);
    } catch (const InputError& e) {
      throw InputError(name + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const std::exception&) {
      throw InputError(name + ":" + std::to_string(lineno) + ": malformed number");
    }
  }
  return t;
}

}  // namespace cole::search

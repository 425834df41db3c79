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

// Run configuration for the command-line tool: a versioned JSON document,
// strictly validated, with the resolved form written next to every run's
// outputs.

#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cole/codegen.hpp"
#include "cole/embedding.hpp"
#include "cole/error.hpp"
#include "cole/evaluation.hpp"
#include "cole/oracle.hpp"
#include "cole/remote_provider.hpp"
#include "cole/search.hpp"
#include "cole/surrogate.hpp"

namespace cole::config {

inline constexpr int kConfigVersion = 1;

struct ProviderSettings {
  std::string kind = "structural_mock";  // hash | structural_mock | cache | remote
  std::size_t dim = 128;                 // hash and remote only
  std::uint64_t seed = 0;
  double noise = 0.0;  // structural_mock only
  std::string cache_path;
  std::string url;  // remote; falls back to COLE_EMBED_URL
  std::string token_env = "COLE_EMBED_TOKEN";
  std::string provider_id;  // remote; defaults to "remote:<url>"
  std::size_t batch_size = 16;
  std::size_t max_in_flight = 4;
  int retries = 3;
};

struct CodegenSettings {
  std::string mode = "excluded";
  bool backbone = false;
  bool comment = false;
};

struct SurrogateSettings {
  std::optional<int> pca_components = 128;
  std::string loss = "hinge";
  double epsilon = 0.1;
  std::size_t hidden_width = 128;
  std::size_t hidden_layers = 3;
  double dropout = 0.1;
  double learning_rate = 1e-3;
  int epochs = 200;
};

struct CvSettings {
  std::string config_name = "Base";
  std::string representation = "cole";  // cole | path
  std::vector<std::size_t> budgets = evaluation::default_budgets();
  int folds = 10;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  int bins = 5;
};

struct SearchSettings {
  std::size_t trials = 100;
  std::vector<std::string> representations = {"cole", "path"};  // cole | path | random
  std::size_t total_budget = 500;
  std::size_t init_evals = 20;
  std::size_t retrain_interval = 10;
  std::size_t round_size = 10;
  std::size_t parents_per_round = 10;
  std::size_t mutants_per_parent = 10;
  std::size_t population_size = 10;
  std::size_t tournament_size = 5;
  std::size_t ensemble_size = 1;
  std::string acquisition = "greedy_mean";  // greedy_mean | ensemble_mean_std
  double ucb_lambda = 1.0;
  double within_pct = 1.0;
  bool relative_threshold = true;
};

struct OracleSettings {
  std::string source = "synthetic";  // synthetic | csv
  std::optional<std::uint64_t> seed;  // synthetic; defaults to the root seed
  std::string path;
};

struct RunConfig {
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::string output_dir = "cole-out";
  std::string task = "cifar10_valid";
  OracleSettings oracle;
  ProviderSettings provider;
  CodegenSettings codegen;
  SurrogateSettings surrogate;
  CvSettings cv;
  SearchSettings search;
};

namespace detail {

/// Reads optional keys from one JSON object and rejects any key it was not
/// asked about.
class ObjectReader {
 public:
  ObjectReader(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw InputError("config: '" + path_ + "' must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const nlohmann::json::exception&) {
      throw InputError("config: '" + where(key) + "' has the wrong type");
    }
  }

  template <class T>
  void get_optional(const char* key, std::optional<T>& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    if (it->is_null()) {
      out.reset();
      return;
    }
    T v{};
    get(key, v);
    out = v;
  }

  std::optional<nlohmann::json> child(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return std::nullopt;
    return std::optional<nlohmann::json>(std::in_place, *it);
  }

  std::string where(const char* key) const { return path_.empty() ? std::string(key) : path_ + "." + key; }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) {
        throw InputError("config: unknown key '" + (path_.empty() ? key : path_ + "." + key) + "'");
      }
    }
  }

 private:
  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InputError("config: " + what);
}

}  // namespace detail

inline void validate(const RunConfig& c) {
  using detail::require;
  require(c.jobs >= 1, "jobs must be >= 1");
  require(!c.output_dir.empty(), "output_dir must be non-empty");
  (void)oracle::parse_task(c.task);
  require(c.oracle.source == "synthetic" || c.oracle.source == "csv", "oracle.source must be 'synthetic' or 'csv'");
  require(c.oracle.source != "csv" || !c.oracle.path.empty(), "oracle.path is required for a csv oracle");
  const auto& p = c.provider;
  require(p.kind == "hash" || p.kind == "structural_mock" || p.kind == "cache" || p.kind == "remote",
          "provider.kind must be one of hash, structural_mock, cache, remote");
  require(p.dim >= 1, "provider.dim must be >= 1");
  require(p.noise >= 0.0, "provider.noise must be >= 0");
  require(p.kind != "cache" || !p.cache_path.empty(), "provider.cache_path is required for the cache provider");
  require(p.batch_size >= 1 && p.max_in_flight >= 1 && p.retries >= 1,
          "provider batch_size, max_in_flight and retries must be >= 1");
  (void)codegen::parse_mode(c.codegen.mode);
  const auto& s = c.surrogate;
  require(!s.pca_components || *s.pca_components >= 1, "surrogate.pca_components must be >= 1 or null");
  require(s.loss == "hinge" || s.loss == "mse", "surrogate.loss must be 'hinge' or 'mse'");
  require(s.epsilon >= 0.0, "surrogate.epsilon must be >= 0");
  require(s.hidden_width >= 1, "surrogate.hidden_width must be >= 1");
  require(s.dropout >= 0.0 && s.dropout < 1.0, "surrogate.dropout must be in [0, 1)");
  require(s.learning_rate > 0.0 && s.epochs >= 1, "surrogate learning_rate and epochs must be positive");
  require(c.cv.representation == "cole" || c.cv.representation == "path", "cv.representation must be 'cole' or 'path'");
  require(!c.cv.budgets.empty() && !c.cv.seeds.empty(), "cv.budgets and cv.seeds must be non-empty");
  require(c.cv.folds >= 2 && c.cv.bins >= 1, "cv.folds must be >= 2 and cv.bins >= 1");
  const auto& q = c.search;
  require(q.trials >= 1, "search.trials must be >= 1");
  require(!q.representations.empty(), "search.representations must be non-empty");
  std::set<std::string> reps;
  for (const auto& r : q.representations) {
    require(r == "cole" || r == "path" || r == "random", "search representation '" + r + "' is not cole, path or random");
    require(reps.insert(r).second, "search representation '" + r + "' listed twice");
  }
  require(q.acquisition == "greedy_mean" || q.acquisition == "ensemble_mean_std",
          "search.acquisition must be 'greedy_mean' or 'ensemble_mean_std'");
  require(q.within_pct > 0.0, "search.within_pct must be > 0");
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig c;
  detail::ObjectReader top(j, "");
  int version = 0;
  top.get("version", version);
  if (version != kConfigVersion) {
    throw InputError("config: version must be " + std::to_string(kConfigVersion) + " (got " + std::to_string(version) + ")");
  }
  top.get("seed", c.seed);
  top.get("jobs", c.jobs);
  top.get("output_dir", c.output_dir);
  top.get("task", c.task);
  if (auto o = top.child("oracle")) {
    detail::ObjectReader r(*o, "oracle");
    r.get("source", c.oracle.source);
    r.get_optional("seed", c.oracle.seed);
    r.get("path", c.oracle.path);
    r.finish();
  }
  if (auto o = top.child("provider")) {
    detail::ObjectReader r(*o, "provider");
    auto& p = c.provider;
    r.get("kind", p.kind);
    r.get("dim", p.dim);
    r.get("seed", p.seed);
    r.get("noise", p.noise);
    r.get("cache_path", p.cache_path);
    r.get("url", p.url);
    r.get("token_env", p.token_env);
    r.get("provider_id", p.provider_id);
    r.get("batch_size", p.batch_size);
    r.get("max_in_flight", p.max_in_flight);
    r.get("retries", p.retries);
    r.finish();
  }
  if (auto o = top.child("codegen")) {
    detail::ObjectReader r(*o, "codegen");
    r.get("mode", c.codegen.mode);
    r.get("backbone", c.codegen.backbone);
    r.get("comment", c.codegen.comment);
    r.finish();
  }
  if (auto o = top.child("surrogate")) {
    detail::ObjectReader r(*o, "surrogate");
    auto& s = c.surrogate;
    r.get_optional("pca_components", s.pca_components);
    r.get("loss", s.loss);
    r.get("epsilon", s.epsilon);
    r.get("hidden_width", s.hidden_width);
    r.get("hidden_layers", s.hidden_layers);
    r.get("dropout", s.dropout);
    r.get("learning_rate", s.learning_rate);
    r.get("epochs", s.epochs);
    r.finish();
  }
  if (auto o = top.child("cv")) {
    detail::ObjectReader r(*o, "cv");
    r.get("config_name", c.cv.config_name);
    r.get("representation", c.cv.representation);
    r.get("budgets", c.cv.budgets);
    r.get("folds", c.cv.folds);
    r.get("seeds", c.cv.seeds);
    r.get("bins", c.cv.bins);
    r.finish();
  }
  if (auto o = top.child("search")) {
    detail::ObjectReader r(*o, "search");
    auto& s = c.search;
    r.get("trials", s.trials);
    r.get("representations", s.representations);
    r.get("total_budget", s.total_budget);
    r.get("init_evals", s.init_evals);
    r.get("retrain_interval", s.retrain_interval);
    r.get("round_size", s.round_size);
    r.get("parents_per_round", s.parents_per_round);
    r.get("mutants_per_parent", s.mutants_per_parent);
    r.get("population_size", s.population_size);
    r.get("tournament_size", s.tournament_size);
    r.get("ensemble_size", s.ensemble_size);
    r.get("acquisition", s.acquisition);
    r.get("ucb_lambda", s.ucb_lambda);
    r.get("within_pct", s.within_pct);
    r.get("relative_threshold", s.relative_threshold);
    r.finish();
  }
  top.finish();
  validate(c);
  return c;
}

/// Every field, defaults included, in a fixed key order.
inline nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["version"] = kConfigVersion;
  j["seed"] = c.seed;
  j["jobs"] = c.jobs;
  j["output_dir"] = c.output_dir;
  j["task"] = c.task;
  j["oracle"] = {{"source", c.oracle.source},
                 {"seed", c.oracle.seed ? nlohmann::ordered_json(*c.oracle.seed) : nlohmann::ordered_json(nullptr)},
                 {"path", c.oracle.path}};
  const auto& p = c.provider;
  j["provider"] = {{"kind", p.kind},           {"dim", p.dim},
                   {"seed", p.seed},           {"noise", p.noise},
                   {"cache_path", p.cache_path}, {"url", p.url},
                   {"token_env", p.token_env}, {"provider_id", p.provider_id},
                   {"batch_size", p.batch_size}, {"max_in_flight", p.max_in_flight},
                   {"retries", p.retries}};
  j["codegen"] = {{"mode", c.codegen.mode}, {"backbone", c.codegen.backbone}, {"comment", c.codegen.comment}};
  const auto& s = c.surrogate;
  j["surrogate"] = {
      {"pca_components", s.pca_components ? nlohmann::ordered_json(*s.pca_components) : nlohmann::ordered_json(nullptr)},
      {"loss", s.loss},
      {"epsilon", s.epsilon},
      {"hidden_width", s.hidden_width},
      {"hidden_layers", s.hidden_layers},
      {"dropout", s.dropout},
      {"learning_rate", s.learning_rate},
      {"epochs", s.epochs}};
  j["cv"] = {{"config_name", c.cv.config_name}, {"representation", c.cv.representation},
             {"budgets", c.cv.budgets},         {"folds", c.cv.folds},
             {"seeds", c.cv.seeds},             {"bins", c.cv.bins}};
  const auto& q = c.search;
  j["search"] = {{"trials", q.trials},
                 {"representations", q.representations},
                 {"total_budget", q.total_budget},
                 {"init_evals", q.init_evals},
                 {"retrain_interval", q.retrain_interval},
                 {"round_size", q.round_size},
                 {"parents_per_round", q.parents_per_round},
                 {"mutants_per_parent", q.mutants_per_parent},
                 {"population_size", q.population_size},
                 {"tournament_size", q.tournament_size},
                 {"ensemble_size", q.ensemble_size},
                 {"acquisition", q.acquisition},
                 {"ucb_lambda", q.ucb_lambda},
                 {"within_pct", q.within_pct},
                 {"relative_threshold", q.relative_threshold}};
  return j;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("config: '" + path + "' is not valid JSON: " + e.what());
  }
  return run_config_from_json(j);
}

inline std::string config_digest(const RunConfig& c) { return embedding::sha256_hex(to_json(c).dump()); }

// --------------------------------------------------------------------------
// Building pipeline pieces from a config

inline oracle::Task task_of(const RunConfig& c) { return oracle::parse_task(c.task); }

inline codegen::TaskDescriptor task_descriptor(oracle::Task t) {
  switch (t) {
    case oracle::Task::Cifar10Valid: return codegen::TaskDescriptor::cifar10();
    case oracle::Task::Cifar100Test: return codegen::TaskDescriptor::cifar100();
    case oracle::Task::ImageNet16Test: return codegen::TaskDescriptor::imagenet16_120();
  }
  return codegen::TaskDescriptor::cifar10();
}

inline codegen::ContextAddOns addons_of(const RunConfig& c) { return {c.codegen.backbone, c.codegen.comment}; }

inline embedding::EmbedOptions embed_options(const RunConfig& c) {
  embedding::EmbedOptions o;
  o.batch_size = c.provider.batch_size;
  o.max_in_flight = c.provider.max_in_flight;
  o.retries = c.provider.retries;
  return o;
}

inline std::shared_ptr<const embedding::EmbeddingProvider> make_provider(const RunConfig& c) {
  const auto& p = c.provider;
  if (p.kind == "hash") return std::make_shared<embedding::HashProvider>(p.seed, p.dim);
  if (p.kind == "structural_mock") return std::make_shared<embedding::StructuralMockProvider>(p.noise, p.seed);
  if (p.kind == "cache") {
    return std::make_shared<embedding::CacheFileProvider>(embedding::EmbeddingCache::load(p.cache_path));
  }
  std::string token;
  if (!p.token_env.empty()) {
    if (const char* v = std::getenv(p.token_env.c_str())) token = v;
  }
  return std::make_shared<embedding::RemoteProvider>(embedding::RemoteEndpoint::from_env(p.url, token), p.dim,
                                                     p.provider_id);
}

inline oracle::BenchmarkTable load_oracle(const RunConfig& c) {
  if (c.oracle.source == "csv") return oracle::load_benchmark_table(c.oracle.path);
  return oracle::synth_benchmark(c.oracle.seed.value_or(c.seed));
}

inline numerics::PipelineConfig pipeline_config(const RunConfig& c) {
  numerics::PipelineConfig pc;
  pc.pca_components = c.surrogate.pca_components;
  auto& t = pc.train;
  t.loss = c.surrogate.loss == "mse" ? numerics::LossKind::mse() : numerics::LossKind::hinge(c.surrogate.epsilon);
  t.mlp.hidden_width = c.surrogate.hidden_width;
  t.mlp.hidden_layers = c.surrogate.hidden_layers;
  t.mlp.dropout_p = c.surrogate.dropout;
  t.optimizer.learning_rate = c.surrogate.learning_rate;
  t.optimizer.epochs = c.surrogate.epochs;
  return pc;
}

inline search::SearchConfig search_config(const RunConfig& c) {
  search::SearchConfig s;
  const auto& q = c.search;
  s.total_budget = q.total_budget;
  s.init_evals = q.init_evals;
  s.retrain_interval = q.retrain_interval;
  s.round_size = q.round_size;
  s.parents_per_round = q.parents_per_round;
  s.mutants_per_parent = q.mutants_per_parent;
  s.population_size = q.population_size;
  s.tournament_size = q.tournament_size;
  s.ensemble_size = q.ensemble_size;
  s.acquisition = q.acquisition == "ensemble_mean_std" ? search::Acquisition::EnsembleMeanStd
                                                        : search::Acquisition::GreedyMean;
  s.ucb_lambda = q.ucb_lambda;
  s.surrogate = pipeline_config(c);
  return s;
}

}  // namespace cole::config

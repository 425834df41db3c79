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


#include <algorithm>
#include <memory>
#include <set>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "cole/embedding.hpp"
#include "cole/oracle.hpp"
#include "cole/search.hpp"

namespace {

using namespace cole;
using namespace cole::search;

const oracle::BenchmarkTable& table() {
  static const oracle::BenchmarkTable t = oracle::synth_benchmark(0);
  return t;
}

SearchConfig small_config(std::size_t budget = 60) {
  SearchConfig c;
  c.total_budget = budget;
  c.surrogate.pca_components = 8;
  c.surrogate.train.mlp.hidden_width = 16;
  c.surrogate.train.mlp.hidden_layers = 2;
  c.surrogate.train.optimizer.epochs = 15;
  return c;
}

void expect_well_formed(const SearchTrace& t, std::size_t budget) {
  ASSERT_EQ(t.records.size(), budget);
  std::set<std::size_t> seen;
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    const auto& r = t.records[i];
    EXPECT_EQ(r.eval_index, i + 1);
    EXPECT_TRUE(seen.insert(r.arch.index()).second) << "re-evaluated " << r.arch.index();
    EXPECT_EQ(r.accuracy, oracle::query(table(), r.arch, oracle::Task::Cifar10Valid));
    const double prev = i ? t.records[i - 1].best_so_far : r.accuracy;
    EXPECT_EQ(r.best_so_far, std::max(prev, r.accuracy));
  }
}

TEST(Search, PathTraceShape) {
  const PathEncodingFeatures path;
  const auto t = surrogate_search(small_config(), path, table(), oracle::Task::Cifar10Valid, 3);
  expect_well_formed(t, 60);
  EXPECT_EQ(t.retrain_points, (std::vector<std::size_t>{20, 30, 40, 50}));
  for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(t.records[i].origin, RecordOrigin::Warmup);
  for (std::size_t i = 20; i < 60; ++i) EXPECT_NE(t.records[i].origin, RecordOrigin::Warmup);
  EXPECT_EQ(t.representation, "path");
}

TEST(Search, ColeTraceShapeAndDeterminism) {
  auto provider = std::make_shared<embedding::StructuralMockProvider>(0.0, 1);
  const ColeFeatures cole(provider);
  const auto a = surrogate_search(small_config(), cole, table(), oracle::Task::Cifar10Valid, 5);
  const auto b = surrogate_search(small_config(), cole, table(), oracle::Task::Cifar10Valid, 5);
  expect_well_formed(a, 60);
  std::ostringstream sa, sb;
  write_trace_csv(sa, a);
  write_trace_csv(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
  const auto c = surrogate_search(small_config(), cole, table(), oracle::Task::Cifar10Valid, 6);
  std::ostringstream sc;
  write_trace_csv(sc, c);
  EXPECT_NE(sa.str(), sc.str());
}

TEST(Search, ScheduleDoesNotDependOnFeatures) {
  // Uneven budget: the last round is short.
  auto cfg = small_config(45);
  const ConstantFeatures flat;
  const PathEncodingFeatures path;
  const auto a = surrogate_search(cfg, flat, table(), oracle::Task::Cifar10Valid, 1);
  const auto b = surrogate_search(cfg, path, table(), oracle::Task::Cifar10Valid, 1);
  expect_well_formed(a, 45);
  expect_well_formed(b, 45);
  EXPECT_EQ(a.retrain_points, b.retrain_points);
  EXPECT_EQ(a.retrain_points, (std::vector<std::size_t>{20, 30, 40}));
  // Warm-up uses the same stream, so the first 20 cells agree.
  for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(a.records[i].arch, b.records[i].arch);
}

TEST(Search, RetrainIntervalIndependentOfRoundSize) {
  auto cfg = small_config(50);
  cfg.round_size = 4;
  cfg.retrain_interval = 10;
  const PathEncodingFeatures path;
  const auto t = surrogate_search(cfg, path, table(), oracle::Task::Cifar10Valid, 2);
  expect_well_formed(t, 50);
  // Rounds end at 24, 28, 32...; refits happen at the first round end past
  // each multiple of ten.
  EXPECT_EQ(t.retrain_points, (std::vector<std::size_t>{20, 32, 40}));
}

TEST(Search, EnsembleAcquisitionRuns) {
  auto cfg = small_config(40);
  cfg.ensemble_size = 3;
  cfg.acquisition = Acquisition::EnsembleMeanStd;
  const PathEncodingFeatures path;
  expect_well_formed(surrogate_search(cfg, path, table(), oracle::Task::Cifar10Valid, 4), 40);
}

TEST(Search, ConfigValidation) {
  const PathEncodingFeatures path;
  auto cfg = small_config(20);
  EXPECT_THROW(surrogate_search(cfg, path, table(), oracle::Task::Cifar10Valid, 0), InputError);
  cfg = small_config();
  cfg.tournament_size = 11;
  EXPECT_THROW(cfg.validate(), InputError);
  cfg = small_config();
  cfg.acquisition = Acquisition::EnsembleMeanStd;
  EXPECT_THROW(cfg.validate(), InputError);
  cfg = small_config();
  cfg.round_size = 101;
  EXPECT_THROW(cfg.validate(), InputError);
  cfg = small_config(20000);
  EXPECT_THROW(surrogate_search(cfg, path, table(), oracle::Task::Cifar10Valid, 0), InputError);
}

TEST(Search, DigestTracksConfig) {
  auto a = small_config();
  auto b = small_config();
  EXPECT_EQ(config_digest(a, "path"), config_digest(b, "path"));
  EXPECT_NE(config_digest(a, "path"), config_digest(a, "cole"));
  b.round_size = 5;
  EXPECT_NE(config_digest(a, "path"), config_digest(b, "path"));
}

TEST(RegularizedEvolution, SpendsExactlyN) {
  oracle::EvaluationSession session(table(), oracle::Task::Cifar10Valid);
  Rng rng(8);
  SearchTrace trace;
  const auto pop = regularized_evolution_init(session, 20, 10, 5, rng, trace);
  EXPECT_EQ(session.evaluations(), 20u);
  EXPECT_EQ(trace.records.size(), 20u);
  ASSERT_EQ(pop.size(), 10u);
  // Aging: the population is the ten most recent evaluations.
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(pop[i].arch, trace.records[10 + i].arch);
  EXPECT_THROW(regularized_evolution_init(session, 20, 10, 11, rng, trace), InputError);
}

TEST(RandomSearch, WithoutReplacement) {
  const auto t = random_search(table(), oracle::Task::Cifar10Valid, 300, 1);
  expect_well_formed(t, 300);
  EXPECT_EQ(random_search(table(), oracle::Task::Cifar10Valid, 300, 1).records.back().arch, t.records.back().arch);
  const auto all = random_search(table(), oracle::Task::Cifar10Valid, table().size(), 2);
  EXPECT_EQ(all.records.back().best_so_far, table().best(oracle::Task::Cifar10Valid));
  EXPECT_THROW(random_search(table(), oracle::Task::Cifar10Valid, table().size() + 1, 0), InputError);
}

SearchTrace trace_of(const std::vector<double>& accs) {
  SearchTrace t;
  for (std::size_t i = 0; i < accs.size(); ++i) t.append(nb201::CellGenotype::from_index(i), accs[i], RecordOrigin::Random);
  return t;
}

TEST(Metrics, EvalsToWithinPct) {
  // Relative threshold 0.99 * 91.61 = 90.6939.
  std::vector<double> accs(60, 80.0);
  accs[50] = 90.69;
  accs[51] = 90.70;
  const auto t = trace_of(accs);
  EXPECT_EQ(evals_to_within_pct(t, 91.61), 52u);
  // Absolute threshold 91.61 - 1 = 90.61.
  EXPECT_EQ(evals_to_within_pct(t, 91.61, 1.0, false), 51u);
  EXPECT_EQ(evals_to_within_pct(t, 95.0), std::nullopt);
  EXPECT_THROW(evals_to_within_pct(t, 0.0), InputError);
}

TEST(Metrics, CompareTrajectories) {
  const double top = 100.0;
  std::vector<SearchTrace> a, b;
  for (std::size_t hit : {5u, 10u, 0u}) {
    std::vector<double> accs(20, 50.0);
    if (hit) accs[hit - 1] = 99.5;
    a.push_back(trace_of(accs));
  }
  for (std::size_t hit : {0u, 0u, 3u}) {
    std::vector<double> accs(20, 60.0);
    if (hit) accs[hit - 1] = 99.5;
    b.push_back(trace_of(accs));
  }
  const auto c = compare_trajectories(a, b, top);
  EXPECT_EQ(c.median_evals_a, 10.0);  // {5, 10, 21}
  EXPECT_EQ(c.median_evals_b, std::nullopt);  // {3, 21, 21}
  EXPECT_EQ(c.reached_a, 2u);
  EXPECT_EQ(c.reached_b, 1u);
  ASSERT_EQ(c.mean_a.size(), 20u);
  EXPECT_DOUBLE_EQ(c.mean_a[0], 50.0);
  EXPECT_DOUBLE_EQ(c.mean_a[19], (99.5 + 99.5 + 50.0) / 3.0);
  EXPECT_DOUBLE_EQ(c.std_b[0], 0.0);
  std::ostringstream out;
  write_comparison_csv(out, c);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "eval_index,mean_a,std_a,mean_b,std_b");

  b.push_back(trace_of(std::vector<double>(19, 1.0)));
  EXPECT_THROW(compare_trajectories(a, b, top), InputError);
  EXPECT_THROW(compare_trajectories(a, std::vector<SearchTrace>{}, top), InputError);
}

TEST(Metrics, EvenCountMedianAverages) {
  std::vector<SearchTrace> a;
  for (std::size_t hit : {4u, 8u}) {
    std::vector<double> accs(10, 1.0);
    accs[hit - 1] = 100.0;
    a.push_back(trace_of(accs));
  }
  EXPECT_EQ(compare_trajectories(a, a, 100.0).median_evals_a, 6.0);
}

TEST(TraceCsv, RoundTrip) {
  const PathEncodingFeatures path;
  const auto t = surrogate_search(small_config(40), path, table(), oracle::Task::Cifar10Valid, 9);
  std::ostringstream out;
  write_trace_csv(out, t);
  std::istringstream in(out.str());
  const auto back = read_trace_csv(in);
  ASSERT_EQ(back.records.size(), t.records.size());
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    EXPECT_EQ(back.records[i].arch, t.records[i].arch);
    EXPECT_EQ(back.records[i].accuracy, t.records[i].accuracy);
    EXPECT_EQ(back.records[i].best_so_far, t.records[i].best_so_far);
  }
  std::istringstream bad("eval_index,arch\n");
  EXPECT_THROW(read_trace_csv(bad), InputError);
}

TEST(TraceCsv, HeaderJson) {
  const PathEncodingFeatures path;
  const auto t = surrogate_search(small_config(40), path, table(), oracle::Task::Cifar10Valid, 9);
  const auto j = trace_header_json(t);
  EXPECT_EQ(j["representation"], "path");
  EXPECT_EQ(j["seed"], 9);
  EXPECT_EQ(j["evaluations"], 40);
  EXPECT_EQ(j["retrain_points"], nlohmann::ordered_json({20, 30}));
}

}  // namespace

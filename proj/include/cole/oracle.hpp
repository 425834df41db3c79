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

// Ground-truth accuracy tables: CSV ingestion of NAS-Bench-201-style data and
// a deterministic synthetic stand-in covering the whole cell space.

#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cole/error.hpp"
#include "cole/nb201.hpp"
#include "cole/rng.hpp"

namespace cole::oracle {

enum class Task { Cifar10Valid = 0, Cifar100Test = 1, ImageNet16Test = 2 };

inline constexpr std::array<Task, 3> kAllTasks = {Task::Cifar10Valid, Task::Cifar100Test, Task::ImageNet16Test};

inline std::string_view task_column(Task t) {
  switch (t) {
    case Task::Cifar10Valid: return "cifar10_valid";
    case Task::Cifar100Test: return "cifar100_test";
    case Task::ImageNet16Test: return "imagenet16_test";
  }
  return "cifar10_valid";
}

inline Task parse_task(std::string_view s) {
  if (s == "cifar10" || s == "cifar10_valid") return Task::Cifar10Valid;
  if (s == "cifar100" || s == "cifar100_test") return Task::Cifar100Test;
  if (s == "imagenet16" || s == "imagenet16_test" || s == "ImageNet16-120") return Task::ImageNet16Test;
  throw InputError("unknown task '" + std::string(s) + "' (expected cifar10, cifar100 or imagenet16)");
}

/// Best accuracy per task on real NAS-Bench-201 data; also the upper end of
/// the synthetic tables.
inline double reference_top_accuracy(Task t) {
  switch (t) {
    case Task::Cifar10Valid: return 91.61;
    case Task::Cifar100Test: return 73.51;
    case Task::ImageNet16Test: return 47.31;
  }
  return 91.61;
}

inline constexpr double kSyntheticFloor = 9.28;

struct Accuracies {
  std::array<double, 3> values{};
  double get(Task t) const { return values[static_cast<std::size_t>(t)]; }
};

class BenchmarkTable {
 public:
  /// Adds one row; the arch string is validated and stored canonically.
  void add(std::string_view arch, const Accuracies& acc) {
    const nb201::CellGenotype g = nb201::parse_arch_string(arch);
    for (double v : acc.values) {
      if (!(v >= 0.0 && v <= 100.0)) throw InputError("accuracy " + std::to_string(v) + " outside [0, 100]");
    }
    const std::size_t gi = g.index();
    if (slot_[gi] >= 0) throw InputError("duplicate architecture '" + nb201::format_arch_string(g) + "'");
    slot_[gi] = static_cast<int>(rows_.size());
    rows_.push_back({g, acc});
    for (std::size_t t = 0; t < 3; ++t) best_[t] = rows_.size() == 1 ? acc.values[t] : std::max(best_[t], acc.values[t]);
  }

  std::size_t size() const { return rows_.size(); }
  const nb201::CellGenotype& genotype(std::size_t row) const { return rows_[row].first; }
  const Accuracies& accuracies(std::size_t row) const { return rows_[row].second; }
  double best(Task t) const { return best_[static_cast<std::size_t>(t)]; }

  std::optional<std::size_t> find(const nb201::CellGenotype& g) const {
    const int s = slot_[g.index()];
    if (s < 0) return std::nullopt;
    return static_cast<std::size_t>(s);
  }
  bool contains(const nb201::CellGenotype& g) const { return slot_[g.index()] >= 0; }

 private:
  std::vector<std::pair<nb201::CellGenotype, Accuracies>> rows_;
  std::vector<int> slot_ = std::vector<int>(nb201::kSpaceSize, -1);
  std::array<double, 3> best_{};
};

inline constexpr std::string_view kCsvHeader = "arch,cifar10_valid,cifar100_test,imagenet16_test";

/// Canonical accuracy text: at most 7 fractional digits, trailing zeros
/// dropped.
inline std::string format_accuracy(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.7f", v);
  std::string s(buf);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

inline BenchmarkTable read_benchmark_csv(std::istream& in, const std::string& name = "benchmark") {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw InputError(name + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw InputError(name + ":1: expected header '" + std::string(kCsvHeader) + "'");
  BenchmarkTable table;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = name + ":" + std::to_string(lineno) + ": ";
    try {
      std::string arch;
      std::size_t pos = 0;
      if (line[0] == '"') {
        const std::size_t close = line.find('"', 1);
        if (close == std::string::npos) throw InputError("unterminated quoted arch");
        arch = line.substr(1, close - 1);
        pos = close + 1;
      } else {
        pos = line.find(',');
        arch = line.substr(0, pos);
      }
      if (pos >= line.size() || line[pos] != ',') throw InputError("expected 4 fields");
      Accuracies acc;
      for (std::size_t t = 0; t < 3; ++t) {
        const std::size_t start = pos + 1;
        const std::size_t end = line.find(',', start);
        if ((t < 2) != (end != std::string::npos)) throw InputError("expected 4 fields");
        const std::string field = line.substr(start, end == std::string::npos ? std::string::npos : end - start);
        std::size_t used = 0;
        double v = 0.0;
        try {
          v = std::stod(field, &used);
        } catch (const std::exception&) {
          throw InputError("malformed accuracy '" + field + "'");
        }
        if (used != field.size()) throw InputError("malformed accuracy '" + field + "'");
        if (!(v >= 0.0 && v <= 100.0)) throw InputError("accuracy " + field + " outside [0, 100]");
        acc.values[t] = v;
        pos = end;
      }
      table.add(arch, acc);
    } catch (const InputError& e) {
      throw InputError(where + e.what());
    }
  }
  return table;
}

inline BenchmarkTable load_benchmark_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read benchmark file '" + path + "'");
  return read_benchmark_csv(in, path);
}

inline void write_benchmark_csv(std::ostream& out, const BenchmarkTable& table) {
  out << kCsvHeader << '\n';
  for (std::size_t r = 0; r < table.size(); ++r) {
    out << '"' << nb201::format_arch_string(table.genotype(r)) << '"';
    for (double v : table.accuracies(r).values) out << ',' << format_accuracy(v);
    out << '\n';
  }
}

inline void save_benchmark_table(const BenchmarkTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write benchmark file '" + path + "'");
  write_benchmark_csv(out, table);
}

namespace detail {

inline std::int64_t hashed_int(std::initializer_list<std::uint64_t> parts, std::int64_t lo, std::int64_t hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo + 1);
  return lo + static_cast<std::int64_t>(derive_seed(parts) % span);
}

// Integer quality score of a genotype for one task.
struct SynthScorer {
  std::array<std::array<std::int64_t, nb201::kNumOps>, nb201::kNumEdges> utility{};
  // [e1][e2][o1][o2] for e1 < e2
  std::array<std::array<std::array<std::array<std::int64_t, nb201::kNumOps>, nb201::kNumOps>, nb201::kNumEdges>,
             nb201::kNumEdges>
      interaction{};
  std::uint64_t seed = 0;
  std::uint64_t task = 0;

  SynthScorer(std::uint64_t s, std::uint64_t t) : seed(s), task(t) {
    // Shared op preferences, perturbed per edge and slightly per task.
    static constexpr std::array<std::int64_t, nb201::kNumOps> kBase = {0, 30, 60, 100, 40};
    for (std::uint64_t e = 0; e < nb201::kNumEdges; ++e) {
      for (std::uint64_t o = 0; o < nb201::kNumOps; ++o) {
        utility[e][o] = kBase[o] + hashed_int({seed, 1, e, o}, -15, 15) + hashed_int({seed, 2, task, e, o}, -5, 5);
      }
    }
    for (std::uint64_t e1 = 0; e1 < nb201::kNumEdges; ++e1) {
      for (std::uint64_t e2 = e1 + 1; e2 < nb201::kNumEdges; ++e2) {
        for (std::uint64_t o1 = 0; o1 < nb201::kNumOps; ++o1) {
          for (std::uint64_t o2 = 0; o2 < nb201::kNumOps; ++o2) {
            interaction[e1][e2][o1][o2] =
                hashed_int({seed, 3, e1, e2, o1, o2}, -8, 8) + hashed_int({seed, 4, task, e1, e2, o1, o2}, -2, 2);
          }
        }
      }
    }
  }

  std::int64_t score(const nb201::CellGenotype& g) const {
    const auto& ops = g.ops();
    std::int64_t s = 0;
    for (std::size_t e = 0; e < nb201::kNumEdges; ++e) s += utility[e][static_cast<std::size_t>(ops[e])];
    for (std::size_t e1 = 0; e1 < nb201::kNumEdges; ++e1) {
      for (std::size_t e2 = e1 + 1; e2 < nb201::kNumEdges; ++e2) {
        s += interaction[e1][e2][static_cast<std::size_t>(ops[e1])][static_cast<std::size_t>(ops[e2])];
      }
    }
    s += hashed_int({seed, 5, task, g.index()}, -3, 3);
    if (nb201::path_encode(g).none()) s -= 300;  // input cannot reach output
    return s;
  }
};

}  // namespace detail

/// Deterministic synthetic table over all 15,625 genotypes. Per task, an
/// integer score (per-edge op utilities + pairwise edge interactions + small
/// hashed noise, with a penalty for severed cells) is turned into a squared
/// gap from the best score and mapped affinely onto [9.28, top], rounded to
/// 7 decimals. Only integer hashing feeds the scores.
inline BenchmarkTable synth_benchmark(std::uint64_t seed) {
  const auto space = nb201::enumerate_space();
  std::array<std::vector<double>, 3> acc;
  for (Task t : kAllTasks) {
    const detail::SynthScorer scorer(seed, static_cast<std::uint64_t>(t));
    std::vector<std::int64_t> scores(space.size());
    std::int64_t hi = std::numeric_limits<std::int64_t>::min();
    for (std::size_t i = 0; i < space.size(); ++i) {
      scores[i] = scorer.score(space[i]);
      hi = std::max(hi, scores[i]);
    }
    std::int64_t qmax = 0;
    for (auto s : scores) qmax = std::max(qmax, (hi - s) * (hi - s));
    const double top = reference_top_accuracy(t);
    auto& col = acc[static_cast<std::size_t>(t)];
    col.resize(space.size());
    for (std::size_t i = 0; i < space.size(); ++i) {
      const std::int64_t q = (hi - scores[i]) * (hi - scores[i]);
      const double v = top - (top - kSyntheticFloor) * static_cast<double>(q) / static_cast<double>(qmax);
      col[i] = std::round(v * 1e7) / 1e7;
    }
  }
  BenchmarkTable table;
  for (std::size_t i = 0; i < space.size(); ++i) {
    table.add(nb201::format_arch_string(space[i]), Accuracies{{acc[0][i], acc[1][i], acc[2][i]}});
  }
  return table;
}

/// Counts ground-truth evaluations.
class BudgetMeter {
 public:
  void charge() { count_.fetch_add(1, std::memory_order_relaxed); }
  std::size_t count() const { return count_.load(std::memory_order_relaxed); }

 private:
  std::atomic<std::size_t> count_{0};
};

inline double query(const BenchmarkTable& table, const nb201::CellGenotype& g, Task task,
                    BudgetMeter* meter = nullptr) {
  const auto row = table.find(g);
  if (!row) throw InputError("architecture not in benchmark: '" + nb201::format_arch_string(g) + "'");
  if (meter) meter->charge();
  return table.accuracies(*row).get(task);
}

inline double query(const BenchmarkTable& table, std::string_view arch, Task task, BudgetMeter* meter = nullptr) {
  return query(table, nb201::parse_arch_string(arch), task, meter);
}

/// Per-search-run memoized access: the first evaluation of an architecture
/// costs one budget unit, repeats are free.
class EvaluationSession {
 public:
  EvaluationSession(const BenchmarkTable& table, Task task) : table_(&table), task_(task) {}

  double evaluate(const nb201::CellGenotype& g) {
    const std::size_t key = g.index();
    if (const auto it = memo_.find(key); it != memo_.end()) return it->second;
    const double v = query(*table_, g, task_, &meter_);
    memo_.emplace(key, v);
    return v;
  }

  bool evaluated(const nb201::CellGenotype& g) const { return memo_.count(g.index()) != 0; }
  std::size_t evaluations() const { return meter_.count(); }
  const BenchmarkTable& table() const { return *table_; }
  Task task() const { return task_; }

 private:
  const BenchmarkTable* table_;
  Task task_;
  BudgetMeter meter_;
  std::unordered_map<std::size_t, double> memo_;
};

}  // namespace cole::oracle

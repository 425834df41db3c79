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

// Subcommand implementations. Each takes a resolved RunConfig plus its own
// arguments and returns a process exit code.

#include <atomic>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cole/codegen.hpp"
#include "cole/config.hpp"
#include "cole/einspace.hpp"
#include "cole/embedding.hpp"
#include "cole/error.hpp"
#include "cole/evaluation.hpp"
#include "cole/nb201.hpp"
#include "cole/oracle.hpp"
#include "cole/search.hpp"

namespace cole::cli {

enum ExitCode : int { kExitOk = 0, kExitInput = 1, kExitRuntime = 2 };

/// Maps exceptions to the exit-code contract: input and validation problems
/// are 1, everything else 2.
inline int run_guarded(std::ostream& err, const std::function<int()>& fn) {
  try {
    return fn();
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const TransportError& e) {
    err << "transport error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

inline void write_resolved_config(const config::RunConfig& c, const std::filesystem::path& dir) {
  write_file(dir / "resolved_config.json", config::to_json(c).dump(2) + "\n");
}

/// Runs fn(0..n-1) on up to `jobs` threads; the first exception is rethrown.
inline void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, jobs), n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!first) first = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first) std::rethrow_exception(first);
}

inline std::string_view lstrip(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  return s.substr(i);
}

inline std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

struct InputItem {
  std::string label;  // "file:line" or "file:tree N"
  std::string text;
};

/// Blank-line separated blocks, each one derivation tree.
inline std::vector<InputItem> split_trees(const std::string& text, const std::string& name) {
  std::vector<InputItem> items;
  std::string block;
  const auto flush = [&] {
    if (!nb201::detail::trim(block).empty()) {
      items.push_back({name + ": tree " + std::to_string(items.size() + 1), block});
    }
    block.clear();
  };
  for (const auto& line : split_lines(text)) {
    if (nb201::detail::trim(line).empty()) {
      flush();
    } else {
      block += line + "\n";
    }
  }
  flush();
  return items;
}

inline std::vector<InputItem> split_arch_lines(const std::string& text, const std::string& name) {
  std::vector<InputItem> items;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string t(nb201::detail::trim(lines[i]));
    if (t.empty() || t[0] == '#') continue;
    items.push_back({name + ":" + std::to_string(i + 1), t});
  }
  return items;
}

}  // namespace detail

// --------------------------------------------------------------------------
// transpile

struct TranspileArgs {
  std::string input;                  // file path, "-" for stdin
  std::string input_format = "auto";  // auto | nb201 | einspace
  std::string output_format = "text"; // text | jsonl
  std::string out_dir;                // one file per input when set
  bool continue_on_error = false;
  std::optional<einspace::Shape> input_shape;
};

inline int cmd_transpile(const config::RunConfig& cfg, const TranspileArgs& args, std::ostream& out,
                         std::ostream& err, std::istream& in = std::cin) {
  const std::string name = args.input == "-" ? "<stdin>" : args.input;
  std::string text;
  if (args.input == "-") {
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  } else {
    text = detail::read_file(args.input);
  }
  std::string fmt = args.input_format;
  if (fmt == "auto") {
    // First non-blank, non-comment line decides.
    std::string_view body = detail::lstrip(text);
    while (!body.empty() && body.front() == '#') {
      const std::size_t nl = body.find('\n');
      body = nl == std::string_view::npos ? std::string_view{} : detail::lstrip(body.substr(nl + 1));
    }
    fmt = !body.empty() && body.front() == '|' ? "nb201" : "einspace";
  }
  if (fmt != "nb201" && fmt != "einspace") throw InputError("unknown input format '" + fmt + "'");
  if (args.output_format != "text" && args.output_format != "jsonl") {
    throw InputError("unknown output format '" + args.output_format + "'");
  }
  const auto items = fmt == "nb201" ? detail::split_arch_lines(text, name) : detail::split_trees(text, name);
  if (items.empty()) throw InputError(name + ": no inputs");

  const auto mode = codegen::parse_mode(cfg.codegen.mode);
  const auto addons = config::addons_of(cfg);
  const auto task = config::task_descriptor(config::task_of(cfg));
  std::vector<std::pair<std::string, codegen::CodeText>> codes;  // (arch_id, code)
  std::vector<std::string> errors;
  for (std::size_t k = 0; k < items.size(); ++k) {
    try {
      if (fmt == "nb201") {
        const auto g = nb201::parse_arch_string(items[k].text);
        codes.emplace_back(nb201::format_arch_string(g), codegen::emit_cell_code(g, mode, addons, task));
      } else {
        const auto tree = einspace::parse_derivation_tree(items[k].text);
        codes.emplace_back("tree_" + std::to_string(k + 1), codegen::transpile_einspace(tree, args.input_shape));
      }
    } catch (const InputError& e) {
      errors.push_back(items[k].label + ": " + e.what());
    }
  }
  for (const auto& e : errors) err << "error: " << e << '\n';
  if (!errors.empty() && !args.continue_on_error) return kExitInput;

  if (!args.out_dir.empty()) {
    const std::filesystem::path dir(args.out_dir);
    for (std::size_t k = 0; k < codes.size(); ++k) {
      std::ostringstream fname;
      fname << "arch_" << std::setw(5) << std::setfill('0') << k + 1 << ".py";
      detail::write_file(dir / fname.str(), codes[k].second.text);
    }
    std::ostringstream index;
    for (const auto& [id, code] : codes) index << nlohmann::json{{"arch_id", id}}.dump() << '\n';
    detail::write_file(dir / "index.jsonl", index.str());
    detail::write_resolved_config(cfg, dir);
  } else if (args.output_format == "jsonl") {
    for (const auto& [id, code] : codes) {
      nlohmann::ordered_json j;
      j["arch_id"] = id;
      j["code"] = code.text;
      out << j.dump() << '\n';
    }
  } else {
    for (std::size_t k = 0; k < codes.size(); ++k) {
      if (k) out << '\n';
      out << codes[k].second.text;
    }
  }
  return errors.empty() ? kExitOk : kExitInput;
}

// --------------------------------------------------------------------------
// embed

struct EmbedArgs {
  std::string input;  // arch strings, one per line, or JSON lines {arch_id, code}
  bool all_nb201 = false;
  std::string cache_path;  // defaults to provider.cache_path
};

inline int cmd_embed(const config::RunConfig& cfg, const EmbedArgs& args, std::ostream& out, std::ostream& err) {
  if (args.input.empty() == !args.all_nb201) throw InputError("embed: give exactly one of an input file or --all-nb201");
  const std::string cache_path = args.cache_path.empty() ? cfg.provider.cache_path : args.cache_path;
  if (cache_path.empty()) throw InputError("embed: no cache path (set provider.cache_path or --cache)");

  std::vector<std::string> texts;
  const auto mode = codegen::parse_mode(cfg.codegen.mode);
  const auto addons = config::addons_of(cfg);
  const auto task = config::task_descriptor(config::task_of(cfg));
  if (args.all_nb201) {
    for (const auto& g : nb201::enumerate_space()) texts.push_back(codegen::emit_cell_code(g, mode, addons, task).text);
  } else {
    const std::string text = detail::read_file(args.input);
    const auto lines = detail::split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const std::string t(nb201::detail::trim(lines[i]));
      if (t.empty() || t[0] == '#') continue;
      const std::string where = args.input + ":" + std::to_string(i + 1) + ": ";
      if (t[0] == '{') {
        try {
          texts.push_back(nlohmann::json::parse(t).at("code").get<std::string>());
        } catch (const nlohmann::json::exception& e) {
          throw InputError(where + "bad JSON line: " + e.what());
        }
      } else {
        try {
          texts.push_back(codegen::emit_cell_code(nb201::parse_arch_string(t), mode, addons, task).text);
        } catch (const InputError& e) {
          throw InputError(where + e.what());
        }
      }
    }
    if (texts.empty()) throw InputError(args.input + ": no inputs");
  }

  auto cache = embedding::EmbeddingCache::load(cache_path);
  const auto provider = config::make_provider(cfg);
  embedding::EmbedStats stats;
  try {
    embedding::embed_batch(*provider, std::span<const std::string>(texts), &cache, config::embed_options(cfg), &stats);
  } catch (const TransportError& e) {
    cache.save(cache_path);  // keep whatever succeeded
    err << "transport error: " << e.what() << "\nfailed keys:\n";
    for (std::size_t i : e.failed_indices()) err << "  " << embedding::sha256_hex(texts.at(i)) << '\n';
    return kExitRuntime;
  }
  cache.save(cache_path);
  out << "texts=" << texts.size() << " provider_calls=" << stats.provider_calls
      << " embedded=" << stats.texts_embedded << " cache_hits=" << stats.cache_hits << " cache_size=" << cache.size()
      << '\n';
  return kExitOk;
}

// --------------------------------------------------------------------------
// cv

inline std::unique_ptr<search::FeatureSource> make_feature_source(const config::RunConfig& cfg,
                                                                   const std::string& representation,
                                                                   std::shared_ptr<embedding::EmbeddingCache> cache) {
  if (representation == "path") return std::make_unique<search::PathEncodingFeatures>();
  if (representation != "cole") throw InputError("unknown representation '" + representation + "'");
  return std::make_unique<search::ColeFeatures>(config::make_provider(cfg), codegen::parse_mode(cfg.codegen.mode),
                                                config::addons_of(cfg),
                                                config::task_descriptor(config::task_of(cfg)), std::move(cache),
                                                config::embed_options(cfg));
}

/// Shared in-memory cache, seeded from provider.cache_path when that file
/// exists (cache provider excepted: it already serves from the file).
inline std::shared_ptr<embedding::EmbeddingCache> open_cache(const config::RunConfig& cfg) {
  if (cfg.provider.kind != "cache" && !cfg.provider.cache_path.empty()) {
    return std::make_shared<embedding::EmbeddingCache>(embedding::EmbeddingCache::load(cfg.provider.cache_path));
  }
  return std::make_shared<embedding::EmbeddingCache>();
}

inline void persist_cache(const config::RunConfig& cfg, const embedding::EmbeddingCache& cache) {
  if (cfg.provider.kind != "cache" && !cfg.provider.cache_path.empty()) cache.save(cfg.provider.cache_path);
}

inline int cmd_cv(const config::RunConfig& cfg, std::ostream& out, std::ostream& /*err*/) {
  const auto table = config::load_oracle(cfg);
  const auto task = config::task_of(cfg);
  auto plan = evaluation::make_cv_plan(table.size(), cfg.seed, cfg.cv.budgets, cfg.cv.folds, cfg.cv.seeds, cfg.cv.bins);

  std::vector<nb201::CellGenotype> archs;
  evaluation::CvCorpus corpus;
  corpus.targets.resize(static_cast<Eigen::Index>(table.size()));
  for (std::size_t r = 0; r < table.size(); ++r) {
    archs.push_back(table.genotype(r));
    corpus.ids.push_back(nb201::format_arch_string(table.genotype(r)));
    corpus.targets(static_cast<Eigen::Index>(r)) = table.accuracies(r).get(task);
  }
  const auto cache = open_cache(cfg);
  const auto features = make_feature_source(cfg, cfg.cv.representation, cache);
  corpus.features = features->features(archs);
  persist_cache(cfg, *cache);

  auto pipeline = config::pipeline_config(cfg);
  if (!features->reduce_with_pca()) pipeline.pca_components.reset();
  evaluation::CvOptions opts;
  opts.config_name = cfg.cv.config_name;
  opts.jobs = cfg.jobs;
  const auto results = evaluation::run_cv(plan, corpus, pipeline, opts);
  const auto summary = evaluation::aggregate(results);

  const std::filesystem::path dir(cfg.output_dir);
  std::ostringstream rcsv, scsv;
  evaluation::write_results_csv(rcsv, results);
  evaluation::write_summary_csv(scsv, summary);
  detail::write_file(dir / "results.csv", rcsv.str());
  detail::write_file(dir / "summary.csv", scsv.str());
  detail::write_file(dir / "summary.json", evaluation::summary_json(summary).dump(2) + "\n");
  detail::write_resolved_config(cfg, dir);
  out << scsv.str();
  return kExitOk;
}

// --------------------------------------------------------------------------
// search

inline std::uint64_t search_trial_seed(std::uint64_t root, std::size_t trial) {
  return derive_seed({root, 0x7a1a, trial});
}

inline std::string trial_stem(std::size_t trial) {
  std::ostringstream s;
  s << "trial_" << std::setw(4) << std::setfill('0') << trial + 1;
  return s.str();
}

inline int cmd_search(const config::RunConfig& cfg, std::ostream& out, std::ostream& /*err*/) {
  const auto table = config::load_oracle(cfg);
  const auto task = config::task_of(cfg);
  const auto scfg = config::search_config(cfg);
  scfg.validate();
  if (scfg.total_budget > table.size()) {
    throw InputError("search: budget " + std::to_string(scfg.total_budget) + " exceeds the " +
                     std::to_string(table.size()) + " architectures available");
  }
  const auto& reps = cfg.search.representations;
  const std::size_t trials = cfg.search.trials;
  const auto cache = open_cache(cfg);
  std::vector<std::unique_ptr<search::FeatureSource>> sources;
  for (const auto& r : reps) sources.push_back(r == "random" ? nullptr : make_feature_source(cfg, r, cache));

  std::vector<std::vector<search::SearchTrace>> traces(reps.size(), std::vector<search::SearchTrace>(trials));
  detail::parallel_for(reps.size() * trials, cfg.jobs, [&](std::size_t job) {
    const std::size_t r = job / trials, t = job % trials;
    const std::uint64_t seed = search_trial_seed(cfg.seed, t);
    traces[r][t] = sources[r] ? search::surrogate_search(scfg, *sources[r], table, task, seed)
                              : search::random_search(table, task, scfg.total_budget, seed);
  });
  persist_cache(cfg, *cache);

  const std::filesystem::path dir(cfg.output_dir);
  const double top = table.best(task);
  const double pct = cfg.search.within_pct;
  const bool relative = cfg.search.relative_threshold;
  nlohmann::ordered_json summary;
  summary["task"] = cfg.task;
  summary["top_accuracy"] = top;
  summary["threshold"] = search::within_threshold(top, pct, relative);
  summary["trials"] = trials;
  summary["budget"] = scfg.total_budget;
  nlohmann::ordered_json per_rep = nlohmann::ordered_json::object();
  for (std::size_t r = 0; r < reps.size(); ++r) {
    for (std::size_t t = 0; t < trials; ++t) {
      std::ostringstream csv;
      search::write_trace_csv(csv, traces[r][t]);
      detail::write_file(dir / "traces" / reps[r] / (trial_stem(t) + ".csv"), csv.str());
      detail::write_file(dir / "traces" / reps[r] / (trial_stem(t) + ".json"),
                         search::trace_header_json(traces[r][t]).dump(2) + "\n");
    }
    const auto self = search::compare_trajectories(traces[r], traces[r], top, pct, relative);
    nlohmann::ordered_json j;
    j["median_evals_to_threshold"] =
        self.median_evals_a ? nlohmann::ordered_json(*self.median_evals_a) : nlohmann::ordered_json(nullptr);
    j["runs_reaching_threshold"] = self.reached_a;
    j["final_mean_best"] = self.mean_a.back();
    j["final_std_best"] = self.std_a.back();
    per_rep[reps[r]] = j;
  }
  summary["representations"] = per_rep;
  for (std::size_t r = 1; r < reps.size(); ++r) {
    const auto cmp = search::compare_trajectories(traces[0], traces[r], top, pct, relative);
    std::ostringstream csv;
    search::write_comparison_csv(csv, cmp);
    detail::write_file(dir / ("comparison_" + reps[0] + "_vs_" + reps[r] + ".csv"), csv.str());
  }
  detail::write_file(dir / "search_summary.json", summary.dump(2) + "\n");
  detail::write_resolved_config(cfg, dir);
  out << summary.dump(2) << '\n';
  return kExitOk;
}

// --------------------------------------------------------------------------
// report

struct ReportArgs {
  std::vector<std::string> results;  // CV result CSVs
  std::vector<std::string> traces_a, traces_b;
  std::optional<double> top_accuracy;  // defaults to the configured oracle's best
};

inline int cmd_report(const config::RunConfig& cfg, const ReportArgs& args, std::ostream& out, std::ostream& /*err*/) {
  if (args.results.empty() && args.traces_a.empty()) throw InputError("report: nothing to report (give --results or --trace-a/--trace-b)");
  if (args.traces_a.empty() != args.traces_b.empty()) throw InputError("report: --trace-a and --trace-b go together");
  const std::filesystem::path dir(cfg.output_dir);
  if (!args.results.empty()) {
    std::vector<evaluation::TrialResult> all;
    for (const auto& path : args.results) {
      std::istringstream in(detail::read_file(path));
      const auto rows = evaluation::read_results_csv(in, path);
      all.insert(all.end(), rows.begin(), rows.end());
    }
    if (all.empty()) throw InputError("report: result files hold no rows");
    const auto summary = evaluation::aggregate(all);
    std::ostringstream csv;
    evaluation::write_summary_csv(csv, summary);
    detail::write_file(dir / "summary.csv", csv.str());
    detail::write_file(dir / "summary.json", evaluation::summary_json(summary).dump(2) + "\n");
    out << csv.str();
  }
  if (!args.traces_a.empty()) {
    const auto read = [](const std::vector<std::string>& paths) {
      std::vector<search::SearchTrace> v;
      for (const auto& p : paths) {
        std::istringstream in(detail::read_file(p));
        v.push_back(search::read_trace_csv(in, p));
      }
      return v;
    };
    const auto a = read(args.traces_a), b = read(args.traces_b);
    const double top = args.top_accuracy ? *args.top_accuracy : config::load_oracle(cfg).best(config::task_of(cfg));
    const auto cmp = search::compare_trajectories(a, b, top, cfg.search.within_pct, cfg.search.relative_threshold);
    std::ostringstream csv;
    search::write_comparison_csv(csv, cmp);
    detail::write_file(dir / "comparison.csv", csv.str());
    const auto med = [](const std::optional<double>& m) { return m ? evaluation::format_double(*m) : std::string("none"); };
    out << "median_evals_a=" << med(cmp.median_evals_a) << " reached_a=" << cmp.reached_a << '/' << a.size()
        << " median_evals_b=" << med(cmp.median_evals_b) << " reached_b=" << cmp.reached_b << '/' << b.size() << '\n';
  }
  detail::write_resolved_config(cfg, dir);
  return kExitOk;
}

}  // namespace cole::cli

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

// Command-line front end: `cole <transpile|embed|cv|search|report> ...`.
// A --config file is loaded first; any flag given on the command line
// overrides the matching config field.

#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cole/commands.hpp"
#include "cole/config.hpp"

namespace cole::cli {

namespace detail {

class Overrides {
 public:
  template <class T, class F>
  void option(CLI::App* app, const std::string& name, const std::string& desc, F apply) {
    auto store = std::make_shared<T>();
    CLI::Option* opt = app->add_option(name, *store, desc);
    appliers_.push_back([opt, store, apply](config::RunConfig& c) {
      if (opt->count()) apply(c, *store);
    });
  }

  template <class F>
  void flag(CLI::App* app, const std::string& name, const std::string& desc, F apply) {
    auto store = std::make_shared<bool>(false);
    CLI::Option* opt = app->add_flag(name, *store, desc);
    appliers_.push_back([opt, store, apply](config::RunConfig& c) {
      if (opt->count()) apply(c, *store);
    });
  }

  void apply(config::RunConfig& c) const {
    for (const auto& f : appliers_) f(c);
  }

 private:
  std::vector<std::function<void(config::RunConfig&)>> appliers_;
};

inline void add_common(CLI::App* sub, Overrides& ov) {
  ov.option<std::uint64_t>(sub, "--seed", "root seed", [](auto& c, auto v) { c.seed = v; });
  ov.option<unsigned>(sub, "--jobs", "worker threads", [](auto& c, auto v) { c.jobs = v; });
  ov.option<std::string>(sub, "--out", "output directory", [](auto& c, const auto& v) { c.output_dir = v; });
  ov.option<std::string>(sub, "--task", "cifar10_valid | cifar100_test | imagenet16_test",
                         [](auto& c, const auto& v) { c.task = v; });
}

inline void add_codegen(CLI::App* sub, Overrides& ov) {
  ov.option<std::string>(sub, "--mode", "helper | inline | excluded",
                         [](auto& c, const auto& v) { c.codegen.mode = v; });
  ov.flag(sub, "--backbone", "prepend the backbone add-on", [](auto& c, bool v) { c.codegen.backbone = v; });
  ov.flag(sub, "--comment", "prepend the task-comment add-on", [](auto& c, bool v) { c.codegen.comment = v; });
}

inline void add_provider(CLI::App* sub, Overrides& ov) {
  ov.option<std::string>(sub, "--provider", "hash | structural_mock | cache | remote",
                         [](auto& c, const auto& v) { c.provider.kind = v; });
  ov.option<std::size_t>(sub, "--dim", "embedding width (hash, remote)", [](auto& c, auto v) { c.provider.dim = v; });
  ov.option<double>(sub, "--noise", "structural mock noise scale", [](auto& c, auto v) { c.provider.noise = v; });
  ov.option<std::uint64_t>(sub, "--provider-seed", "provider seed", [](auto& c, auto v) { c.provider.seed = v; });
  ov.option<std::string>(sub, "--url", "remote endpoint URL", [](auto& c, const auto& v) { c.provider.url = v; });
  ov.option<std::string>(sub, "--cache", "embedding cache file",
                         [](auto& c, const auto& v) { c.provider.cache_path = v; });
}

inline void add_oracle(CLI::App* sub, Overrides& ov) {
  ov.option<std::string>(sub, "--oracle", "'synthetic' or a benchmark CSV path", [](auto& c, const auto& v) {
    if (v == "synthetic") {
      c.oracle.source = "synthetic";
    } else {
      c.oracle.source = "csv";
      c.oracle.path = v;
    }
  });
  ov.option<std::uint64_t>(sub, "--oracle-seed", "synthetic benchmark seed (default: root seed)",
                           [](auto& c, auto v) { c.oracle.seed = v; });
}

inline void add_surrogate(CLI::App* sub, Overrides& ov) {
  ov.option<int>(sub, "--pca", "PCA components (0 disables)", [](auto& c, int v) {
    c.surrogate.pca_components = v > 0 ? std::optional<int>(v) : std::nullopt;
  });
  ov.option<std::string>(sub, "--loss", "hinge | mse", [](auto& c, const auto& v) { c.surrogate.loss = v; });
  ov.option<double>(sub, "--epsilon", "hinge margin", [](auto& c, auto v) { c.surrogate.epsilon = v; });
  ov.option<int>(sub, "--epochs", "training epochs", [](auto& c, auto v) { c.surrogate.epochs = v; });
}

}  // namespace detail

/// Parses and runs one invocation; args exclude the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
                   std::istream& in = std::cin) {
  CLI::App app{"COLE: code-text embeddings for architecture performance prediction", "cole"};
  app.require_subcommand(1);
  std::string config_path;
  detail::Overrides ov;

  auto* transpile = app.add_subcommand("transpile", "emit code text for NB201 arch strings or einspace trees");
  TranspileArgs targs;
  std::string input_shape;
  transpile->add_option("input", targs.input, "input file ('-' for stdin)")->required();
  transpile->add_option("--input-format", targs.input_format, "auto | nb201 | einspace");
  transpile->add_option("--format", targs.output_format, "text | jsonl");
  transpile->add_option("--out-dir", targs.out_dir, "write one .py file per input here");
  transpile->add_flag("--continue-on-error", targs.continue_on_error, "emit the inputs that parsed");
  transpile->add_option("--input-shape", input_shape, "einspace input shape, e.g. 3,32,32");
  detail::add_codegen(transpile, ov);

  auto* embed = app.add_subcommand("embed", "embed code texts into the cache");
  EmbedArgs eargs;
  embed->add_option("input", eargs.input, "arch strings or JSON lines {arch_id, code}");
  embed->add_flag("--all-nb201", eargs.all_nb201, "embed every NB201 cell");
  detail::add_provider(embed, ov);
  detail::add_codegen(embed, ov);

  auto* cv = app.add_subcommand("cv", "stratified cross-validation of the surrogate");
  detail::add_provider(cv, ov);
  detail::add_codegen(cv, ov);
  detail::add_oracle(cv, ov);
  detail::add_surrogate(cv, ov);
  ov.option<std::string>(cv, "--representation", "cole | path",
                         [](auto& c, const auto& v) { c.cv.representation = v; });
  ov.option<std::vector<std::size_t>>(cv, "--budgets", "training budgets",
                                      [](auto& c, const auto& v) { c.cv.budgets = v; });
  ov.option<std::vector<std::uint64_t>>(cv, "--trial-seeds", "per-fold trial seeds",
                                        [](auto& c, const auto& v) { c.cv.seeds = v; });
  ov.option<int>(cv, "--folds", "number of folds", [](auto& c, auto v) { c.cv.folds = v; });
  ov.option<std::string>(cv, "--config-name", "label in the results", [](auto& c, const auto& v) { c.cv.config_name = v; });

  auto* srch = app.add_subcommand("search", "surrogate-assisted search runs");
  detail::add_provider(srch, ov);
  detail::add_codegen(srch, ov);
  detail::add_oracle(srch, ov);
  detail::add_surrogate(srch, ov);
  ov.option<std::size_t>(srch, "--trials", "independent runs", [](auto& c, auto v) { c.search.trials = v; });
  ov.option<std::size_t>(srch, "--budget", "oracle evaluations per run",
                         [](auto& c, auto v) { c.search.total_budget = v; });
  ov.option<std::vector<std::string>>(srch, "--representation", "cole | path | random (repeatable)",
                                      [](auto& c, const auto& v) { c.search.representations = v; });
  ov.option<std::string>(srch, "--acquisition", "greedy_mean | ensemble_mean_std",
                         [](auto& c, const auto& v) { c.search.acquisition = v; });
  ov.option<std::size_t>(srch, "--ensemble-size", "surrogates per retrain",
                         [](auto& c, auto v) { c.search.ensemble_size = v; });
  ov.option<double>(srch, "--within-pct", "threshold distance from the top accuracy",
                    [](auto& c, auto v) { c.search.within_pct = v; });
  ov.flag(srch, "--absolute-threshold", "threshold is top - pct instead of (1 - pct/100) * top",
          [](auto& c, bool v) { c.search.relative_threshold = !v; });

  auto* report = app.add_subcommand("report", "summaries from CV results or search traces");
  ReportArgs rargs;
  double top = 0.0;
  report->add_option("--results", rargs.results, "CV result CSVs");
  report->add_option("--trace-a", rargs.traces_a, "trace CSVs, first group");
  report->add_option("--trace-b", rargs.traces_b, "trace CSVs, second group");
  auto* top_opt = report->add_option("--top-accuracy", top, "reference top accuracy");
  detail::add_oracle(report, ov);
  ov.option<double>(report, "--within-pct", "threshold distance from the top accuracy",
                    [](auto& c, auto v) { c.search.within_pct = v; });
  ov.flag(report, "--absolute-threshold", "threshold is top - pct instead of (1 - pct/100) * top",
          [](auto& c, bool v) { c.search.relative_threshold = !v; });

  for (auto* sub : {transpile, embed, cv, srch, report}) {
    sub->add_option("--config", config_path, "run config JSON");
    detail::add_common(sub, ov);
  }

  std::vector<std::string> argv_store{"cole"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  return run_guarded(err, [&]() -> int {
    config::RunConfig cfg = config_path.empty() ? config::RunConfig{} : config::load_run_config(config_path);
    ov.apply(cfg);
    config::validate(cfg);
    if (*transpile) {
      if (!input_shape.empty()) {
        einspace::Shape shape;
        std::stringstream ss(input_shape);
        for (std::string part; std::getline(ss, part, ',');) {
          try {
            shape.push_back(std::stoll(part));
          } catch (const std::exception&) {
            throw InputError("--input-shape: '" + part + "' is not an integer");
          }
        }
        targs.input_shape = shape;
      }
      return cmd_transpile(cfg, targs, out, err, in);
    }
    if (*embed) return cmd_embed(cfg, eargs, out, err);
    if (*cv) return cmd_cv(cfg, out, err);
    if (*srch) return cmd_search(cfg, out, err);
    if (top_opt->count()) rargs.top_accuracy = top;
    return cmd_report(cfg, rargs, out, err);
  });
}

}  // namespace cole::cli

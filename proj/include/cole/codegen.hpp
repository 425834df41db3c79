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

// Architecture -> PyTorch-dialect source text. The output is data: it is
// embedded by a language model, never executed.

#include <array>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cole/codegen_templates.hpp"
#include "cole/einspace.hpp"
#include "cole/error.hpp"
#include "cole/nb201.hpp"

namespace cole::codegen {

enum class VerbosityMode { HelperMethod, Inline, ExcludedHelper };

inline std::string_view mode_name(VerbosityMode m) {
  switch (m) {
    case VerbosityMode::HelperMethod: return "helper";
    case VerbosityMode::Inline: return "inline";
    case VerbosityMode::ExcludedHelper: return "excluded";
  }
  return "excluded";
}

inline VerbosityMode parse_mode(std::string_view s) {
  if (s == "helper") return VerbosityMode::HelperMethod;
  if (s == "inline") return VerbosityMode::Inline;
  if (s == "excluded") return VerbosityMode::ExcludedHelper;
  throw InputError("unknown verbosity mode '" + std::string(s) +
                   "' (expected helper, inline or excluded)");
}

struct ContextAddOns {
  bool backbone = false;
  bool comment = false;
  friend bool operator==(const ContextAddOns&, const ContextAddOns&) = default;
};

enum class Origin { NB201, Einspace };

struct CodeText {
  std::string text;
  Origin origin = Origin::NB201;
};

struct TaskDescriptor {
  std::string name = "CIFAR-10";
  int num_classes = 10;
  int height = 32;
  int width = 32;
  int in_channels = 3;
  int stem_channels = 16;
  int cells_per_stage = 5;

  static TaskDescriptor cifar10() { return {}; }
  static TaskDescriptor cifar100() {
    TaskDescriptor t;
    t.name = "CIFAR-100";
    t.num_classes = 100;
    return t;
  }
  static TaskDescriptor imagenet16_120() {
    TaskDescriptor t;
    t.name = "ImageNet16-120";
    t.num_classes = 120;
    t.height = 16;
    t.width = 16;
    return t;
  }
};

namespace detail {

inline std::string normalize_newlines(std::string s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\r') {
      out += '\n';
      if (i + 1 < s.size() && s[i + 1] == '\n') ++i;
    } else {
      out += s[i];
    }
  }
  return out;
}

inline std::string substitute(std::string_view tmpl,
                              const std::vector<std::pair<std::string, std::string>>& slots) {
  std::string out;
  out.reserve(tmpl.size() + 64);
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const std::size_t close = tmpl.find('}', i);
      if (close != std::string_view::npos) {
        const std::string_view key = tmpl.substr(i + 1, close - i - 1);
        bool hit = false;
        for (const auto& [k, v] : slots) {
          if (k == key) {
            out += v;
            hit = true;
            break;
          }
        }
        if (hit) {
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

inline std::string cell_op_expr(nb201::OpKind op, VerbosityMode mode) {
  using nb201::OpKind;
  const bool inl = mode == VerbosityMode::Inline;
  switch (op) {
    case OpKind::AvgPool3x3:
      return "nn.AvgPool2d(kernel_size=3, stride=1, padding=1)";
    case OpKind::NorConv1x1:
    case OpKind::NorConv3x3: {
      const bool k3 = op == OpKind::NorConv3x3;
      const std::string geom = k3 ? "kernel_size=3, stride=1, padding=1"
                                  : "kernel_size=1, stride=1, padding=0";
      if (inl) {
        return "nn.Sequential(nn.ReLU(inplace=False), nn.Conv2d(channels, channels, " + geom +
               ", bias=False), nn.BatchNorm2d(channels))";
      }
      return "ReLU_Conv2d_BatchNorm(channels, " + geom + ")";
    }
    case OpKind::Zeroize:
    case OpKind::SkipConnect:
      break;
  }
  return {};
}

inline bool has_module(nb201::OpKind op) {
  return op != nb201::OpKind::Zeroize && op != nb201::OpKind::SkipConnect;
}

inline std::string edge_field(int src, int dst) {
  return "op_" + std::to_string(src) + "_" + std::to_string(dst);
}

}  // namespace detail

/// The Cell class alone (no helpers, no add-ons).
inline std::string emit_cell_class(const nb201::CellGenotype& g, VerbosityMode mode) {
  std::string out = "class Cell(nn.Module):\n  def __init__(self, channels):\n    super().__init__()\n";
  for (const auto& e : nb201::kEdges) {
    const nb201::OpKind op = g.op(e.src, e.dst);
    if (!detail::has_module(op)) continue;
    out += "    self." + detail::edge_field(e.src, e.dst) + " = " + detail::cell_op_expr(op, mode) + "\n";
  }
  if (mode == VerbosityMode::Inline) out += "\n";
  out += "  def forward(self, x):\n    node_0 = x\n";
  for (int dst = 1; dst < static_cast<int>(nb201::kNumNodes); ++dst) {
    std::string expr;
    for (int src = 0; src < dst; ++src) {
      const nb201::OpKind op = g.op(src, dst);
      std::string term;
      if (op == nb201::OpKind::SkipConnect) {
        term = "node_" + std::to_string(src);
      } else if (detail::has_module(op)) {
        term = "self." + detail::edge_field(src, dst) + "(node_" + std::to_string(src) + ")";
      } else {
        continue;
      }
      if (!expr.empty()) expr += " + ";
      expr += term;
    }
    if (expr.empty()) expr = "torch.zeros_like(node_0)";
    out += "    node_" + std::to_string(dst) + " = " + expr + "\n";
  }
  out += "    return node_3\n";
  return out;
}

/// Backbone add-on: NAS-Bench-201 helper blocks followed by the `Network`
/// macro-skeleton with its training recipe.
inline CodeText emit_backbone_addon() {
  std::string text(templates::kBackboneHelpers);
  text += "\n";
  text += templates::kBackboneNetwork;
  return {std::move(text), Origin::NB201};
}

/// Comment add-on: a prose summary of task, macro-skeleton, and training.
inline CodeText emit_comment_addon(const TaskDescriptor& task) {
  const std::string color = task.in_channels == 3   ? "RGB"
                            : task.in_channels == 1 ? "grayscale"
                                                    : std::to_string(task.in_channels) + "-channel";
  std::string text = detail::substitute(
      templates::kCommentTemplate,
      {{"task", task.name},
       {"classes", std::to_string(task.num_classes)},
       {"height", std::to_string(task.height)},
       {"width", std::to_string(task.width)},
       {"color", color},
       {"in_channels", std::to_string(task.in_channels)},
       {"stem_channels", std::to_string(task.stem_channels)},
       {"total_cells", std::to_string(3 * task.cells_per_stage)},
       {"cells_per_stage", std::to_string(task.cells_per_stage)}});
  return {std::move(text), Origin::NB201};
}

/// Full code text for one cell. Blocks are separated by one blank line in the
/// order: comment docstring, backbone, helper classes, Cell.
inline CodeText emit_cell_code(const nb201::CellGenotype& g, VerbosityMode mode,
                               const ContextAddOns& addons = {},
                               const std::optional<TaskDescriptor>& task = std::nullopt) {
  std::vector<std::string> blocks;
  if (addons.comment) {
    blocks.push_back("\"\"\"\n" + emit_comment_addon(task.value_or(TaskDescriptor{})).text + "\"\"\"\n");
  }
  if (addons.backbone) blocks.push_back(emit_backbone_addon().text);
  if (mode == VerbosityMode::HelperMethod) {
    bool any_conv = false;
    for (nb201::OpKind op : g.ops()) {
      any_conv |= op == nb201::OpKind::NorConv1x1 || op == nb201::OpKind::NorConv3x3;
    }
    if (any_conv) blocks.emplace_back(templates::kReluConvBnHelper);
  }
  blocks.push_back(emit_cell_class(g, mode));
  std::string text;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (i) text += "\n";
    text += blocks[i];
  }
  return {detail::normalize_newlines(std::move(text)), Origin::NB201};
}

// --------------------------------------------------------------------------
// einspace

namespace detail {

inline std::string join_ints(const std::vector<std::int64_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(v[i]);
  }
  return out;
}

inline std::string camel_case(std::string_view base) {
  std::string out;
  bool up = true;
  for (char c : base) {
    if (c == '_') {
      up = true;
      continue;
    }
    out += up ? static_cast<char>(std::toupper(static_cast<unsigned char>(c))) : c;
    up = false;
  }
  return out;
}

class EinspaceEmitter {
 public:
  explicit EinspaceEmitter(std::optional<einspace::Shape> input_shape)
      : last_shape_(std::move(input_shape)) {}

  std::string emit(const einspace::DerivationTree& n, const std::string& parent_path) {
    const std::string path = parent_path.empty() ? n.name() : parent_path + "/" + n.name();
    using einspace::NodeKind;
    std::string field;
    switch (n.kind) {
      case NodeKind::Terminal:
        field = fresh(n.base);
        line("    self." + field + " = " + terminal_ctor(n, path) + "\n");
        break;
      case NodeKind::Computation: {
        const std::string inner = emit(n.children.front(), path);
        field = fresh("computation");
        line("    self." + field + " = ComputationModule(computation_fn=self." + inner + ")\n");
        break;
      }
      case NodeKind::Routing: {
        const std::string pre = emit(n.children[0], path);
        const std::string inner = emit(n.children[1], path);
        const std::string post = emit(n.children[2], path);
        field = fresh("routing");
        container(field, "RoutingModule",
                  {{"prerouting_fn", "self." + pre},
                   {"inner_fn", "self." + inner},
                   {"postrouting_fn", "self." + post}});
        break;
      }
      case NodeKind::Sequential: {
        std::vector<std::string> parts;
        for (const auto& c : n.children) parts.push_back(emit(c, path));
        field = fresh("sequential");
        if (parts.size() == 2) {
          container(field, "SequentialModule",
                    {{"first_fn", "self." + parts[0]}, {"second_fn", "self." + parts[1]}});
        } else {
          container(field, "SequentialModule", {{"fns", module_list(parts)}});
        }
        break;
      }
      case NodeKind::Branching: {
        const std::string branch = emit(n.children.front(), path);
        const std::optional<einspace::Shape> split_shape = last_shape_;
        std::vector<std::string> inner;
        for (std::size_t i = 1; i + 1 < n.children.size(); ++i) {
          last_shape_ = split_shape;
          inner.push_back(emit(n.children[i], path));
        }
        const std::string agg = emit(n.children.back(), path);
        field = fresh("branching");
        container(field, "BranchingModule",
                  {{"branching_fn", "self." + branch},
                   {"inner_fn", module_list(inner)},
                   {"aggregation_fn", "self." + agg}});
        break;
      }
    }
    if (n.out_feature_shape) last_shape_ = n.out_feature_shape;
    return field;
  }

  const std::string& body() const { return body_; }

 private:
  std::string fresh(const std::string& base) {
    const int k = counters_[base]++;
    return base + "_" + std::to_string(k);
  }

  void line(const std::string& s) { body_ += s; }

  void container(const std::string& field, const std::string& cls,
                 const std::vector<std::pair<std::string, std::string>>& args) {
    std::string s = "    self." + field + " = " + cls + "(\n";
    for (std::size_t i = 0; i < args.size(); ++i) {
      s += "      " + args[i].first + "=" + args[i].second;
      s += i + 1 < args.size() ? ",\n" : "\n";
    }
    s += "    )\n";
    line(s);
  }

  static std::string module_list(const std::vector<std::string>& fields) {
    std::string s = "nn.ModuleList([";
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) s += ", ";
      s += "self." + fields[i];
    }
    return s + "])";
  }

  const einspace::Shape& need_input_shape(const std::string& path) const {
    if (!last_shape_ || last_shape_->empty()) {
      throw InputError("transpile: no out_feature_shape available for the input of node '" +
                       path + "'");
    }
    return *last_shape_;
  }

  static void need_params(const einspace::DerivationTree& n, std::size_t count,
                          const std::string& path) {
    if (n.params.size() != count) {
      throw InputError("transpile: '" + n.base + "' expects " + std::to_string(count) +
                       " parameter(s) at node '" + path + "'");
    }
  }

  std::string terminal_ctor(const einspace::DerivationTree& n, const std::string& path) const {
    const auto& b = n.base;
    const auto p = [&](std::size_t i) { return std::to_string(n.params[i]); };
    if (b == "linear") {
      need_params(n, 1, path);
      return "nn.Linear(" + std::to_string(need_input_shape(path).back()) + ", " + p(0) + ")";
    }
    if (b == "im2col") {
      need_params(n, 3, path);
      return "Im2Col(input_shape=[1, " + join_ints(need_input_shape(path)) +
             "], kernel_size=" + p(0) + ", stride=" + p(1) + ", padding=" + p(2) + ")";
    }
    if (b == "clone") {
      need_params(n, 1, path);
      return "CloneTensor(num_clones=" + p(0) + ")";
    }
    if (b == "cat") {
      if (n.params.empty()) return "CatTensors(dim=1)";
      return "CatTensors(dim=" + std::to_string(n.params.back()) + ")";
    }
    if (b == "add") return "AddTensors()";
    if (b == "identity") return "nn.Identity()";
    if (b == "relu") return "nn.ReLU()";
    if (b == "leaky_relu") return "nn.LeakyReLU()";
    if (b == "gelu") return "nn.GELU()";
    if (b == "sigmoid") return "nn.Sigmoid()";
    if (b == "tanh") return "nn.Tanh()";
    if (b == "softmax") return "nn.Softmax(dim=-1)";
    return camel_case(b) + "(" + join_ints(n.params) + ")";
  }

  std::map<std::string, int> counters_;
  std::optional<einspace::Shape> last_shape_;
  std::string body_;
};

}  // namespace detail

/// Post-order transpilation of a derivation tree into a `Network` class.
/// Terminals that need an input width read it from the most recent
/// out_feature_shape in document order; `input_shape` seeds that lookup for
/// the first node. Branches of a branching node all start from the shape
/// produced by its branching function.
inline CodeText transpile_einspace(const einspace::DerivationTree& tree,
                                   std::optional<einspace::Shape> input_shape = std::nullopt) {
  detail::EinspaceEmitter em(std::move(input_shape));
  const std::string root = em.emit(tree, "");
  std::string text = "class Network(nn.Module):\n  def __init__(self):\n    super(Network, self).__init__()\n";
  text += em.body();
  text += "  def forward(self, x):\n    return self." + root + "(x)\n";
  return {std::move(text), Origin::Einspace};
}

/// Whitespace-normalizing comparison form: trailing spaces stripped, runs of
/// blank lines collapsed to one, leading/trailing blank lines dropped.
inline std::string normalize_whitespace(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string l(text.substr(start, nl - start));
    while (!l.empty() && (l.back() == ' ' || l.back() == '\t' || l.back() == '\r')) l.pop_back();
    lines.push_back(std::move(l));
    start = nl + 1;
  }
  std::string out;
  bool pending_blank = false;
  for (const auto& l : lines) {
    if (l.empty()) {
      pending_blank = !out.empty();
      continue;
    }
    if (pending_blank) out += "\n";
    pending_blank = false;
    out += l + "\n";
  }
  return out;
}

}  // namespace cole::codegen

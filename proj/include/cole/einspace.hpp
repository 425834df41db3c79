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

// einspace derivation trees in their bracketed string form, e.g.
//
//   branching(4)[
//     clone(4){'out_feature_shape': [3, 32, 32]},
//     sequential[ ... ],
//     cat(4,1){'out_feature_shape': [1024, 16]}
//   ]

#include <cctype>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cole/error.hpp"

namespace cole::einspace {

enum class NodeKind { Sequential, Branching, Routing, Computation, Terminal };

inline std::string_view kind_keyword(NodeKind k) {
  switch (k) {
    case NodeKind::Sequential: return "sequential";
    case NodeKind::Branching: return "branching";
    case NodeKind::Routing: return "routing";
    case NodeKind::Computation: return "computation";
    case NodeKind::Terminal: return "terminal";
  }
  return "terminal";
}

inline std::optional<NodeKind> nonterminal_from_keyword(std::string_view name) {
  if (name == "sequential") return NodeKind::Sequential;
  if (name == "branching") return NodeKind::Branching;
  if (name == "routing") return NodeKind::Routing;
  if (name == "computation") return NodeKind::Computation;
  return std::nullopt;
}

using Shape = std::vector<std::int64_t>;

struct DerivationTree {
  NodeKind kind = NodeKind::Terminal;
  std::string base;                     // e.g. "linear"
  std::vector<std::int64_t> params;     // e.g. {32}
  std::optional<Shape> out_feature_shape;
  // Attributes other than out_feature_shape, kept as raw value text.
  std::vector<std::pair<std::string, std::string>> opaque_attrs;
  std::vector<DerivationTree> children;

  /// The operation token as written, normalized: `im2col(3,2,1)`, `identity`.
  std::string name() const {
    std::string out = base;
    if (!params.empty()) {
      out += '(';
      for (std::size_t i = 0; i < params.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(params[i]);
      }
      out += ')';
    }
    return out;
  }

  friend bool operator==(const DerivationTree&, const DerivationTree&) = default;
};

struct Hyperparams {
  std::string base;
  std::vector<std::int64_t> params;
  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

namespace detail {

inline std::optional<std::int64_t> parse_int(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  bool neg = false;
  if (s.front() == '-' || s.front() == '+') {
    neg = s.front() == '-';
    s.remove_prefix(1);
  }
  if (s.empty() || s.size() > 18) return std::nullopt;
  std::int64_t v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + (c - '0');
  }
  return neg ? -v : v;
}

}  // namespace detail

/// Splits an operation token into base name and integer arguments.
inline Hyperparams extract_hyperparams(std::string_view token) {
  static const std::regex kToken(R"(^\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:\(([^()]*)\))?\s*$)");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_match(token.begin(), token.end(), m, kToken)) {
    throw InputError("malformed operation token '" + std::string(token) + "'");
  }
  Hyperparams out;
  out.base = m[1].str();
  if (m[2].matched) {
    const std::string args = m[2].str();
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = args.find(',', start);
      const std::string_view piece =
          std::string_view(args).substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      const auto v = detail::parse_int(piece);
      if (!v) {
        throw InputError("non-integer argument '" + std::string(piece) + "' in '" +
                         std::string(token) + "'");
      }
      out.params.push_back(*v);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  return out;
}

namespace detail {

class TreeParser {
 public:
  explicit TreeParser(std::string_view src) : src_(src) {}

  DerivationTree parse() {
    DerivationTree root = node();
    skip_ws();
    if (pos_ != src_.size()) {
      if (src_[pos_] == '{') fail("dangling attribute block");
      fail(std::string("unexpected trailing character '") + src_[pos_] + "'");
    }
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < src_.size() && src_[pos_] == c;
  }

  void expect(char c) {
    if (!peek(c)) {
      if (pos_ >= src_.size()) fail(std::string("unbalanced brackets: expected '") + c + "' before end of input");
      fail(std::string("expected '") + c + "', found '" + src_[pos_] + "'");
    }
    ++pos_;
  }

  std::string identifier() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      ++pos_;
    }
    if (start == pos_) {
      if (pos_ >= src_.size()) fail("unbalanced brackets: expected a node before end of input");
      if (src_[pos_] == '{') fail("dangling attribute block");
      fail(std::string("expected an operation name, found '") + src_[pos_] + "'");
    }
    if (std::isdigit(static_cast<unsigned char>(src_[start]))) {
      pos_ = start;
      fail("operation name cannot start with a digit");
    }
    return std::string(src_.substr(start, pos_ - start));
  }

  std::vector<std::int64_t> int_list(char close) {
    std::vector<std::int64_t> out;
    if (peek(close)) {
      ++pos_;
      return out;
    }
    while (true) {
      skip_ws();
      const std::size_t start = pos_;
      while (pos_ < src_.size() && src_[pos_] != ',' && src_[pos_] != close &&
             src_[pos_] != '[' && src_[pos_] != ']' && src_[pos_] != '(' &&
             src_[pos_] != ')' && src_[pos_] != '{' && src_[pos_] != '}') {
        ++pos_;
      }
      const auto v = parse_int(src_.substr(start, pos_ - start));
      if (!v) {
        const std::string bad(src_.substr(start, pos_ - start));
        pos_ = start;
        fail("non-integer parameter '" + bad + "'");
      }
      out.push_back(*v);
      if (peek(',')) {
        ++pos_;
        continue;
      }
      expect(close);
      return out;
    }
  }

  std::string quoted_key() {
    skip_ws();
    if (pos_ >= src_.size() || (src_[pos_] != '\'' && src_[pos_] != '"')) {
      fail("expected a quoted attribute key");
    }
    const char q = src_[pos_++];
    const std::size_t start = pos_;
    while (pos_ < src_.size() && src_[pos_] != q) ++pos_;
    if (pos_ >= src_.size()) fail("unterminated attribute key");
    std::string key(src_.substr(start, pos_ - start));
    ++pos_;
    return key;
  }

  // Raw value text up to the next top-level ',' or '}'.
  std::string opaque_value() {
    skip_ws();
    const std::size_t start = pos_;
    int depth = 0;
    char quote = 0;
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (quote) {
        if (c == quote) quote = 0;
      } else if (c == '\'' || c == '"') {
        quote = c;
      } else if (c == '[' || c == '(' || c == '{') {
        ++depth;
      } else if (c == ']' || c == ')' || c == '}') {
        if (depth == 0) break;
        --depth;
      } else if (c == ',' && depth == 0) {
        break;
      }
      ++pos_;
    }
    if (pos_ >= src_.size()) fail("unterminated attribute block");
    std::string_view v = src_.substr(start, pos_ - start);
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
    return std::string(v);
  }

  void attrs(DerivationTree& node) {
    expect('{');
    if (peek('}')) {
      ++pos_;
      return;
    }
    while (true) {
      const std::string key = quoted_key();
      expect(':');
      if (key == "out_feature_shape") {
        if (node.out_feature_shape) fail("duplicate out_feature_shape attribute");
        expect('[');
        node.out_feature_shape = int_list(']');
      } else {
        node.opaque_attrs.emplace_back(key, opaque_value());
      }
      if (peek(',')) {
        ++pos_;
        continue;
      }
      if (pos_ >= src_.size()) fail("unterminated attribute block");
      expect('}');
      return;
    }
  }

  DerivationTree node() {
    skip_ws();
    const std::size_t start = pos_;
    DerivationTree n;
    n.base = identifier();
    if (peek('(')) {
      ++pos_;
      n.params = int_list(')');
    }
    bool seen_attrs = false;
    if (peek('{')) {
      attrs(n);
      seen_attrs = true;
      if (peek('{')) fail("second attribute block on one node");
    }
    bool has_children = false;
    if (peek('[')) {
      const std::size_t open = pos_;
      ++pos_;
      has_children = true;
      while (true) {
        n.children.push_back(node());
        if (peek(',')) {
          ++pos_;
          continue;
        }
        if (pos_ >= src_.size()) {
          pos_ = open;
          fail("unbalanced brackets: '[' is never closed");
        }
        expect(']');
        break;
      }
      if (peek('{')) {
        if (seen_attrs) fail("second attribute block on one node");
        attrs(n);
      }
    }
    const auto kind = nonterminal_from_keyword(n.base);
    if (has_children) {
      if (!kind) {
        pos_ = start;
        fail("unknown non-terminal keyword '" + n.base + "'");
      }
      n.kind = *kind;
    } else {
      if (kind) {
        pos_ = start;
        fail("non-terminal '" + n.base + "' has no children");
      }
      n.kind = NodeKind::Terminal;
    }
    check_arity(n, start);
    return n;
  }

  void check_arity(const DerivationTree& n, std::size_t at) {
    const std::size_t c = n.children.size();
    const auto bad = [&](const std::string& what) {
      pos_ = at;
      fail(std::string(kind_keyword(n.kind)) + " " + what);
    };
    switch (n.kind) {
      case NodeKind::Sequential:
        if (c < 2) bad("needs at least 2 children");
        break;
      case NodeKind::Branching:
        if (c < 3) bad("needs branching fn, inner fn(s), aggregation fn");
        if (n.children.front().kind != NodeKind::Terminal) bad("branching fn must be a terminal");
        if (n.children.back().kind != NodeKind::Terminal) bad("aggregation fn must be a terminal");
        break;
      case NodeKind::Routing:
        if (c != 3) bad("needs exactly prerouting, inner, postrouting children");
        if (n.children.front().kind != NodeKind::Terminal) bad("prerouting fn must be a terminal");
        if (n.children.back().kind != NodeKind::Terminal) bad("postrouting fn must be a terminal");
        break;
      case NodeKind::Computation:
        if (c != 1 || n.children.front().kind != NodeKind::Terminal) {
          bad("must wrap exactly one terminal");
        }
        break;
      case NodeKind::Terminal:
        break;
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

inline void write_attrs(const DerivationTree& n, std::string& out) {
  if (!n.out_feature_shape && n.opaque_attrs.empty()) return;
  out += '{';
  bool first = true;
  if (n.out_feature_shape) {
    out += "'out_feature_shape': [";
    for (std::size_t i = 0; i < n.out_feature_shape->size(); ++i) {
      if (i) out += ", ";
      out += std::to_string((*n.out_feature_shape)[i]);
    }
    out += ']';
    first = false;
  }
  for (const auto& [k, v] : n.opaque_attrs) {
    if (!first) out += ", ";
    out += '\'' + k + "': " + v;
    first = false;
  }
  out += '}';
}

inline void write_tree(const DerivationTree& n, int depth, std::string& out) {
  const std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
  out += indent;
  out += n.name();
  if (n.kind == NodeKind::Terminal) {
    write_attrs(n, out);
    return;
  }
  if (n.kind == NodeKind::Computation) {
    std::string inner;
    write_tree(n.children.front(), 0, inner);
    out += '[' + inner + ']';
    write_attrs(n, out);
    return;
  }
  out += "[\n";
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    write_tree(n.children[i], depth + 1, out);
    out += i + 1 < n.children.size() ? ",\n" : "\n";
  }
  out += indent + ']';
  write_attrs(n, out);
}

}  // namespace detail

/// Parses a derivation tree string. Whitespace between tokens is ignored.
inline DerivationTree parse_derivation_tree(std::string_view text) {
  return detail::TreeParser(text).parse();
}

/// Canonical multi-line form: 2-space indent, one child per line, computation
/// nodes kept on a single line. Parsing the output yields an equal tree.
inline std::string to_canonical_string(const DerivationTree& tree) {
  std::string out;
  detail::write_tree(tree, 0, out);
  return out;
}

}  // namespace cole::einspace

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

// NAS-Bench-201 cell genotypes: a 4-node DAG with one operation on each of
// the 6 forward edges, written as `|op~0|+|op~0|op~1|+|op~0|op~1|op~2|`.

#include <array>
#include <bitset>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cole/error.hpp"
#include "cole/rng.hpp"

namespace cole::nb201 {

enum class OpKind : std::uint8_t {
  Zeroize = 0,
  SkipConnect = 1,
  NorConv1x1 = 2,
  NorConv3x3 = 3,
  AvgPool3x3 = 4,
};

inline constexpr std::size_t kNumOps = 5;
inline constexpr std::size_t kNumNodes = 4;
inline constexpr std::size_t kNumEdges = 6;
inline constexpr std::size_t kSpaceSize = 15625;  // 5^6
inline constexpr std::size_t kPathEncodingBits = 5 + 25 + 25 + 125;

inline constexpr std::array<OpKind, kNumOps> kAllOps = {
    OpKind::Zeroize, OpKind::SkipConnect, OpKind::NorConv1x1,
    OpKind::NorConv3x3, OpKind::AvgPool3x3};

struct Edge {
  int src;
  int dst;
  friend constexpr bool operator==(Edge, Edge) = default;
};

// Canonical edge order: grouped by target node, then source node. This is
// also the significance order of enumerate_space().
inline constexpr std::array<Edge, kNumEdges> kEdges = {
    {{0, 1}, {0, 2}, {1, 2}, {0, 3}, {1, 3}, {2, 3}}};

constexpr std::size_t edge_index(int src, int dst) {
  // Target dst owns slots [dst*(dst-1)/2, dst*(dst+1)/2).
  return static_cast<std::size_t>(dst * (dst - 1) / 2 + src);
}

constexpr std::string_view op_token(OpKind op) {
  switch (op) {
    case OpKind::Zeroize: return "none";
    case OpKind::SkipConnect: return "skip_connect";
    case OpKind::NorConv1x1: return "nor_conv_1x1";
    case OpKind::NorConv3x3: return "nor_conv_3x3";
    case OpKind::AvgPool3x3: return "avg_pool_3x3";
  }
  return "none";
}

inline std::optional<OpKind> op_from_token(std::string_view token) {
  for (OpKind op : kAllOps) {
    if (op_token(op) == token) return op;
  }
  return std::nullopt;
}

class CellGenotype {
 public:
  CellGenotype() { ops_.fill(OpKind::Zeroize); }
  explicit CellGenotype(const std::array<OpKind, kNumEdges>& ops) : ops_(ops) {}

  OpKind op(int src, int dst) const { return ops_[edge_index(src, dst)]; }
  void set_op(int src, int dst, OpKind op) { ops_[edge_index(src, dst)] = op; }

  /// Ops in canonical edge order (see kEdges).
  const std::array<OpKind, kNumEdges>& ops() const { return ops_; }

  /// Position in the canonical enumeration, in [0, 15625).
  std::size_t index() const {
    std::size_t idx = 0;
    for (OpKind op : ops_) idx = idx * kNumOps + static_cast<std::size_t>(op);
    return idx;
  }

  static CellGenotype from_index(std::size_t idx) {
    std::array<OpKind, kNumEdges> ops{};
    for (std::size_t e = kNumEdges; e-- > 0;) {
      ops[e] = static_cast<OpKind>(idx % kNumOps);
      idx /= kNumOps;
    }
    return CellGenotype(ops);
  }

  friend bool operator==(const CellGenotype&, const CellGenotype&) = default;

 private:
  std::array<OpKind, kNumEdges> ops_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
           c == '\v';
  };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

}  // namespace detail

/// Parses the pipe-delimited genotype string. Stage k (1-based) must list
/// sources 0..k-1 in ascending order.
inline CellGenotype parse_arch_string(std::string_view text) {
  const std::string_view s = detail::trim(text);
  if (s.empty()) throw ParseError("empty architecture string", 0);
  const std::size_t base = static_cast<std::size_t>(s.data() - text.data());

  CellGenotype g;
  std::size_t stage_begin = 0;
  int target = 1;
  while (true) {
    const std::size_t plus = s.find('+', stage_begin);
    const std::size_t stage_end = plus == std::string_view::npos ? s.size() : plus;
    const std::string_view stage = s.substr(stage_begin, stage_end - stage_begin);
    const std::size_t stage_off = base + stage_begin;
    if (target > 3) {
      throw ParseError("too many stages: unexpected segment '" +
                           std::string(stage) + "'",
                       stage_off);
    }
    if (stage.size() < 2 || stage.front() != '|' || stage.back() != '|') {
      throw ParseError("stage " + std::to_string(target) +
                           " must be enclosed in '|': '" + std::string(stage) + "'",
                       stage_off);
    }
    int expected_src = 0;
    std::size_t pos = 1;
    while (pos < stage.size()) {
      const std::size_t bar = stage.find('|', pos);
      const std::string_view edge = stage.substr(pos, bar - pos);
      const std::size_t edge_off = stage_off + pos;
      const std::size_t tilde = edge.find('~');
      if (tilde == std::string_view::npos) {
        throw ParseError("edge '" + std::string(edge) + "' lacks '~<source>'",
                         edge_off);
      }
      const std::string_view token = edge.substr(0, tilde);
      const std::string_view src_text = edge.substr(tilde + 1);
      const auto op = op_from_token(token);
      if (!op) {
        throw ParseError("unknown op '" + std::string(token) + "'", edge_off);
      }
      if (src_text.size() != 1 || src_text[0] < '0' || src_text[0] > '9') {
        throw ParseError("bad source index in edge '" + std::string(edge) + "'",
                         edge_off);
      }
      const int src = src_text[0] - '0';
      if (src >= target) {
        throw ParseError("source index " + std::to_string(src) +
                             " >= target " + std::to_string(target) +
                             " in edge '" + std::string(edge) + "'",
                         edge_off);
      }
      if (src != expected_src) {
        throw ParseError("edge '" + std::string(edge) + "' out of order; expected source " +
                             std::to_string(expected_src),
                         edge_off);
      }
      g.set_op(src, target, *op);
      ++expected_src;
      pos = bar + 1;
    }
    if (expected_src != target) {
      throw ParseError("stage " + std::to_string(target) + " has " +
                           std::to_string(expected_src) + " edges, expected " +
                           std::to_string(target) + ": '" + std::string(stage) + "'",
                       stage_off);
    }
    if (plus == std::string_view::npos) break;
    stage_begin = plus + 1;
    ++target;
  }
  if (target != 3) {
    throw ParseError("expected 3 stages, found " + std::to_string(target),
                     base + s.size());
  }
  return g;
}

inline std::string format_arch_string(const CellGenotype& g) {
  std::string out;
  out.reserve(96);
  for (int dst = 1; dst < static_cast<int>(kNumNodes); ++dst) {
    if (dst > 1) out += '+';
    out += '|';
    for (int src = 0; src < dst; ++src) {
      out += op_token(g.op(src, dst));
      out += '~';
      out += static_cast<char>('0' + src);
      out += '|';
    }
  }
  return out;
}

/// All 5^6 genotypes, lexicographic over kEdges with ops in OpKind order.
inline std::vector<CellGenotype> enumerate_space() {
  std::vector<CellGenotype> out;
  out.reserve(kSpaceSize);
  for (std::size_t i = 0; i < kSpaceSize; ++i) out.push_back(CellGenotype::from_index(i));
  return out;
}

/// Resamples exactly one edge to one of the four other ops, uniformly.
inline CellGenotype mutate(const CellGenotype& g, Rng& rng) {
  const std::size_t draw = rng.uniform_index(kNumEdges * (kNumOps - 1));
  const std::size_t e = draw / (kNumOps - 1);
  const std::size_t shift = 1 + draw % (kNumOps - 1);
  auto ops = g.ops();
  ops[e] = static_cast<OpKind>((static_cast<std::size_t>(ops[e]) + shift) % kNumOps);
  return CellGenotype(ops);
}

using PathEncoding = std::bitset<kPathEncodingBits>;

// Block offsets of the four input->output node paths.
inline constexpr std::size_t kPathBlock03 = 0;     // 0->3
inline constexpr std::size_t kPathBlock013 = 5;    // 0->1->3
inline constexpr std::size_t kPathBlock023 = 30;   // 0->2->3
inline constexpr std::size_t kPathBlock0123 = 55;  // 0->1->2->3

/// One bit per op-labelled input->output path; a path contributes only when
/// none of its edges is Zeroize.
inline PathEncoding path_encode(const CellGenotype& g) {
  PathEncoding bits;
  const auto id = [](OpKind op) { return static_cast<std::size_t>(op); };
  const auto live = [](OpKind op) { return op != OpKind::Zeroize; };
  const OpKind a = g.op(0, 3);
  if (live(a)) bits.set(kPathBlock03 + id(a));
  const OpKind b1 = g.op(0, 1), b2 = g.op(1, 3);
  if (live(b1) && live(b2)) bits.set(kPathBlock013 + id(b1) * 5 + id(b2));
  const OpKind c1 = g.op(0, 2), c2 = g.op(2, 3);
  if (live(c1) && live(c2)) bits.set(kPathBlock023 + id(c1) * 5 + id(c2));
  const OpKind d1 = g.op(0, 1), d2 = g.op(1, 2), d3 = g.op(2, 3);
  if (live(d1) && live(d2) && live(d3)) {
    bits.set(kPathBlock0123 + id(d1) * 25 + id(d2) * 5 + id(d3));
  }
  return bits;
}

inline std::vector<double> path_encoding_features(const CellGenotype& g) {
  const PathEncoding bits = path_encode(g);
  std::vector<double> out(kPathEncodingBits);
  for (std::size_t i = 0; i < kPathEncodingBits; ++i) out[i] = bits[i] ? 1.0 : 0.0;
  return out;
}

}  // namespace cole::nb201

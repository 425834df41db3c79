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

#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cole/einspace.hpp"
#include "cole/rng.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace es = cole::einspace;
using es::NodeKind;
using cole::testing::node;
using cole::testing::random_tree;
using cole::testing::terminal;

TEST(EinspaceHyperparams, SplitsBaseAndArgs) {
  EXPECT_EQ(es::extract_hyperparams("im2col(3,2,1)"), (es::Hyperparams{"im2col", {3, 2, 1}}));
  EXPECT_EQ(es::extract_hyperparams("linear( 32 )"), (es::Hyperparams{"linear", {32}}));
  EXPECT_EQ(es::extract_hyperparams("identity"), (es::Hyperparams{"identity", {}}));
  EXPECT_EQ(es::extract_hyperparams("cat(4,-1)"), (es::Hyperparams{"cat", {4, -1}}));
  EXPECT_THROW(es::extract_hyperparams("linear(3.5)"), cole::InputError);
  EXPECT_THROW(es::extract_hyperparams("9lives"), cole::InputError);
}

TEST(EinspaceParse, ReferenceTreeStructure) {
  const auto t = es::parse_derivation_tree(cole::testing::fixture("einspace_tree.txt"));
  ASSERT_EQ(t.kind, NodeKind::Branching);
  EXPECT_EQ(t.params, (std::vector<std::int64_t>{4}));
  ASSERT_EQ(t.children.size(), 3u);
  EXPECT_EQ(t.children[0].name(), "clone(4)");
  EXPECT_EQ(t.children[0].out_feature_shape, (es::Shape{3, 32, 32}));
  const auto& seq = t.children[1];
  ASSERT_EQ(seq.kind, NodeKind::Sequential);
  ASSERT_EQ(seq.children.size(), 2u);
  const auto& routing = seq.children[0];
  ASSERT_EQ(routing.kind, NodeKind::Routing);
  EXPECT_EQ(routing.children[0].name(), "im2col(3,2,1)");
  EXPECT_EQ(routing.children[0].out_feature_shape, (es::Shape{256, 27}));
  ASSERT_EQ(routing.children[1].kind, NodeKind::Computation);
  EXPECT_EQ(routing.children[1].children[0].name(), "linear(32)");
  EXPECT_EQ(routing.children[2].name(), "identity");
  EXPECT_EQ(seq.children[1].children[0].out_feature_shape, (es::Shape{256, 16}));
  EXPECT_EQ(t.children[2].name(), "cat(4,1)");
  EXPECT_EQ(t.children[2].out_feature_shape, (es::Shape{1024, 16}));
}

TEST(EinspaceCanonical, ReferenceTreeIsAlreadyCanonical) {
  std::string text = cole::testing::fixture("einspace_tree.txt");
  while (!text.empty() && text.back() == '\n') text.pop_back();
  EXPECT_EQ(es::to_canonical_string(es::parse_derivation_tree(text)), text);
}

TEST(EinspaceCanonical, WhitespaceInsensitive) {
  const auto a = es::parse_derivation_tree(cole::testing::fixture("einspace_tree.txt"));
  const auto b = es::parse_derivation_tree(
      "branching(4)[clone(4){'out_feature_shape':[3,32,32]},sequential[routing[im2col(3,2,1){'out_feature_shape':"
      "[256,27]},computation[linear(32){'out_feature_shape':[256,32]}],identity{'out_feature_shape':[256,32]}],"
      "computation[linear(16){'out_feature_shape':[256,16]}]],cat(4,1){'out_feature_shape':[1024,16]}]");
  EXPECT_EQ(a, b);
}

TEST(EinspaceCanonical, OpaqueAttributesSurvive) {
  const auto t = es::parse_derivation_tree(
      "computation[relu{'out_feature_shape': [8], 'note': 'x, y', 'depth': {'a': [1, 2]}}]");
  const auto& leaf = t.children[0];
  ASSERT_EQ(leaf.opaque_attrs.size(), 2u);
  EXPECT_EQ(leaf.opaque_attrs[0].first, "note");
  EXPECT_EQ(es::parse_derivation_tree(es::to_canonical_string(t)), t);
}

TEST(EinspaceCanonical, FixedPointOnRandomTrees) {
  cole::Rng rng(2024);
  for (int i = 0; i < 300; ++i) {
    const auto t = random_tree(rng, 1 + static_cast<int>(rng.uniform_index(4)));
    const std::string once = es::to_canonical_string(t);
    const auto back = es::parse_derivation_tree(once);
    ASSERT_EQ(back, t) << once;
    ASSERT_EQ(es::to_canonical_string(back), once);
  }
}

struct BadTree {
  const char* text;
  const char* fragment;
};

class EinspaceParseErrors : public ::testing::TestWithParam<BadTree> {};

TEST_P(EinspaceParseErrors, Rejected) {
  try {
    es::parse_derivation_tree(GetParam().text);
    FAIL() << "accepted " << GetParam().text;
  } catch (const cole::ParseError& e) {
    EXPECT_NE(std::string(e.what()).find(GetParam().fragment), std::string::npos) << e.what();
  }
}

INSTANTIATE_TEST_SUITE_P(
    Cases, EinspaceParseErrors,
    ::testing::Values(
        BadTree{"sequential[computation[relu], computation[relu]", "unbalanced brackets"},
        BadTree{"sequential[computation[relu], computation[relu]]]", "unexpected trailing character"},
        BadTree{"{'out_feature_shape': [1]}", "dangling attribute block"},
        BadTree{"loop[computation[relu], computation[relu]]", "unknown non-terminal keyword 'loop'"},
        BadTree{"computation[linear(a)]", "non-integer parameter"},
        BadTree{"sequential[computation[relu]]", "at least 2 children"},
        BadTree{"routing[relu, computation[relu]]", "exactly prerouting"},
        BadTree{"branching(2)[clone(2), computation[relu], computation[relu]]", "aggregation fn must be a terminal"},
        BadTree{"computation[relu, relu]", "exactly one terminal"},
        BadTree{"sequential", "has no children"},
        BadTree{"computation[relu{'out_feature_shape': [1]}{'x': 1}]", "second attribute block"},
        BadTree{"computation[relu{'out_feature_shape': [1]", "unterminated attribute block"}));

TEST(EinspaceParse, AttributesAfterChildren) {
  const auto t = es::parse_derivation_tree(
      "sequential[computation[relu], computation[relu]]{'out_feature_shape': [4, 4]}");
  EXPECT_EQ(t.out_feature_shape, (es::Shape{4, 4}));
}

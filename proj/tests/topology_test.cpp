// Copyright 2026 The GDCA-Tree Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "gdca/errors.hpp"
#include "gdca/topology.hpp"

namespace gdca {
namespace {

// Leaves of a (2, 2) tree holding 649, 649, 649 and 4546 points.
Partition wine_partition(const Topology& t) {
  const std::vector<double> fr{0.1, 0.1, 0.1, 0.7};
  const auto leaves = t.leaves();
  return partition_by_fractions(6493, fr, leaves, 1);
}

TEST(BuildTree, ExperimentShapes) {
  const std::vector<int> wine{2, 2};
  const auto t = Topology::build_tree(wine);
  EXPECT_EQ(t.size(), 7u);
  EXPECT_EQ(t.depth(), 2);
  EXPECT_EQ(t.leaves().size(), 4u);
  EXPECT_EQ(t.node(t.root()).children.size(), 2u);
  EXPECT_EQ(t.node(NodeId{1}).layer, 1);
  EXPECT_EQ(t.node(NodeId{5}).parent, NodeId{2});

  const std::vector<int> covtype{2, 4};
  EXPECT_EQ(Topology::build_tree(covtype).leaves().size(), 8u);

  const std::vector<int> minimal{1};
  const auto one = Topology::build_tree(minimal);
  EXPECT_EQ(one.size(), 2u);
  EXPECT_EQ(one.depth(), 1);
}

TEST(BuildTree, Errors) {
  EXPECT_THROW(Topology::build_tree(std::vector<int>{}), ConfigError);
  EXPECT_THROW(Topology::build_tree(std::vector<int>{2, 0}), ConfigError);
}

TEST(FromParents, GeneralTree) {
  // Root 0 with children 1 and 2; node 1 has three leaves, node 2 has one.
  const std::vector<int> parents{-1, 0, 0, 1, 1, 1, 2};
  const auto t = Topology::from_parents(parents);
  EXPECT_EQ(t.depth(), 2);
  EXPECT_EQ(t.leaves(), (std::vector<NodeId>{{3}, {4}, {5}, {6}}));
}

TEST(FromParents, Errors) {
  EXPECT_THROW(Topology::from_parents(std::vector<int>{-1, -1}), ConfigError);
  EXPECT_THROW(Topology::from_parents(std::vector<int>{1, 0}), ConfigError);
  EXPECT_THROW(Topology::from_parents(std::vector<int>{-1, 0, 0, 1}), ConfigError);  // ragged
  EXPECT_THROW(Topology::from_parents(std::vector<int>{-1, 5}), ConfigError);
  EXPECT_THROW(Topology::from_parents(std::vector<int>{-1}), ConfigError);
  EXPECT_THROW(Topology::from_parents(std::vector<int>{-1, 2, 1}), ConfigError);  // cycle
}

TEST(NodeIndexSet, LeafParentRoot) {
  const std::vector<int> parents{-1, 0, 0, 1, 1, 2};
  const auto t = Topology::from_parents(parents);
  Partition p;
  p.blocks[NodeId{3}] = {3, 7};
  p.blocks[NodeId{4}] = {1, 2};
  p.blocks[NodeId{5}] = {0, 4, 5, 6};
  EXPECT_EQ(node_index_set(t, p, NodeId{3}), (std::vector<std::size_t>{3, 7}));
  EXPECT_EQ(node_index_set(t, p, NodeId{1}), (std::vector<std::size_t>{1, 2, 3, 7}));
  EXPECT_EQ(node_index_set(t, p, t.root()).size(), 8u);
  EXPECT_THROW(node_index_set(t, p, NodeId{9}), UnknownNode);
}

TEST(ComputeBetas, WineSplitWeights) {
  const std::vector<int> fanout{2, 2};
  const auto t = Topology::build_tree(fanout);
  const auto p = wine_partition(t);
  const auto w = compute_betas(t, p, WeightMode::kDataProportional);
  EXPECT_DOUBLE_EQ(w.at(NodeId{1})[0], 0.5);
  EXPECT_DOUBLE_EQ(w.at(NodeId{1})[1], 0.5);
  EXPECT_NEAR(w.at(NodeId{2})[0], 0.1249, 1e-4);
  EXPECT_NEAR(w.at(NodeId{2})[1], 0.8750, 1e-4);
  EXPECT_NEAR(w.at(t.root())[0], 0.2, 1e-3);
  EXPECT_NEAR(w.at(t.root())[1], 0.8, 1e-3);
}

TEST(ComputeBetas, UniformAndSingleChild) {
  const std::vector<int> four{4};
  const auto t = Topology::build_tree(four);
  const std::vector<double> fr{0.1, 0.2, 0.3, 0.4};
  const auto p = partition_by_fractions(100, fr, t.leaves(), 1);
  const auto uniform = compute_betas(t, p, WeightMode::kUniform);
  for (const double b : uniform.at(t.root())) {
    EXPECT_EQ(b, 0.25);
  }

  const std::vector<int> one{1};
  const auto single = Topology::build_tree(one);
  const std::vector<double> all{1.0};
  const auto sp = partition_by_fractions(10, all, single.leaves(), 1);
  EXPECT_EQ(compute_betas(single, sp, WeightMode::kUniform).at(single.root())[0], 1.0);
  EXPECT_EQ(compute_betas(single, sp, WeightMode::kDataProportional).at(single.root())[0], 1.0);
}

TEST(ComputeBetas, EmptyNodeUnderDataProportional) {
  const std::vector<int> parents{-1, 0, 0, 1, 2};
  const auto t = Topology::from_parents(parents);
  Partition p;
  p.blocks[NodeId{3}] = {0, 1};
  p.blocks[NodeId{4}] = {};
  EXPECT_THROW(compute_betas(t, p, WeightMode::kDataProportional), EmptyNode);
  EXPECT_NO_THROW(compute_betas(t, p, WeightMode::kUniform));
}

// Random trees and partitions: weights are a probability vector per parent,
// and equal-size children get uniform weights.
TEST(ComputeBetas, PropertySumToOne) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> fan(1, 4);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> fanout(static_cast<std::size_t>(1 + trial % 3));
    for (auto& f : fanout) f = fan(rng);
    const auto t = Topology::build_tree(fanout);
    const auto leaves = t.leaves();
    std::vector<double> fr(leaves.size());
    double s = 0.0;
    for (auto& f : fr) s += (f = u(rng));
    for (auto& f : fr) f /= s;
    const auto p = partition_by_fractions(5000, fr, leaves, trial);
    EXPECT_EQ(node_index_set(t, p, t.root()).size(), 5000u);
    for (const auto mode : {WeightMode::kUniform, WeightMode::kDataProportional}) {
      const auto w = compute_betas(t, p, mode);
      for (const auto& [parent, beta] : w.beta) {
        const double sum = std::accumulate(beta.begin(), beta.end(), 0.0);
        EXPECT_NEAR(sum, 1.0, 1e-12);
        for (const double b : beta) {
          EXPECT_GE(b, 0.0);
          EXPECT_LE(b, 1.0);
        }
      }
    }
  }

  const std::vector<int> fanout{3, 2};
  const auto t = Topology::build_tree(fanout);
  const std::vector<double> even(6, 1.0 / 6.0);
  const auto p = partition_by_fractions(600, even, t.leaves(), 2);
  const auto prop = compute_betas(t, p, WeightMode::kDataProportional);
  const auto uni = compute_betas(t, p, WeightMode::kUniform);
  for (const auto& [parent, beta] : prop.beta) {
    for (std::size_t k = 0; k < beta.size(); ++k) {
      EXPECT_NEAR(beta[k], uni.at(parent)[k], 1e-15);
    }
  }
}

TEST(ScheduleIterations, UniformAndPinned) {
  const std::vector<int> fanout{2, 2};
  const auto t = Topology::build_tree(fanout);
  const auto p = wine_partition(t);
  const std::vector<int> base{5, 10, 100};
  const auto uniform = schedule_iterations(t, p, base);
  EXPECT_EQ(uniform.at(t.root()), 5);
  EXPECT_EQ(uniform.at(NodeId{1}), 10);
  for (const auto leaf : t.leaves()) EXPECT_EQ(uniform.at(leaf), 100);

  IterationOptions pinned;
  pinned.mode = IterationMode::kDelayed;
  pinned.leaf_pins[NodeId{6}] = 300;
  EXPECT_EQ(schedule_iterations(t, p, base, pinned).at(NodeId{6}), 300);

  IterationOptions bad_pin;
  bad_pin.leaf_pins[NodeId{1}] = 300;
  EXPECT_THROW(schedule_iterations(t, p, base, bad_pin), ConfigError);
}

TEST(ScheduleIterations, DelayedProportional) {
  const std::vector<int> fanout{2, 2};
  const auto t = Topology::build_tree(fanout);
  const auto p = wine_partition(t);
  const std::vector<int> base{5, 10, 100};
  IterationOptions delayed;
  delayed.mode = IterationMode::kDelayed;
  const auto s = schedule_iterations(t, p, base, delayed);
  EXPECT_EQ(s.at(NodeId{3}), 100);
  EXPECT_EQ(s.at(NodeId{4}), 100);
  EXPECT_EQ(s.at(NodeId{5}), 25);   // 100 * 649 / 2597.5
  EXPECT_EQ(s.at(NodeId{6}), 175);  // 100 * 4546 / 2597.5
  EXPECT_EQ(s.at(NodeId{1}), 10);

  delayed.scope = DelayedScope::kBottleneckOnly;
  const auto b = schedule_iterations(t, p, base, delayed);
  EXPECT_EQ(b.at(NodeId{5}), 100);
  EXPECT_EQ(b.at(NodeId{6}), 175);
}

TEST(ScheduleIterations, SingleLeafAndMissingLayer) {
  const std::vector<int> one{1};
  const auto t = Topology::build_tree(one);
  const std::vector<double> all{1.0};
  const auto p = partition_by_fractions(10, all, t.leaves(), 1);
  IterationOptions delayed;
  delayed.mode = IterationMode::kDelayed;
  const std::vector<int> base{3, 40};
  EXPECT_EQ(schedule_iterations(t, p, base, delayed).at(t.leaves()[0]), 40);
  const std::vector<int> short_base{3};
  EXPECT_THROW(schedule_iterations(t, p, short_base), ConfigError);
}

}  // namespace
}  // namespace gdca

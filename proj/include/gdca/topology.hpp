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

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "gdca/dataset.hpp"
#include "gdca/topology_types.hpp"

namespace gdca {

struct TreeNode {
  NodeId id;
  int layer = 0;
  std::optional<NodeId> parent;
  std::vector<NodeId> children;

  bool is_leaf() const { return children.empty(); }
};

// Rooted aggregation tree. The root sits on layer 0 and every leaf on layer
// depth(). Node ids are dense: 0 .. size()-1.
class Topology {
 public:
  // Complete tree with the given fan-out per layer; ids assigned breadth-first.
  static Topology build_tree(std::span<const int> fanout);
  // parents[i] is the parent of node i, or -1 for the root.
  static Topology from_parents(std::span<const int> parents);

  std::size_t size() const { return nodes_.size(); }
  int depth() const { return depth_; }
  NodeId root() const { return root_; }
  const TreeNode& node(NodeId id) const;
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  // Leaves in breadth-first order.
  std::vector<NodeId> leaves() const;

 private:
  explicit Topology(std::vector<TreeNode> nodes);

  std::vector<TreeNode> nodes_;
  NodeId root_;
  int depth_ = 0;
};

// Sorted union of the partition blocks below `node`.
std::vector<std::size_t> node_index_set(const Topology& topology,
                                        const Partition& partition, NodeId node);

enum class WeightMode { kUniform, kDataProportional };

WeightMode weight_mode_from_name(const std::string& name);

// Aggregation weights: beta[parent][k] belongs to the k-th child of parent.
struct WeightSchedule {
  std::map<NodeId, std::vector<double>> beta;

  const std::vector<double>& at(NodeId parent) const;
};

WeightSchedule compute_betas(const Topology& topology, const Partition& partition,
                             WeightMode mode);

enum class IterationMode { kUniform, kDelayed };
enum class DelayedScope { kAllLeaves, kBottleneckOnly };

IterationMode iteration_mode_from_name(const std::string& name);
DelayedScope delayed_scope_from_name(const std::string& name);

struct IterationOptions {
  IterationMode mode = IterationMode::kUniform;
  DelayedScope scope = DelayedScope::kAllLeaves;
  // Explicit per-leaf counts; override whatever the mode computes.
  std::map<NodeId, int> leaf_pins;
};

// Per-node iteration counts: T_i for internal nodes, T_p for leaves.
struct IterationSchedule {
  std::map<NodeId, int> count;

  int at(NodeId node) const;
};

// base_T[i] is the count for layer i (the root's entry is the number of root
// outer iterations). Delayed mode scales each leaf by its block size over the
// mean block size of its siblings, rounded and clamped to >= 1.
IterationSchedule schedule_iterations(const Topology& topology,
                                      const Partition& partition,
                                      std::span<const int> base_T,
                                      const IterationOptions& options = {});

}  // namespace gdca

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

#include "gdca/topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "gdca/errors.hpp"

namespace gdca {

Topology::Topology(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
  std::optional<NodeId> root;
  for (const auto& n : nodes_) {
    if (!n.parent) {
      if (root) throw ConfigError("tree has more than one root");
      root = n.id;
    }
  }
  if (!root) throw ConfigError("tree has no root");
  root_ = *root;

  // Assign layers breadth-first; unreachable nodes mean a cycle.
  std::vector<int> layer(nodes_.size(), -1);
  std::deque<NodeId> queue{root_};
  layer[root_.value] = 0;
  std::size_t visited = 0;
  while (!queue.empty()) {
    const NodeId id = queue.front();
    queue.pop_front();
    ++visited;
    for (const NodeId c : nodes_[id.value].children) {
      layer[c.value] = layer[id.value] + 1;
      queue.push_back(c);
    }
  }
  if (visited != nodes_.size()) throw ConfigError("parent list contains a cycle");

  depth_ = -1;
  for (auto& n : nodes_) {
    n.layer = layer[n.id.value];
    if (n.is_leaf()) {
      if (depth_ < 0) depth_ = n.layer;
      if (n.layer != depth_) {
        throw ConfigError("all leaves must be on the same layer");
      }
    }
  }
  if (depth_ < 1) throw ConfigError("tree needs at least one layer below the root");
}

Topology Topology::build_tree(std::span<const int> fanout) {
  if (fanout.empty()) throw ConfigError("fan-out list is empty");
  std::vector<int> parents{-1};
  std::vector<int> frontier{0};
  for (const int k : fanout) {
    if (k < 1) throw ConfigError("fan-out counts must be >= 1");
    std::vector<int> next;
    for (const int p : frontier) {
      for (int c = 0; c < k; ++c) {
        next.push_back(static_cast<int>(parents.size()));
        parents.push_back(p);
      }
    }
    frontier = std::move(next);
  }
  return from_parents(parents);
}

Topology Topology::from_parents(std::span<const int> parents) {
  if (parents.empty()) throw ConfigError("parent list is empty");
  std::vector<TreeNode> nodes(parents.size());
  for (std::size_t i = 0; i < parents.size(); ++i) {
    nodes[i].id = NodeId{static_cast<std::uint32_t>(i)};
  }
  for (std::size_t i = 0; i < parents.size(); ++i) {
    const int p = parents[i];
    if (p < 0) continue;
    if (static_cast<std::size_t>(p) >= parents.size() || static_cast<std::size_t>(p) == i) {
      throw ConfigError("invalid parent " + std::to_string(p) + " for node " +
                        std::to_string(i));
    }
    nodes[i].parent = NodeId{static_cast<std::uint32_t>(p)};
    nodes[p].children.push_back(nodes[i].id);
  }
  return Topology(std::move(nodes));
}

const TreeNode& Topology::node(NodeId id) const {
  if (id.value >= nodes_.size()) {
    throw UnknownNode("unknown node " + std::to_string(id.value));
  }
  return nodes_[id.value];
}

std::vector<NodeId> Topology::leaves() const {
  std::vector<NodeId> out;
  std::deque<NodeId> queue{root_};
  while (!queue.empty()) {
    const NodeId id = queue.front();
    queue.pop_front();
    const auto& n = nodes_[id.value];
    if (n.is_leaf()) out.push_back(id);
    for (const NodeId c : n.children) queue.push_back(c);
  }
  return out;
}

namespace {

void collect_indices(const Topology& topology, const Partition& partition, NodeId id,
                     std::vector<std::size_t>& out) {
  const auto& n = topology.node(id);
  if (n.is_leaf()) {
    const auto& b = partition.block(id);
    out.insert(out.end(), b.begin(), b.end());
    return;
  }
  for (const NodeId c : n.children) collect_indices(topology, partition, c, out);
}

// Number of data indices under every node, indexed by node id.
std::vector<std::size_t> subtree_sizes(const Topology& topology, const Partition& partition) {
  std::vector<std::size_t> sizes(topology.size(), 0);
  // Children always sit one layer deeper, so sweeping layers bottom-up works.
  for (int layer = topology.depth(); layer >= 0; --layer) {
    for (const auto& n : topology.nodes()) {
      if (n.layer != layer) continue;
      if (n.is_leaf()) {
        sizes[n.id.value] = partition.block(n.id).size();
      } else {
        for (const NodeId c : n.children) sizes[n.id.value] += sizes[c.value];
      }
    }
  }
  return sizes;
}

}  // namespace

std::vector<std::size_t> node_index_set(const Topology& topology,
                                        const Partition& partition, NodeId node) {
  std::vector<std::size_t> out;
  collect_indices(topology, partition, node, out);
  std::sort(out.begin(), out.end());
  return out;
}

WeightMode weight_mode_from_name(const std::string& name) {
  if (name == "uniform") return WeightMode::kUniform;
  if (name == "data_proportional") return WeightMode::kDataProportional;
  throw ConfigError("unknown weight mode '" + name +
                    "' (expected uniform or data_proportional)");
}

const std::vector<double>& WeightSchedule::at(NodeId parent) const {
  const auto it = beta.find(parent);
  if (it == beta.end()) {
    throw UnknownNode("no weights for node " + std::to_string(parent.value));
  }
  return it->second;
}

WeightSchedule compute_betas(const Topology& topology, const Partition& partition,
                             WeightMode mode) {
  WeightSchedule schedule;
  const auto sizes = mode == WeightMode::kDataProportional
                         ? subtree_sizes(topology, partition)
                         : std::vector<std::size_t>{};
  for (const auto& n : topology.nodes()) {
    if (n.is_leaf()) continue;
    std::vector<double> beta(n.children.size());
    if (mode == WeightMode::kUniform) {
      std::fill(beta.begin(), beta.end(), 1.0 / static_cast<double>(n.children.size()));
    } else {
      const std::size_t total = sizes[n.id.value];
      if (total == 0) {
        throw EmptyNode("node " + std::to_string(n.id.value) +
                        " holds no data; data-proportional weights are undefined");
      }
      for (std::size_t k = 0; k < n.children.size(); ++k) {
        beta[k] = static_cast<double>(sizes[n.children[k].value]) /
                  static_cast<double>(total);
      }
    }
    schedule.beta.emplace(n.id, std::move(beta));
  }
  return schedule;
}

IterationMode iteration_mode_from_name(const std::string& name) {
  if (name == "uniform") return IterationMode::kUniform;
  if (name == "delayed") return IterationMode::kDelayed;
  throw ConfigError("unknown iteration mode '" + name + "' (expected uniform or delayed)");
}

DelayedScope delayed_scope_from_name(const std::string& name) {
  if (name == "all_leaves") return DelayedScope::kAllLeaves;
  if (name == "bottleneck_only") return DelayedScope::kBottleneckOnly;
  throw ConfigError("unknown delayed scope '" + name +
                    "' (expected all_leaves or bottleneck_only)");
}

int IterationSchedule::at(NodeId node) const {
  const auto it = count.find(node);
  if (it == count.end()) {
    throw UnknownNode("no iteration count for node " + std::to_string(node.value));
  }
  return it->second;
}

IterationSchedule schedule_iterations(const Topology& topology,
                                      const Partition& partition,
                                      std::span<const int> base_T,
                                      const IterationOptions& options) {
  if (base_T.size() < static_cast<std::size_t>(topology.depth()) + 1) {
    throw ConfigError("iteration counts needed for layers 0.." +
                      std::to_string(topology.depth()) + ", got " +
                      std::to_string(base_T.size()));
  }
  for (std::size_t i = 0; i <= static_cast<std::size_t>(topology.depth()); ++i) {
    if (base_T[i] < 1) {
      throw ConfigError("iteration count for layer " + std::to_string(i) + " must be >= 1");
    }
  }

  IterationSchedule schedule;
  for (const auto& n : topology.nodes()) schedule.count[n.id] = base_T[n.layer];

  if (options.mode == IterationMode::kDelayed) {
    std::size_t largest = 0;
    for (const NodeId leaf : topology.leaves()) {
      largest = std::max(largest, partition.block(leaf).size());
    }
    for (const auto& n : topology.nodes()) {
      if (n.is_leaf()) continue;
      double mean = 0.0;
      for (const NodeId c : n.children) {
        if (!topology.node(c).is_leaf()) continue;
        mean += static_cast<double>(partition.block(c).size());
      }
      mean /= static_cast<double>(n.children.size());
      for (const NodeId c : n.children) {
        if (!topology.node(c).is_leaf()) continue;
        const std::size_t size = partition.block(c).size();
        if (options.scope == DelayedScope::kBottleneckOnly && size != largest) continue;
        const double scaled =
            mean > 0.0 ? base_T[topology.depth()] * static_cast<double>(size) / mean : 1.0;
        schedule.count[c] = std::max(1, static_cast<int>(std::lround(scaled)));
      }
    }
  }

  for (const auto& [leaf, t] : options.leaf_pins) {
    if (!topology.node(leaf).is_leaf()) {
      throw ConfigError("iteration pin on non-leaf node " + std::to_string(leaf.value));
    }
    if (t < 1) throw ConfigError("pinned iteration count must be >= 1");
    schedule.count[leaf] = t;
  }
  return schedule;
}

}  // namespace gdca

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
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "gdca/dataset.hpp"
#include "gdca/losses.hpp"
#include "gdca/time_model.hpp"
#include "gdca/topology.hpp"

namespace gdca {

// Dual vector alpha (length m) and the primal parameter w = A alpha (length
// d), where column i of A is x_i / (lambda m).
struct DualState {
  std::vector<double> alpha;
  std::vector<double> w;

  static DualState zeros(const Dataset& ds) {
    return {std::vector<double>(ds.m(), 0.0), std::vector<double>(ds.d(), 0.0)};
  }
};

// Change produced by one node: delta_alpha is aligned with `indices` (the
// node's sorted index set) and delta_w = A_Q delta_alpha.
struct UpdateDelta {
  std::vector<std::size_t> indices;
  std::vector<double> delta_alpha;
  std::vector<double> delta_w;
};

struct TraceRecord {
  int outer_iteration = 0;
  double simulated_time = 0.0;
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
};

// P(w) = lambda/2 |w|^2 + 1/m sum_i l(w.x_i)
double primal_value(const Dataset& ds, const LossSpec& loss, double lambda,
                    std::span<const double> w);

// D(alpha) = -lambda/2 |A alpha|^2 - 1/m sum_i l*(-alpha_i)
double dual_value(const Dataset& ds, const LossSpec& loss, double lambda,
                  std::span<const double> alpha);

// w(alpha) = A alpha, accumulated from scratch.
std::vector<double> primal_from_dual(const Dataset& ds, double lambda,
                                     std::span<const double> alpha);

// Seed path identifying one random stream. Streams depend only on the path,
// never on scheduling, which keeps runs reproducible under parallelism.
using StreamKey = std::vector<std::uint32_t>;

std::mt19937_64 make_stream(const StreamKey& key);

// Runs T single-coordinate ascent steps on `block`, sampling indices
// uniformly with replacement. `alpha` is the full dual vector and `w` must
// equal A alpha. Neither is modified; the accumulated change is returned.
UpdateDelta local_sdca(const Dataset& ds, const LossSpec& loss, double lambda,
                       std::span<const std::size_t> block,
                       std::span<const double> alpha, std::span<const double> w,
                       int iterations, std::mt19937_64& rng);

struct EngineOptions {
  std::uint64_t seed = 0;
  // Evaluate the children of a node concurrently. Results are identical
  // either way.
  bool parallel_children = false;
};

// Observer invoked after each root outer iteration (and once for the initial
// state) with the trace record and the current global state.
using TraceObserver = std::function<void(const TraceRecord&, const DualState&)>;

// Weighted tree aggregation of local dual coordinate ascent. Every argument
// passed by reference must outlive the solver.
class TreeSolver {
 public:
  TreeSolver(const Dataset& ds, LossSpec loss, double lambda, const Topology& topology,
             const Partition& partition, const WeightSchedule& weights,
             const IterationSchedule& iterations, EngineOptions options = {});

  // T_node outer iterations at an internal node, starting from (alpha, w).
  // Each iteration evaluates all children against the same snapshot, then
  // applies alpha_[k] += beta_k delta_alpha_k and w += sum_k beta_k delta_w_k.
  UpdateDelta gdca_node(NodeId node, std::span<const double> alpha,
                        std::span<const double> w, const StreamKey& key) const;

  // Starts from alpha = 0, w = 0 and runs the root's outer iterations. The
  // trace holds the initial state (outer_iteration 0) plus one record per
  // root outer iteration.
  std::vector<TraceRecord> run(const TimeModel& time_model,
                               const TraceObserver& observer = {}) const;

  const std::vector<std::size_t>& index_set(NodeId node) const {
    return index_sets_[node.value];
  }

 private:
  // One outer iteration at `node`, merging child deltas into alpha/w in place
  // and, when given, into `accum` (aligned with the node's index set).
  void aggregate_round(NodeId node, std::span<double> alpha, std::span<double> w,
                       const StreamKey& key, UpdateDelta* accum) const;
  UpdateDelta child_delta(NodeId child, std::span<const double> alpha,
                          std::span<const double> w, const StreamKey& key) const;
  TraceRecord record(int outer_iteration, double time, const DualState& state) const;

  const Dataset& ds_;
  LossSpec loss_;
  double lambda_;
  const Topology& topology_;
  const Partition& partition_;
  const WeightSchedule& weights_;
  const IterationSchedule& iterations_;
  EngineOptions options_;
  std::vector<std::vector<std::size_t>> index_sets_;
  // Position of each of a node's indices inside its parent's index set.
  std::vector<std::vector<std::size_t>> offsets_in_parent_;
};

}  // namespace gdca

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

#include "gdca/engine.hpp"

#include <algorithm>
#include <future>
#include <string>

#include "gdca/errors.hpp"

namespace gdca {

namespace {

double dual_given_w(const Dataset& ds, const LossSpec& loss, double lambda,
                    std::span<const double> alpha, std::span<const double> w) {
  double w2 = 0.0;
  for (const double v : w) w2 += v * v;
  double conj = 0.0;
  for (std::size_t i = 0; i < ds.m(); ++i) {
    conj += conjugate(loss, -alpha[i], ds.label(i));
  }
  return -0.5 * lambda * w2 - conj / static_cast<double>(ds.m());
}

StreamKey extend(const StreamKey& key, std::uint32_t v) {
  StreamKey out = key;
  out.push_back(v);
  return out;
}

}  // namespace

double primal_value(const Dataset& ds, const LossSpec& loss, double lambda,
                    std::span<const double> w) {
  double w2 = 0.0;
  for (const double v : w) w2 += v * v;
  double sum = 0.0;
  for (std::size_t i = 0; i < ds.m(); ++i) {
    sum += primal_loss(loss, ds.dot(i, w), ds.label(i));
  }
  return 0.5 * lambda * w2 + sum / static_cast<double>(ds.m());
}

std::vector<double> primal_from_dual(const Dataset& ds, double lambda,
                                     std::span<const double> alpha) {
  std::vector<double> w(ds.d(), 0.0);
  const double scale = 1.0 / (lambda * static_cast<double>(ds.m()));
  for (std::size_t i = 0; i < ds.m(); ++i) {
    if (alpha[i] != 0.0) ds.axpy(i, alpha[i] * scale, w);
  }
  return w;
}

double dual_value(const Dataset& ds, const LossSpec& loss, double lambda,
                  std::span<const double> alpha) {
  const auto w = primal_from_dual(ds, lambda, alpha);
  return dual_given_w(ds, loss, lambda, alpha, w);
}

std::mt19937_64 make_stream(const StreamKey& key) {
  std::seed_seq seq(key.begin(), key.end());
  return std::mt19937_64(seq);
}

UpdateDelta local_sdca(const Dataset& ds, const LossSpec& loss, double lambda,
                       std::span<const std::size_t> block,
                       std::span<const double> alpha, std::span<const double> w,
                       int iterations, std::mt19937_64& rng) {
  UpdateDelta out{std::vector<std::size_t>(block.begin(), block.end()),
                  std::vector<double>(block.size(), 0.0),
                  std::vector<double>(ds.d(), 0.0)};
  if (block.empty()) return out;

  const double m = static_cast<double>(ds.m());
  const double inv_lambda_m = 1.0 / (lambda * m);
  std::vector<double> local_w(w.begin(), w.end());
  std::vector<double> local_alpha(block.size());
  for (std::size_t j = 0; j < block.size(); ++j) local_alpha[j] = alpha[block[j]];

  std::uniform_int_distribution<std::size_t> pick(0, block.size() - 1);
  for (int h = 0; h < iterations; ++h) {
    const std::size_t j = pick(rng);
    const std::size_t i = block[j];
    const double xnorm2 = ds.squared_norm(i);
    const double y = ds.label(i);
    const double delta =
        xnorm2 > 0.0
            ? coordinate_update(loss, ds.dot(i, local_w), local_alpha[j], xnorm2,
                                lambda, m, y)
            : zero_column_update(loss, local_alpha[j], y);
    if (delta == 0.0) continue;
    local_alpha[j] += delta;
    out.delta_alpha[j] += delta;
    ds.axpy(i, delta * inv_lambda_m, local_w);
    ds.axpy(i, delta * inv_lambda_m, out.delta_w);
  }
  return out;
}

TreeSolver::TreeSolver(const Dataset& ds, LossSpec loss, double lambda,
                       const Topology& topology, const Partition& partition,
                       const WeightSchedule& weights,
                       const IterationSchedule& iterations, EngineOptions options)
    : ds_(ds),
      loss_(loss),
      lambda_(lambda),
      topology_(topology),
      partition_(partition),
      weights_(weights),
      iterations_(iterations),
      options_(options) {
  if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
  if (loss.family == LossFamily::kHinge) {
    for (const double y : ds.labels()) {
      if (y != 1.0 && y != -1.0) {
        throw ConfigError("hinge loss needs labels in {-1, +1}");
      }
    }
  }
  validate_partition(partition, ds.m());

  index_sets_.resize(topology.size());
  offsets_in_parent_.resize(topology.size());
  for (const auto& n : topology.nodes()) {
    index_sets_[n.id.value] = node_index_set(topology, partition, n.id);
    if (!n.is_leaf()) {
      if (weights.at(n.id).size() != n.children.size()) {
        throw ConfigError("weight count does not match child count at node " +
                          std::to_string(n.id.value));
      }
    }
    if (iterations.at(n.id) < 1) throw ConfigError("iteration counts must be >= 1");
  }
  for (const auto& n : topology.nodes()) {
    if (!n.parent) continue;
    const auto& mine = index_sets_[n.id.value];
    const auto& theirs = index_sets_[n.parent->value];
    auto& offsets = offsets_in_parent_[n.id.value];
    offsets.reserve(mine.size());
    for (const std::size_t i : mine) {
      offsets.push_back(static_cast<std::size_t>(
          std::lower_bound(theirs.begin(), theirs.end(), i) - theirs.begin()));
    }
  }
}

UpdateDelta TreeSolver::child_delta(NodeId child, std::span<const double> alpha,
                                    std::span<const double> w,
                                    const StreamKey& key) const {
  if (topology_.node(child).is_leaf()) {
    auto rng = make_stream(key);
    return local_sdca(ds_, loss_, lambda_, index_sets_[child.value], alpha, w,
                      iterations_.at(child), rng);
  }
  return gdca_node(child, alpha, w, key);
}

void TreeSolver::aggregate_round(NodeId node, std::span<double> alpha,
                                 std::span<double> w, const StreamKey& key,
                                 UpdateDelta* accum) const {
  const auto& children = topology_.node(node).children;
  const auto& beta = weights_.at(node);
  std::vector<UpdateDelta> deltas(children.size());

  const std::span<const double> alpha_snapshot(alpha);
  const std::span<const double> w_snapshot(w);
  if (options_.parallel_children && children.size() > 1) {
    std::vector<std::future<UpdateDelta>> pending;
    pending.reserve(children.size());
    for (const NodeId c : children) {
      pending.push_back(std::async(std::launch::async, [&, c] {
        return child_delta(c, alpha_snapshot, w_snapshot, extend(key, c.value));
      }));
    }
    for (std::size_t k = 0; k < children.size(); ++k) deltas[k] = pending[k].get();
  } else {
    for (std::size_t k = 0; k < children.size(); ++k) {
      deltas[k] = child_delta(children[k], alpha_snapshot, w_snapshot,
                              extend(key, children[k].value));
    }
  }

  // Merge in fixed child order so the result never depends on scheduling.
  for (std::size_t k = 0; k < children.size(); ++k) {
    const auto& delta = deltas[k];
    const double b = beta[k];
    const auto& offsets = offsets_in_parent_[children[k].value];
    for (std::size_t j = 0; j < delta.indices.size(); ++j) {
      const double step = b * delta.delta_alpha[j];
      alpha[delta.indices[j]] += step;
      if (accum) accum->delta_alpha[offsets[j]] += step;
    }
    for (std::size_t r = 0; r < w.size(); ++r) {
      const double step = b * delta.delta_w[r];
      w[r] += step;
      if (accum) accum->delta_w[r] += step;
    }
  }
}

UpdateDelta TreeSolver::gdca_node(NodeId node, std::span<const double> alpha,
                                  std::span<const double> w,
                                  const StreamKey& key) const {
  if (topology_.node(node).is_leaf()) {
    throw ConfigError("gdca_node called on leaf " + std::to_string(node.value));
  }
  const auto& indices = index_sets_[node.value];
  UpdateDelta accum{indices, std::vector<double>(indices.size(), 0.0),
                    std::vector<double>(ds_.d(), 0.0)};
  std::vector<double> local_alpha(alpha.begin(), alpha.end());
  std::vector<double> local_w(w.begin(), w.end());
  const int rounds = iterations_.at(node);
  for (int t = 1; t <= rounds; ++t) {
    aggregate_round(node, local_alpha, local_w, extend(key, static_cast<std::uint32_t>(t)),
                    &accum);
  }
  return accum;
}

TraceRecord TreeSolver::record(int outer_iteration, double time,
                               const DualState& state) const {
  // Both objectives are evaluated at w(alpha) rebuilt from alpha.
  const auto w = primal_from_dual(ds_, lambda_, state.alpha);
  TraceRecord r;
  r.outer_iteration = outer_iteration;
  r.simulated_time = time;
  r.primal = primal_value(ds_, loss_, lambda_, w);
  r.dual = dual_given_w(ds_, loss_, lambda_, state.alpha, w);
  r.gap = r.primal - r.dual;
  return r;
}

std::vector<TraceRecord> TreeSolver::run(const TimeModel& time_model,
                                         const TraceObserver& observer) const {
  const double per_round =
      simulated_time_per_outer_iteration(topology_, iterations_, time_model);
  const NodeId root = topology_.root();
  const StreamKey base{static_cast<std::uint32_t>(options_.seed),
                       static_cast<std::uint32_t>(options_.seed >> 32)};

  DualState state = DualState::zeros(ds_);
  std::vector<TraceRecord> trace;
  trace.push_back(record(0, 0.0, state));
  if (observer) observer(trace.back(), state);

  const int rounds = iterations_.at(root);
  for (int t = 1; t <= rounds; ++t) {
    aggregate_round(root, state.alpha, state.w, extend(base, static_cast<std::uint32_t>(t)),
                    nullptr);
    trace.push_back(record(t, per_round * t, state));
    if (observer) observer(trace.back(), state);
  }
  return trace;
}

}  // namespace gdca

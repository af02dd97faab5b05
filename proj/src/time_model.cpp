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

#include "gdca/time_model.hpp"

#include <algorithm>
#include <string>

#include "gdca/errors.hpp"

namespace gdca {

TimeModel TimeModel::uniform(int depth, double t_lp, double t_delay, double t_cp) {
  const auto n = static_cast<std::size_t>(depth) + 1;
  return {std::vector<double>(n, t_lp), std::vector<double>(n, t_delay),
          std::vector<double>(n, t_cp)};
}

double TimeModel::severity(int depth) const {
  validate(depth);
  return (t_delay[depth] + t_cp[depth - 1]) / t_lp[depth];
}

void TimeModel::validate(int depth) const {
  const auto n = static_cast<std::size_t>(depth) + 1;
  if (t_lp.size() != n || t_delay.size() != n || t_cp.size() != n) {
    throw ConfigError("time model needs " + std::to_string(n) +
                      " entries per field (one per layer)");
  }
  for (const auto* field : {&t_lp, &t_delay, &t_cp}) {
    for (const double v : *field) {
      if (!(v >= 0.0)) throw ConfigError("time model entries must be >= 0");
    }
  }
}

namespace {

double node_time(const Topology& topology, const IterationSchedule& schedule,
                 const TimeModel& tm, NodeId id) {
  const auto& n = topology.node(id);
  if (n.is_leaf()) return tm.t_lp[n.layer] * schedule.at(id);
  double slowest = 0.0;
  for (const NodeId c : n.children) {
    slowest = std::max(slowest, node_time(topology, schedule, tm, c));
  }
  return schedule.at(id) * (slowest + tm.t_delay[n.layer + 1] + tm.t_cp[n.layer]);
}

}  // namespace

double simulated_time_per_outer_iteration(const Topology& topology,
                                          const IterationSchedule& schedule,
                                          const TimeModel& time_model) {
  time_model.validate(topology.depth());
  const auto& root = topology.node(topology.root());
  double slowest = 0.0;
  for (const NodeId c : root.children) {
    slowest = std::max(slowest, node_time(topology, schedule, time_model, c));
  }
  return slowest + time_model.t_delay[1] + time_model.t_cp[0];
}

}  // namespace gdca

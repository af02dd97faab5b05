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

#include <vector>

#include "gdca/topology.hpp"

namespace gdca {

// Abstract per-layer costs, indexed by layer 0..p. t_lp is read at the leaf
// layer, t_delay[i] is the round trip between layer i and its parent, and
// t_cp[i] is the aggregation cost at a layer-i node.
struct TimeModel {
  std::vector<double> t_lp;
  std::vector<double> t_delay;
  std::vector<double> t_cp;

  // Same costs on every layer of a depth-p tree.
  static TimeModel uniform(int depth, double t_lp, double t_delay, double t_cp);

  // (t_delay + t_cp) / t_lp measured at the leaf links.
  double severity(int depth) const;
  void validate(int depth) const;
};

// Time of one root outer iteration. A leaf costs t_lp * T_leaf; an internal
// layer-i node costs T_i * (max child time + t_delay[i+1] + t_cp[i]); the root
// contributes the bracketed term once per outer iteration.
double simulated_time_per_outer_iteration(const Topology& topology,
                                          const IterationSchedule& schedule,
                                          const TimeModel& time_model);

}  // namespace gdca

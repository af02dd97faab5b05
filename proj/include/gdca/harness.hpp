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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gdca/dataset.hpp"
#include "gdca/engine.hpp"
#include "gdca/losses.hpp"
#include "gdca/time_model.hpp"
#include "gdca/topology.hpp"

namespace gdca {

struct SyntheticSpec {
  std::size_t m = 1000;
  std::size_t d = 10;
  double noise = 0.1;
  std::uint64_t seed = 1;
};

// Gaussian features and labels from a random linear model: real-valued for
// squared loss, signs for hinge. Features are left unnormalized.
Dataset make_synthetic(const SyntheticSpec& spec, const LossSpec& loss);

struct DatasetSource {
  std::string format = "synthetic";  // dense | libsvm | synthetic
  std::string path;
  DenseFormat dense;
  LabelMap label_map;
  std::optional<NormalizeMode> normalize = NormalizeMode::kPerInstanceUnit;
  SyntheticSpec synthetic;
};

struct ExperimentConfig {
  DatasetSource dataset;
  LossSpec loss = LossSpec::squared_error();
  double lambda = 1.0;
  std::vector<int> fanout;   // complete tree, or
  std::vector<int> parents;  // explicit parent list (-1 marks the root)
  std::vector<double> fractions;
  std::optional<std::uint64_t> partition_seed;  // fixed split; per-trial otherwise
  WeightMode weights = WeightMode::kUniform;
  // Either explicit per-layer counts (root first), or a leaf count with
  // every internal layer at internal_T.
  std::vector<int> base_T;
  std::optional<int> leaf_T;
  int internal_T = 10;
  IterationOptions iterations;
  TimeModel time_model;  // scalar entries are broadcast to every layer
  int trials = 1;
  std::uint64_t seed = 0;
  std::string output;
  bool parallel = false;
};

// Structured JSON document; see README for the schema. Throws ConfigError
// with the offending key on any schema violation.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

Dataset load_dataset(const DatasetSource& source, const LossSpec& loss);
Topology build_topology(const ExperimentConfig& config);
// Per-layer iteration counts for a tree of the given depth.
std::vector<int> resolve_base_T(const ExperimentConfig& config, int depth);
// Time model with scalar fields broadcast to depth + 1 layers and validated.
TimeModel resolve_time_model(const ExperimentConfig& config, int depth);

struct MeanRecord {
  int outer_iteration = 0;
  double sim_time = 0.0;
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  double std_gap = 0.0;
};

struct ExperimentResult {
  std::vector<std::vector<TraceRecord>> trials;
  std::vector<MeanRecord> mean;
};

// Runs config.trials seeded runs (trial t uses seed + t) on an already
// loaded dataset.
ExperimentResult run_trials(const ExperimentConfig& config, const Dataset& ds);

// Loads the dataset, runs every trial and writes <output>/trial_NNN.csv and
// <output>/mean.csv. Nothing is written if loading or validation fails.
ExperimentResult run_experiment(const ExperimentConfig& config);

std::vector<MeanRecord> average_traces(const std::vector<std::vector<TraceRecord>>& trials);

std::string format_trace_csv(const std::vector<TraceRecord>& trace);
std::string format_mean_csv(const std::vector<MeanRecord>& mean);

// (simulated time, gap) pairs read from either CSV flavor.
struct TracePoint {
  double time = 0.0;
  double gap = 0.0;
};
std::vector<TracePoint> parse_trace_csv(const std::string& text);
std::vector<TracePoint> read_trace_csv(const std::string& path);

// First time the gap reaches fraction * initial gap, linearly interpolated
// between records; nullopt if never reached.
std::optional<double> time_to_fraction(const std::vector<TracePoint>& trace,
                                       double fraction);

struct CompareReport {
  std::optional<double> time_a;
  std::optional<double> time_b;
  std::optional<double> speedup;  // time_a / time_b
  double initial_gap_a = 0.0;
  double initial_gap_b = 0.0;
};

CompareReport compare_runs(const std::vector<TracePoint>& a,
                           const std::vector<TracePoint>& b, double target_fraction);

}  // namespace gdca

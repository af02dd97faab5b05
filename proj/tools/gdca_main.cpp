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

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "gdca/analysis.hpp"
#include "gdca/errors.hpp"
#include "gdca/harness.hpp"

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int run_cmd(const std::string& config_path) {
  const auto config = gdca::load_config(config_path);
  const auto result = gdca::run_experiment(config);
  const auto& last = result.mean.back();
  std::cout << "wrote " << result.trials.size() << " trial trace(s) and mean.csv to "
            << config.output << "\n"
            << "final: outer_iter=" << last.outer_iteration
            << " sim_time=" << fmt(last.sim_time) << " mean_gap=" << fmt(last.gap) << "\n";
  return 0;
}

int compare_cmd(const std::string& a, const std::string& b, double fraction) {
  const auto report =
      gdca::compare_runs(gdca::read_trace_csv(a), gdca::read_trace_csv(b), fraction);
  const auto show = [](const std::optional<double>& t) {
    return t ? fmt(*t) : std::string("never reached");
  };
  if (report.initial_gap_a != report.initial_gap_b) {
    std::cerr << "warning: initial gaps differ (" << fmt(report.initial_gap_a) << " vs "
              << fmt(report.initial_gap_b) << ")\n";
  }
  std::cout << "target: " << fraction << " x initial gap\n"
            << "a: " << show(report.time_a) << "\n"
            << "b: " << show(report.time_b) << "\n"
            << "speedup (a/b): "
            << (report.speedup ? fmt(*report.speedup) : std::string("undefined")) << "\n";
  return 0;
}

int rho_min_cmd(const std::string& config_path, int node_id) {
  const auto config = gdca::load_config(config_path);
  const auto ds = gdca::load_dataset(config.dataset, config.loss);
  const auto topology = gdca::build_topology(config);
  const auto partition = gdca::partition_by_fractions(
      ds, config.fractions, topology.leaves(), config.partition_seed.value_or(config.seed));
  const gdca::NodeId node =
      node_id < 0 ? topology.root() : gdca::NodeId{static_cast<std::uint32_t>(node_id)};
  std::vector<std::vector<std::size_t>> blocks;
  for (const auto child : topology.node(node).children) {
    blocks.push_back(gdca::node_index_set(topology, partition, child));
  }
  std::cout << fmt(gdca::rho_min(ds, config.lambda, blocks)) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted tree-network dual coordinate ascent simulator"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config_path, "Config file (JSON)")->required();

  std::string trace_a;
  std::string trace_b;
  double fraction = 0.1;
  auto* compare = app.add_subcommand("compare", "Time for two traces to reach a gap target");
  compare->add_option("trace-a", trace_a, "First trace CSV")->required();
  compare->add_option("trace-b", trace_b, "Second trace CSV")->required();
  compare->add_option("--target-fraction", fraction, "Target as a fraction of the initial gap")
      ->check(CLI::PositiveNumber);

  auto* analyze = app.add_subcommand("analyze", "Closed-form analysis calculators");
  analyze->require_subcommand(1);

  double lambda = 1.0, m = 1.0, gamma = 0.5, mb = 1.0, rho = 0.0;
  int tp = 1, outer = 1;
  auto* theta = analyze->add_subcommand("theta-p", "Local improvement factor of LocalSDCA");
  theta->add_option("--lambda", lambda)->required();
  theta->add_option("--m", m, "Total number of data points")->required();
  theta->add_option("--gamma", gamma, "Smoothness (loss is 1/gamma-smooth)");
  theta->add_option("--mb", mb, "Points held by the leaf")->required();
  theta->add_option("--tp", tp, "Local iterations")->required();

  std::vector<double> thetas;
  std::vector<double> betas;
  auto* bound = analyze->add_subcommand("bound", "Per-node geometric convergence bound");
  bound->add_option("--lambda", lambda)->required();
  bound->add_option("--m", m)->required();
  bound->add_option("--gamma", gamma);
  bound->add_option("--thetas", thetas, "Child local improvements")->delimiter(',')->required();
  bound->add_option("--betas", betas, "Child aggregation weights")->delimiter(',')->required();
  bound->add_option("--rho", rho);
  bound->add_option("--T", outer, "Outer iterations");

  double c1 = 0.0, c2 = 0.0, nk = 1.0, nq = 1.0, r = 0.0;
  bool numeric = false;
  auto* opt = analyze->add_subcommand("optimal-tp", "Optimal leaf iteration count");
  opt->add_option("--c1", c1)->required();
  opt->add_option("--c2", c2)->required();
  opt->add_option("--nk", nk, "Points in the leaf")->required();
  opt->add_option("--nq", nq, "Points under the parent")->required();
  opt->add_option("--r", r, "Delay severity (t_delay + t_cp) / t_lp");
  opt->add_flag("--numeric", numeric, "Also report the brute-force integer minimizer");

  int node_id = -1;
  auto* rho_cmd = analyze->add_subcommand("rho-min", "Block separability constant at a node");
  rho_cmd->add_option("config", config_path, "Config file (JSON)")->required();
  rho_cmd->add_option("--node", node_id, "Node id (default: root)");

  double x = 0.0;
  auto* lw = analyze->add_subcommand("lambert-w", "Principal branch of the Lambert W function");
  lw->add_option("--x", x)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return run_cmd(config_path);
    if (*compare) return compare_cmd(trace_a, trace_b, fraction);
    if (*theta) {
      std::cout << fmt(gdca::theta_p(lambda, m, gamma, mb, tp)) << "\n";
    } else if (*bound) {
      std::cout << fmt(gdca::convergence_bound({lambda, m, gamma, thetas, betas, rho, outer}))
                << "\n";
    } else if (*opt) {
      if (numeric) {
        std::cout << "numeric " << gdca::optimal_tp_numeric(c1, c2, nk, nq, r) << "\n";
      }
      std::cout << "closed_form " << fmt(gdca::optimal_tp(c1, c2, nk, nq, r)) << "\n";
    } else if (*rho_cmd) {
      return rho_min_cmd(config_path, node_id);
    } else if (*lw) {
      std::cout << fmt(gdca::lambert_w0(x)) << "\n";
    }
  } catch (const gdca::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

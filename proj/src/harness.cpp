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

#include "gdca/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "gdca/errors.hpp"

namespace gdca {

using nlohmann::json;

namespace {

// ---- config helpers -------------------------------------------------------

void expect_keys(const json& obj, const std::string& where,
                 std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

const json* find(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + ": expected a number");
  return v.get<double>();
}

std::int64_t integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
  return v.get<std::int64_t>();
}

std::string string(const json& v, const std::string& where) {
  if (!v.is_string()) throw ConfigError(where + ": expected a string");
  return v.get<std::string>();
}

bool boolean(const json& v, const std::string& where) {
  if (!v.is_boolean()) throw ConfigError(where + ": expected true or false");
  return v.get<bool>();
}

std::vector<int> int_list(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + ": expected an array of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(static_cast<int>(integer(v[i], where + "[" + std::to_string(i) + "]")));
  }
  return out;
}

// A scalar or a per-layer array.
std::vector<double> number_or_list(const json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array() || v.empty()) {
    throw ConfigError(where + ": expected a number or a nonempty array of numbers");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(number(v[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

NodeId node_key(const std::string& key, const std::string& where) {
  std::size_t pos = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(key, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != key.size() || key.empty()) {
    throw ConfigError(where + ": node id '" + key + "' is not an integer");
  }
  return NodeId{static_cast<std::uint32_t>(v)};
}

void parse_dataset(const json& j, DatasetSource& src) {
  const std::string where = "dataset";
  expect_keys(j, where,
              {"format", "path", "delimiter", "header", "label_column", "label_map",
               "normalize", "m", "d", "noise", "seed"});
  if (const auto* v = find(j, "format")) src.format = string(*v, where + ".format");
  if (src.format != "dense" && src.format != "libsvm" && src.format != "synthetic") {
    throw ConfigError(where + ".format: expected dense, libsvm or synthetic");
  }
  if (const auto* v = find(j, "path")) src.path = string(*v, where + ".path");
  if (src.format != "synthetic" && src.path.empty()) {
    throw ConfigError(where + ".path: required for format '" + src.format + "'");
  }
  if (const auto* v = find(j, "delimiter")) {
    const auto s = string(*v, where + ".delimiter");
    if (s.size() != 1) throw ConfigError(where + ".delimiter: expected one character");
    src.dense.delimiter = s[0];
  }
  if (const auto* v = find(j, "header")) src.dense.has_header = boolean(*v, where + ".header");
  if (const auto* v = find(j, "label_column")) {
    const auto c = integer(*v, where + ".label_column");
    if (c < 0) throw ConfigError(where + ".label_column: must be >= 0");
    src.dense.label_column = static_cast<std::size_t>(c);
  }
  if (const auto* v = find(j, "label_map")) {
    if (!v->is_object()) throw ConfigError(where + ".label_map: expected an object");
    for (const auto& [key, value] : v->items()) {
      double from = 0.0;
      std::size_t pos = 0;
      try {
        from = std::stod(key, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos == 0 || pos != key.size()) {
        throw ConfigError(where + ".label_map: key '" + key + "' is not a number");
      }
      src.label_map[from] = number(value, where + ".label_map." + key);
    }
  }
  if (const auto* v = find(j, "normalize")) {
    const auto s = string(*v, where + ".normalize");
    src.normalize = s == "none" ? std::nullopt
                                : std::optional<NormalizeMode>(normalize_mode_from_name(s));
  }
  if (const auto* v = find(j, "m")) {
    const auto m = integer(*v, where + ".m");
    if (m < 1) throw ConfigError(where + ".m: must be >= 1");
    src.synthetic.m = static_cast<std::size_t>(m);
  }
  if (const auto* v = find(j, "d")) {
    const auto d = integer(*v, where + ".d");
    if (d < 1) throw ConfigError(where + ".d: must be >= 1");
    src.synthetic.d = static_cast<std::size_t>(d);
  }
  if (const auto* v = find(j, "noise")) src.synthetic.noise = number(*v, where + ".noise");
  if (const auto* v = find(j, "seed")) {
    src.synthetic.seed = static_cast<std::uint64_t>(integer(*v, where + ".seed"));
  }
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

}  // namespace

Dataset make_synthetic(const SyntheticSpec& spec, const LossSpec& loss) {
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal;
  std::vector<double> truth(spec.d);
  for (auto& v : truth) v = normal(rng);
  std::vector<double> features(spec.d * spec.m);
  std::vector<double> labels(spec.m);
  for (std::size_t i = 0; i < spec.m; ++i) {
    double score = 0.0;
    for (std::size_t r = 0; r < spec.d; ++r) {
      const double x = normal(rng);
      features[i * spec.d + r] = x;
      score += x * truth[r];
    }
    score /= std::sqrt(static_cast<double>(spec.d));
    score += spec.noise * normal(rng);
    labels[i] = loss.family == LossFamily::kHinge ? (score >= 0.0 ? 1.0 : -1.0) : score;
  }
  return Dataset::from_dense(spec.d, spec.m, features, std::move(labels));
}

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  expect_keys(root, "config",
              {"dataset", "loss", "lambda", "topology", "partition", "weights",
               "iterations", "time_model", "trials", "seed", "output", "parallel"});

  ExperimentConfig c;
  const auto required = [&](const char* key) -> const json& {
    const auto* v = find(root, key);
    if (!v) throw ConfigError(std::string("config: missing required key '") + key + "'");
    return *v;
  };

  parse_dataset(required("dataset"), c.dataset);
  if (const auto* v = find(root, "loss")) c.loss = loss_from_name(string(*v, "loss"));
  if (const auto* v = find(root, "lambda")) c.lambda = number(*v, "lambda");
  if (!(c.lambda > 0.0)) throw ConfigError("lambda: must be positive");

  const auto& topo = required("topology");
  expect_keys(topo, "topology", {"fanout", "parents"});
  if (const auto* v = find(topo, "fanout")) c.fanout = int_list(*v, "topology.fanout");
  if (const auto* v = find(topo, "parents")) c.parents = int_list(*v, "topology.parents");
  if (c.fanout.empty() == c.parents.empty()) {
    throw ConfigError("topology: give exactly one of 'fanout' or 'parents'");
  }

  const auto& part = required("partition");
  expect_keys(part, "partition", {"fractions", "seed"});
  const auto* fr = find(part, "fractions");
  if (!fr) throw ConfigError("partition: missing required key 'fractions'");
  c.fractions = number_or_list(*fr, "partition.fractions");
  if (const auto* v = find(part, "seed")) {
    c.partition_seed = static_cast<std::uint64_t>(integer(*v, "partition.seed"));
  }

  if (const auto* v = find(root, "weights")) {
    c.weights = weight_mode_from_name(string(*v, "weights"));
  }

  const auto& it = required("iterations");
  expect_keys(it, "iterations", {"base", "leaf", "internal", "mode", "scope", "pins"});
  if (const auto* v = find(it, "leaf")) {
    c.leaf_T = static_cast<int>(integer(*v, "iterations.leaf"));
  }
  if (const auto* v = find(it, "internal")) {
    c.internal_T = static_cast<int>(integer(*v, "iterations.internal"));
  }
  if (const auto* v = find(it, "base")) c.base_T = int_list(*v, "iterations.base");
  if (c.base_T.empty() == !c.leaf_T.has_value()) {
    throw ConfigError("iterations: give exactly one of 'base' or 'leaf'");
  }
  if (const auto* v = find(it, "mode")) {
    c.iterations.mode = iteration_mode_from_name(string(*v, "iterations.mode"));
  }
  if (const auto* v = find(it, "scope")) {
    c.iterations.scope = delayed_scope_from_name(string(*v, "iterations.scope"));
  }
  if (const auto* v = find(it, "pins")) {
    if (!v->is_object()) throw ConfigError("iterations.pins: expected an object");
    for (const auto& [key, value] : v->items()) {
      c.iterations.leaf_pins[node_key(key, "iterations.pins")] =
          static_cast<int>(integer(value, "iterations.pins." + key));
    }
  }

  const auto& tm = required("time_model");
  expect_keys(tm, "time_model", {"t_lp", "t_delay", "t_cp"});
  for (const auto& [key, field] :
       {std::pair{"t_lp", &c.time_model.t_lp}, std::pair{"t_delay", &c.time_model.t_delay},
        std::pair{"t_cp", &c.time_model.t_cp}}) {
    const auto* v = find(tm, key);
    if (!v) throw ConfigError(std::string("time_model: missing required key '") + key + "'");
    *field = number_or_list(*v, std::string("time_model.") + key);
  }

  if (const auto* v = find(root, "trials")) {
    c.trials = static_cast<int>(integer(*v, "trials"));
    if (c.trials < 1) throw ConfigError("trials: must be >= 1");
  }
  if (const auto* v = find(root, "seed")) {
    c.seed = static_cast<std::uint64_t>(integer(*v, "seed"));
  }
  if (const auto* v = find(root, "output")) c.output = string(*v, "output");
  if (const auto* v = find(root, "parallel")) c.parallel = boolean(*v, "parallel");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

Dataset load_dataset(const DatasetSource& source, const LossSpec& loss) {
  Dataset ds;
  if (source.format == "dense") {
    ds = load_dense(source.path, source.dense);
  } else if (source.format == "libsvm") {
    ds = load_libsvm(source.path, source.label_map);
  } else {
    ds = make_synthetic(source.synthetic, loss);
  }
  if (source.normalize) ds = normalize(ds, *source.normalize);
  return ds;
}

Topology build_topology(const ExperimentConfig& config) {
  return config.fanout.empty() ? Topology::from_parents(config.parents)
                               : Topology::build_tree(config.fanout);
}

TimeModel resolve_time_model(const ExperimentConfig& config, int depth) {
  const auto n = static_cast<std::size_t>(depth) + 1;
  TimeModel tm = config.time_model;
  for (auto* field : {&tm.t_lp, &tm.t_delay, &tm.t_cp}) {
    if (field->size() == 1) field->assign(n, field->front());
  }
  tm.validate(depth);
  return tm;
}

std::vector<int> resolve_base_T(const ExperimentConfig& config, int depth) {
  if (config.base_T.empty()) {
    if (!config.leaf_T) throw ConfigError("iterations: no leaf iteration count");
    std::vector<int> out(static_cast<std::size_t>(depth), config.internal_T);
    out.push_back(*config.leaf_T);
    return out;
  }
  if (config.base_T.size() != static_cast<std::size_t>(depth) + 1) {
    throw ConfigError("iterations.base: need " + std::to_string(depth + 1) +
                      " entries (one per layer, root first), got " +
                      std::to_string(config.base_T.size()));
  }
  return config.base_T;
}

ExperimentResult run_trials(const ExperimentConfig& config, const Dataset& ds) {
  const Topology topology = build_topology(config);
  const auto leaves = topology.leaves();
  const TimeModel tm = resolve_time_model(config, topology.depth());
  const auto base_T = resolve_base_T(config, topology.depth());
  if (config.fractions.size() != leaves.size()) {
    throw ConfigError("partition.fractions: " + std::to_string(config.fractions.size()) +
                      " fractions for " + std::to_string(leaves.size()) + " leaves");
  }

  ExperimentResult result;
  for (int t = 0; t < config.trials; ++t) {
    const std::uint64_t trial_seed = config.seed + static_cast<std::uint64_t>(t);
    const Partition partition = partition_by_fractions(
        ds, config.fractions, leaves, config.partition_seed.value_or(trial_seed));
    const WeightSchedule weights = compute_betas(topology, partition, config.weights);
    const IterationSchedule schedule =
        schedule_iterations(topology, partition, base_T, config.iterations);
    const TreeSolver solver(ds, config.loss, config.lambda, topology, partition, weights,
                            schedule, {trial_seed, config.parallel});
    result.trials.push_back(solver.run(tm));
  }
  result.mean = average_traces(result.trials);
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  if (config.output.empty()) throw ConfigError("output: required to write traces");
  const Dataset ds = load_dataset(config.dataset, config.loss);
  ExperimentResult result = run_trials(config, ds);

  const std::filesystem::path dir(config.output);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "'");
  for (std::size_t t = 0; t < result.trials.size(); ++t) {
    char name[32];
    std::snprintf(name, sizeof name, "trial_%03zu.csv", t);
    write_file(dir / name, format_trace_csv(result.trials[t]));
  }
  write_file(dir / "mean.csv", format_mean_csv(result.mean));
  return result;
}

std::vector<MeanRecord> average_traces(const std::vector<std::vector<TraceRecord>>& trials) {
  std::vector<MeanRecord> mean;
  if (trials.empty()) return mean;
  const std::size_t rows = trials.front().size();
  for (const auto& t : trials) {
    if (t.size() != rows) throw FormatError("trials have different lengths");
  }
  const double n = static_cast<double>(trials.size());
  for (std::size_t r = 0; r < rows; ++r) {
    MeanRecord m;
    m.outer_iteration = trials.front()[r].outer_iteration;
    for (const auto& t : trials) {
      m.sim_time += t[r].simulated_time;
      m.primal += t[r].primal;
      m.dual += t[r].dual;
      m.gap += t[r].gap;
    }
    m.sim_time /= n;
    m.primal /= n;
    m.dual /= n;
    m.gap /= n;
    if (trials.size() > 1) {
      double ss = 0.0;
      for (const auto& t : trials) ss += (t[r].gap - m.gap) * (t[r].gap - m.gap);
      m.std_gap = std::sqrt(ss / (n - 1.0));
    }
    mean.push_back(m);
  }
  return mean;
}

std::string format_trace_csv(const std::vector<TraceRecord>& trace) {
  std::string out = "outer_iter,sim_time,primal,dual,gap\n";
  for (const auto& r : trace) {
    out += std::to_string(r.outer_iteration) + "," + fmt17(r.simulated_time) + "," +
           fmt17(r.primal) + "," + fmt17(r.dual) + "," + fmt17(r.gap) + "\n";
  }
  return out;
}

std::string format_mean_csv(const std::vector<MeanRecord>& mean) {
  std::string out = "outer_iter,mean_sim_time,mean_primal,mean_dual,mean_gap,std_gap\n";
  for (const auto& r : mean) {
    out += std::to_string(r.outer_iteration) + "," + fmt17(r.sim_time) + "," +
           fmt17(r.primal) + "," + fmt17(r.dual) + "," + fmt17(r.gap) + "," +
           fmt17(r.std_gap) + "\n";
  }
  return out;
}

std::vector<TracePoint> parse_trace_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("trace is empty");
  const auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream ss(s);
    while (std::getline(ss, cur, ',')) {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      parts.push_back(cur);
    }
    return parts;
  };
  const auto header = split(line);
  const auto column = [&](const char* a, const char* b) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == a || header[i] == b) return i;
    }
    throw FormatError(std::string("trace header lacks '") + a + "' or '" + b + "'");
  };
  const std::size_t time_col = column("mean_sim_time", "sim_time");
  const std::size_t gap_col = column("mean_gap", "gap");

  std::vector<TracePoint> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto parts = split(line);
    if (parts.size() != header.size()) {
      throw FormatError("trace line " + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " fields");
    }
    TracePoint p;
    try {
      std::size_t pos = 0;
      p.time = std::stod(parts[time_col], &pos);
      if (pos != parts[time_col].size()) throw std::invalid_argument("trailing");
      p.gap = std::stod(parts[gap_col], &pos);
      if (pos != parts[gap_col].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw FormatError("trace line " + std::to_string(line_no) + ": malformed number");
    }
    out.push_back(p);
  }
  if (out.empty()) throw FormatError("trace has no records");
  return out;
}

std::vector<TracePoint> read_trace_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trace '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_trace_csv(buf.str());
}

std::optional<double> time_to_fraction(const std::vector<TracePoint>& trace,
                                       double fraction) {
  if (trace.empty()) return std::nullopt;
  const double target = fraction * trace.front().gap;
  if (trace.front().gap <= target) return trace.front().time;
  for (std::size_t k = 1; k < trace.size(); ++k) {
    if (trace[k].gap <= target) {
      const auto& a = trace[k - 1];
      const auto& b = trace[k];
      const double s = (a.gap - target) / (a.gap - b.gap);
      return a.time + s * (b.time - a.time);
    }
  }
  return std::nullopt;
}

CompareReport compare_runs(const std::vector<TracePoint>& a,
                           const std::vector<TracePoint>& b, double target_fraction) {
  if (a.empty() || b.empty()) throw FormatError("cannot compare empty traces");
  CompareReport r;
  r.initial_gap_a = a.front().gap;
  r.initial_gap_b = b.front().gap;
  r.time_a = time_to_fraction(a, target_fraction);
  r.time_b = time_to_fraction(b, target_fraction);
  if (r.time_a && r.time_b) {
    if (*r.time_b > 0.0) {
      r.speedup = *r.time_a / *r.time_b;
    } else if (*r.time_a == 0.0) {
      r.speedup = 1.0;
    }
  }
  return r;
}

}  // namespace gdca

// Copyright 2026 The QONN Authors
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

#include "qonn/runner.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "qonn/parallel.hpp"

namespace qonn {

ConfigError::ConfigError(std::string path, const std::string& message)
    : std::runtime_error((path.empty() ? std::string("/") : path) + ": " + message),
      path_(std::move(path)) {}

namespace {

using nlohmann::json;

const char* const kKindNames[] = {"benchmark", "hamsim_ising", "hamsim_bh", "autoencoder",
                                  "cartpole"};
const char* const kAxisNames[] = {"layers", "J_over_B", "U_over_t_hop", "restart"};

std::string join(const std::string& path, const std::string& key) { return path + "/" + key; }

// Missing required keys and unknown keys are reported with their path.
void expect_keys(const json& j, const std::string& path, std::initializer_list<const char*> required,
                 std::initializer_list<const char*> optional = {}) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  for (const char* key : required) {
    if (!j.contains(key)) throw ConfigError(join(path, key), "missing required field");
  }
  for (const auto& [key, value] : j.items()) {
    const auto known = [&](std::initializer_list<const char*> list) {
      return std::any_of(list.begin(), list.end(), [&](const char* k) { return key == k; });
    };
    if (!known(required) && !known(optional)) throw ConfigError(join(path, key), "unknown field");
  }
}

template <typename T>
T get(const json& j, const std::string& path, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(join(path, key), std::string("invalid value: ") + e.what());
  }
}

template <typename T>
T get_or(const json& j, const std::string& path, const char* key, T fallback) {
  return j.contains(key) ? get<T>(j, path, key) : fallback;
}

// Runs a library parser, converting its errors into a ConfigError at `path`.
template <typename Fn>
auto section(const std::string& path, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(path, e.what());
  }
}

std::vector<Edge> parse_edges(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected a list of [a, b] pairs");
  std::vector<Edge> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "/" + std::to_string(i);
    if (!j[i].is_array() || j[i].size() != 2 || !j[i][0].is_number_integer() ||
        !j[i][1].is_number_integer()) {
      throw ConfigError(p, "expected a pair of mode indices");
    }
    out.emplace_back(j[i][0].get<int>(), j[i][1].get<int>());
  }
  return out;
}

json edges_json(const std::vector<Edge>& edges) {
  json out = json::array();
  for (const auto& [a, b] : edges) out.push_back({a, b});
  return out;
}

std::string iso_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string number(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

}  // namespace

std::string to_string(ExperimentKind k) { return kKindNames[static_cast<int>(k)]; }

ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (int i = 0; i < 5; ++i) {
    if (name == kKindNames[i]) return static_cast<ExperimentKind>(i);
  }
  throw std::invalid_argument("unknown experiment '" + name + "'");
}

std::string to_string(SweepAxis a) { return kAxisNames[static_cast<int>(a)]; }

SweepAxis sweep_axis_from_string(const std::string& name) {
  for (int i = 0; i < 4; ++i) {
    if (name == kAxisNames[i]) return static_cast<SweepAxis>(i);
  }
  throw std::invalid_argument("unknown sweep axis '" + name + "'");
}

std::pair<int, int> ExperimentConfig::shape() const {
  switch (experiment) {
    case ExperimentKind::kBenchmark:
      return benchmark.name == "ghz" ? std::make_pair(3, 6) : std::make_pair(2, 4);
    case ExperimentKind::kHamsimIsing:
      return {ising.spins, 2 * ising.spins};
    case ExperimentKind::kHamsimBh:
      return {bose_hubbard.photons, bose_hubbard.sites};
    case ExperimentKind::kAutoencoder:
    case ExperimentKind::kCartpole:
      return {4, 8};
  }
  return {0, 0};
}

std::uint64_t ExperimentConfig::optimizer_seed() const {
  return derive_seed(seed, "restart", restart);
}

// ---------------------------------------------------------------------------
// Parsing

ExperimentConfig parse_experiment_config(const json& j, const std::filesystem::path& base_dir) {
  expect_keys(j, "", {"experiment", "seed", "model", "task", "optimizer"},
              {"output_dir", "restart", "sweep"});
  ExperimentConfig c;
  c.experiment = section("/experiment", [&] {
    return experiment_kind_from_string(get<std::string>(j, "", "experiment"));
  });
  const json& seed = j.at("seed");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
    throw ConfigError("/seed", "expected a non-negative integer");
  }
  c.seed = seed.get<std::uint64_t>();
  c.restart = get_or<std::uint64_t>(j, "", "restart", 0);
  c.output_dir = get_or<std::string>(j, "", "output_dir", "runs/" + to_string(c.experiment));

  // Task.
  const json& task = j.at("task");
  switch (c.experiment) {
    case ExperimentKind::kBenchmark:
      expect_keys(task, "/task", {"name", "success_threshold"});
      c.benchmark.name = get<std::string>(task, "/task", "name");
      section("/task/name", [&] { return benchmark_training_set(c.benchmark.name).size(); });
      c.benchmark.success_threshold = get<double>(task, "/task", "success_threshold");
      if (!(c.benchmark.success_threshold > 0.0)) {
        throw ConfigError("/task/success_threshold", "must be positive");
      }
      break;
    case ExperimentKind::kHamsimIsing: {
      expect_keys(task, "/task", {"spins", "B", "J", "t", "train_pairs", "test_pairs"},
                  {"couplings"});
      c.ising = IsingSpec::chain(get<int>(task, "/task", "spins"), get<double>(task, "/task", "B"),
                                 get<double>(task, "/task", "J"), get<double>(task, "/task", "t"));
      if (task.contains("couplings")) c.ising.couplings = parse_edges(task.at("couplings"), "/task/couplings");
      section("/task", [&] { c.ising.validate(); return 0; });
      c.hamsim.train_pairs = get<std::size_t>(task, "/task", "train_pairs");
      c.hamsim.test_pairs = get<std::size_t>(task, "/task", "test_pairs");
      break;
    }
    case ExperimentKind::kHamsimBh:
      expect_keys(task, "/task",
                  {"photons", "sites", "omega", "t_hop", "U", "edges", "t", "train_pairs",
                   "test_pairs"});
      c.bose_hubbard.photons = get<int>(task, "/task", "photons");
      c.bose_hubbard.sites = get<int>(task, "/task", "sites");
      c.bose_hubbard.omega = get<double>(task, "/task", "omega");
      c.bose_hubbard.t_hop = get<double>(task, "/task", "t_hop");
      c.bose_hubbard.U = get<double>(task, "/task", "U");
      c.bose_hubbard.edges = parse_edges(task.at("edges"), "/task/edges");
      c.bose_hubbard.t = get<double>(task, "/task", "t");
      section("/task", [&] { c.bose_hubbard.validate(); return 0; });
      c.hamsim.train_pairs = get<std::size_t>(task, "/task", "train_pairs");
      c.hamsim.test_pairs = get<std::size_t>(task, "/task", "test_pairs");
      break;
    case ExperimentKind::kAutoencoder: {
      expect_keys(task, "/task", {"strategy", "coefficients"});
      c.autoencoder.strategy = section("/task/strategy", [&] {
        return autoencoder_strategy_from_string(get<std::string>(task, "/task", "strategy"));
      });
      std::filesystem::path p = get<std::string>(task, "/task", "coefficients");
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      c.autoencoder.coefficients = p.lexically_normal();
      break;
    }
    case ExperimentKind::kCartpole:
      expect_keys(task, "/task", {"env", "encoding", "baseline_episodes", "window"});
      expect_keys(task.at("env"), "/task/env",
                  {"gravity", "cart_mass", "pole_mass", "pole_half_length", "timestep",
                   "force_magnitude", "x_max", "theta_max", "t_max", "initial_half_width"});
      expect_keys(task.at("env").at("initial_half_width"), "/task/env/initial_half_width",
                  {"x", "x_dot", "theta", "theta_dot"});
      c.cartpole.env = section("/task/env", [&] { return cartpole_config_from_json(task.at("env")); });
      expect_keys(task.at("encoding"), "/task/encoding", {"x", "x_dot", "theta", "theta_dot"});
      c.cartpole.encoding =
          section("/task/encoding", [&] { return policy_encoding_from_json(task.at("encoding")); });
      c.cartpole.baseline_episodes = get<std::size_t>(task, "/task", "baseline_episodes");
      c.cartpole.window = get<std::size_t>(task, "/task", "window");
      if (c.cartpole.window < 1) throw ConfigError("/task/window", "must be >= 1");
      break;
  }

  // Model.
  const json& model = j.at("model");
  expect_keys(model, "/model", {"layers", "phi", "propagation"}, {"connectivity", "n", "m"});
  c.model.layers = get<int>(model, "/model", "layers");
  if (c.model.layers < 1) throw ConfigError("/model/layers", "must be >= 1");
  c.model.phi = get<double>(model, "/model", "phi");
  c.model.propagation = section("/model/propagation", [&] {
    return propagation_from_string(get<std::string>(model, "/model", "propagation"));
  });
  if (model.contains("connectivity") && !model.at("connectivity").is_null()) {
    c.model.connectivity = parse_edges(model.at("connectivity"), "/model/connectivity");
    const int m = c.shape().second;
    for (std::size_t i = 0; i < c.model.connectivity->size(); ++i) {
      const auto [a, b] = (*c.model.connectivity)[i];
      if (a < 0 || b < 0 || a >= m || b >= m || a == b) {
        throw ConfigError("/model/connectivity/" + std::to_string(i),
                          "mode pair out of range for " + std::to_string(m) + " modes");
      }
    }
  }
  const auto [n, m] = c.shape();
  if (model.contains("n") && get<int>(model, "/model", "n") != n) {
    throw ConfigError("/model/n", "task requires n = " + std::to_string(n));
  }
  if (model.contains("m") && get<int>(model, "/model", "m") != m) {
    throw ConfigError("/model/m", "task requires m = " + std::to_string(m));
  }
  if (c.experiment == ExperimentKind::kAutoencoder) {
    if (c.model.layers != kAutoencoderStages * kLayersPerStage) {
      throw ConfigError("/model/layers", "the autoencoder architecture has 6 layers");
    }
    if (c.model.connectivity) {
      throw ConfigError("/model/connectivity", "not supported for the autoencoder");
    }
  }

  // Optimizer.
  const json& opt = j.at("optimizer");
  if (c.experiment == ExperimentKind::kCartpole) {
    expect_keys(opt, "/optimizer",
                {"population", "sigma", "learning_rate", "generations", "fitness_runs"});
    c.es = section("/optimizer", [&] { return es_config_from_json(opt); });
  } else {
    expect_keys(opt, "/optimizer",
                {"starts", "local", "rejection_radius", "max_redraws", "sample_lower",
                 "sample_upper"});
    expect_keys(opt.at("local"), "/optimizer/local",
                {"max_evaluations", "initial_radius", "final_radius", "cost_tolerance"},
                {"target", "lower", "upper"});
    c.search = section("/optimizer", [&] { return multistart_config_from_json(opt); });
  }

  // Sweep.
  if (j.contains("sweep") && !j.at("sweep").is_null()) {
    const json& sw = j.at("sweep");
    expect_keys(sw, "/sweep", {"axis", "values"});
    SweepSpec spec;
    spec.axis = section("/sweep/axis",
                        [&] { return sweep_axis_from_string(get<std::string>(sw, "/sweep", "axis")); });
    spec.values = get<std::vector<double>>(sw, "/sweep", "values");
    if (spec.values.empty()) throw ConfigError("/sweep/values", "empty sweep axis");
    if (spec.axis == SweepAxis::kJOverB && c.experiment != ExperimentKind::kHamsimIsing) {
      throw ConfigError("/sweep/axis", "J_over_B applies to hamsim_ising only");
    }
    if (spec.axis == SweepAxis::kUOverTHop && c.experiment != ExperimentKind::kHamsimBh) {
      throw ConfigError("/sweep/axis", "U_over_t_hop applies to hamsim_bh only");
    }
    if (spec.axis == SweepAxis::kLayers && c.experiment == ExperimentKind::kAutoencoder) {
      throw ConfigError("/sweep/axis", "the autoencoder depth is fixed");
    }
    for (std::size_t i = 0; i < spec.values.size(); ++i) {
      const double v = spec.values[i];
      const bool integral = v == std::floor(v);
      if ((spec.axis == SweepAxis::kLayers && (!integral || v < 1)) ||
          (spec.axis == SweepAxis::kRestart && (!integral || v < 0))) {
        throw ConfigError("/sweep/values/" + std::to_string(i), "expected a valid integer");
      }
      if (!std::isfinite(v)) throw ConfigError("/sweep/values/" + std::to_string(i), "not finite");
    }
    c.sweep = spec;
  }
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  return parse_experiment_config(j, path.parent_path());
}

json to_json(const ExperimentConfig& c) {
  const auto [n, m] = c.shape();
  json j;
  j["experiment"] = to_string(c.experiment);
  j["seed"] = c.seed;
  j["restart"] = c.restart;
  j["output_dir"] = c.output_dir.string();
  j["model"] = {{"n", n},
                {"m", m},
                {"layers", c.model.layers},
                {"phi", c.model.phi},
                {"propagation", to_string(c.model.propagation)}};
  j["model"]["connectivity"] = c.model.connectivity ? edges_json(*c.model.connectivity) : json(nullptr);
  switch (c.experiment) {
    case ExperimentKind::kBenchmark:
      j["task"] = {{"name", c.benchmark.name}, {"success_threshold", c.benchmark.success_threshold}};
      break;
    case ExperimentKind::kHamsimIsing:
      j["task"] = {{"spins", c.ising.spins}, {"B", c.ising.B},
                   {"J", c.ising.J},         {"t", c.ising.t},
                   {"couplings", edges_json(c.ising.couplings)},
                   {"train_pairs", c.hamsim.train_pairs},
                   {"test_pairs", c.hamsim.test_pairs}};
      break;
    case ExperimentKind::kHamsimBh:
      j["task"] = {{"photons", c.bose_hubbard.photons},
                   {"sites", c.bose_hubbard.sites},
                   {"omega", c.bose_hubbard.omega},
                   {"t_hop", c.bose_hubbard.t_hop},
                   {"U", c.bose_hubbard.U},
                   {"edges", edges_json(c.bose_hubbard.edges)},
                   {"t", c.bose_hubbard.t},
                   {"train_pairs", c.hamsim.train_pairs},
                   {"test_pairs", c.hamsim.test_pairs}};
      break;
    case ExperimentKind::kAutoencoder:
      j["task"] = {{"strategy", to_string(c.autoencoder.strategy)},
                   {"coefficients", c.autoencoder.coefficients.string()}};
      break;
    case ExperimentKind::kCartpole:
      j["task"] = {{"env", to_json(c.cartpole.env)},
                   {"encoding", to_json(c.cartpole.encoding)},
                   {"baseline_episodes", c.cartpole.baseline_episodes},
                   {"window", c.cartpole.window}};
      break;
  }
  j["optimizer"] = c.experiment == ExperimentKind::kCartpole ? to_json(c.es) : to_json(c.search);
  if (c.sweep) {
    j["sweep"] = {{"axis", to_string(c.sweep->axis)}, {"values", c.sweep->values}};
  } else {
    j["sweep"] = nullptr;
  }
  return j;
}

std::string git_blob_sha1(std::string_view content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr) throw std::runtime_error("git_blob_sha1: out of memory");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest, &length) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw std::runtime_error("git_blob_sha1: digest failed");
  std::ostringstream hex;
  for (unsigned int i = 0; i < length; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

std::string config_hash(const ExperimentConfig& c) {
  json j = to_json(c);
  j.erase("output_dir");
  return git_blob_sha1(j.dump());
}

json to_json(const RunRecord& r) {
  return {{"config", r.config},
          {"config_hash", r.config_hash},
          {"started_at", r.started_at},
          {"finished_at", r.finished_at},
          {"ok", r.ok},
          {"diagnostic", r.diagnostic},
          {"metrics", r.metrics},
          {"details", r.details},
          {"trace_files", r.trace_files},
          {"checkpoint", r.checkpoint}};
}

// ---------------------------------------------------------------------------
// Experiments

namespace {

struct Outcome {
  json metrics = json::object();
  json details = json::object();
  std::string trace_csv;
  json checkpoint;
  std::string failure;
};

QonnModel build_model(const ExperimentConfig& c) {
  const auto [n, m] = c.shape();
  QonnModel model = c.model.connectivity
                        ? QonnModel::with_connectivity(n, m, c.model.layers, *c.model.connectivity,
                                                       c.model.phi)
                        : QonnModel(n, m, c.model.layers, c.model.phi);
  model.set_propagation(c.model.propagation);
  return model;
}

std::string search_trace(const MultiStartResult& r) {
  std::ostringstream out;
  out << "start,evaluation,best_cost,wall_time_s\n";
  for (const auto& s : r.starts) {
    for (const auto& p : s.result.trace) {
      out << s.index << ',' << p.evaluation << ',' << number(p.best) << ',' << number(p.wall_time_s)
          << '\n';
    }
  }
  return out.str();
}

MultiStartResult train(const ExperimentConfig& c, const QonnModel& model, const TrainingSet& set) {
  MultiStartConfig search = c.search;
  search.jobs = c.jobs;
  const Objective f = [&](std::span<const double> theta) { return cost(model, theta, set); };
  return minimize_multistart(f, model.parameter_count(), search, c.optimizer_seed());
}

json start_details(const MultiStartResult& r) {
  json starts = json::array();
  for (const auto& s : r.starts) {
    starts.push_back({{"index", s.index},
                      {"cost", s.result.value},
                      {"evaluations", s.result.evaluations},
                      {"stop_reason", s.result.stop_reason}});
  }
  return starts;
}

Outcome run_benchmark(const ExperimentConfig& c) {
  Outcome o;
  const TrainingSet set = benchmark_training_set(c.benchmark.name);
  QonnModel model = build_model(c);
  const MultiStartResult r = train(c, model, set);
  model.set_theta(r.x);
  std::size_t successes = 0;
  for (const auto& s : r.starts) successes += s.result.value < c.benchmark.success_threshold;
  o.metrics = {{"final_cost", r.value},
               {"success", r.value < c.benchmark.success_threshold},
               {"success_fraction", static_cast<double>(successes) / r.starts.size()},
               {"evaluations", r.evaluations},
               {"best_start", r.best_start}};
  o.details["starts"] = start_details(r);
  o.trace_csv = search_trace(r);
  o.checkpoint = to_json(model);
  return o;
}

Outcome run_hamsim(const ExperimentConfig& c) {
  Outcome o;
  const bool ising = c.experiment == ExperimentKind::kHamsimIsing;
  const TrainTestSets data =
      ising ? make_ising_training_data(c.ising, c.hamsim.train_pairs, c.hamsim.test_pairs, c.seed,
                                       c.jobs)
            : make_bh_training_data(c.bose_hubbard, c.hamsim.train_pairs, c.hamsim.test_pairs,
                                    c.seed, c.jobs);
  QonnModel model = build_model(c);
  const MultiStartResult r = train(c, model, data.train);
  model.set_theta(r.x);
  o.metrics = {{"train_cost", r.value},
               {"test_error", mean_test_error(model, data.test)},
               {"evaluations", r.evaluations},
               {"best_start", r.best_start}};
  o.details["starts"] = start_details(r);
  if (ising) {
    // All spins up (logical |0...0>) against the exact evolution.
    const int q = c.ising.spins;
    ComplexVector up = ComplexVector::Zero(Eigen::Index{1} << q);
    up(0) = 1.0;
    const QuantumState out = forward(model, encode_dual_rail(up, model.basis_ptr()));
    const DualRailDecoding decoded = decode_dual_rail(out, q);
    const ComplexVector exact = evolve_exact(ising_matrix(c.ising), c.ising.t, up);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < exact.size(); ++i) {
      std::string bits;
      for (int b = q - 1; b >= 0; --b) bits += ((i >> b) & 1) ? '1' : '0';
      const double p = std::norm(decoded.logical(i));
      const double e = std::norm(exact(i));
      o.metrics["probe_p_" + bits] = p;
      o.metrics["oracle_p_" + bits] = e;
      worst = std::max(worst, std::abs(p - e));
    }
    o.metrics["probe_leakage"] = decoded.leakage;
    o.metrics["probe_max_abs_error"] = worst;
  }
  o.trace_csv = search_trace(r);
  o.checkpoint = to_json(model);
  return o;
}

Outcome run_autoencoder(const ExperimentConfig& c) {
  Outcome o;
  AutoencoderTask task =
      AutoencoderTask::from_coefficients(load_h2_coefficients(c.autoencoder.coefficients));
  task.phi = c.model.phi;
  MultiStartConfig search = c.search;
  search.jobs = c.jobs;
  const AutoencoderResult r =
      run_autoencoder_strategy(task, c.autoencoder.strategy, search, c.optimizer_seed());
  if (!r.ok) {
    o.failure = r.diagnostic;
    return o;
  }
  o.metrics = {{"fidelity", r.fidelity}, {"final_cost", 1.0 - r.fidelity},
               {"evaluations", r.evaluations}};
  json stages = json::array();
  for (const auto& s : r.stages) {
    stages.push_back({{"name", s.name}, {"fidelity", s.fidelity}, {"evaluations", s.evaluations}});
  }
  o.details["stages"] = stages;
  std::ostringstream trace;
  trace << "evaluation,best_cost,wall_time_s\n";
  for (const auto& p : r.trace) {
    trace << p.evaluation << ',' << number(p.best) << ',' << number(p.wall_time_s) << '\n';
  }
  o.trace_csv = trace.str();
  o.checkpoint = to_json(*r.model);
  return o;
}

Outcome run_cartpole(const ExperimentConfig& c) {
  Outcome o;
  QonnModel model(4, 8, c.model.layers, c.model.phi);
  model.set_propagation(c.model.propagation);
  if (c.model.connectivity) {
    model = QonnModel::with_connectivity(4, 8, c.model.layers, *c.model.connectivity, c.model.phi);
    model.set_propagation(c.model.propagation);
  }
  Rng init = make_rng(c.optimizer_seed(), "init");
  std::vector<double> x0(model.parameter_count());
  for (auto& v : x0) v = uniform_phase(init);

  const CartPoleConfig env = c.cartpole.env;
  const PolicyEncoding encoding = c.cartpole.encoding;
  const BatchFitness fitness = [&](std::span<const double> x,
                                   std::span<const std::uint64_t> seeds) {
    const QonnPolicy policy(model, x, encoding);
    std::vector<double> out;
    out.reserve(seeds.size());
    for (std::uint64_t s : seeds) {
      Rng rng(s);
      out.push_back(episode_fitness(policy, env, rng));
    }
    return out;
  };
  EsConfig es = c.es;
  es.jobs = c.jobs;
  const EsResult r = maximize_es(fitness, x0, es, c.optimizer_seed());
  model.set_theta(r.x);

  const std::vector<int> baseline =
      random_policy_fitness(env, c.cartpole.baseline_episodes, c.seed);
  const double random_median = median(std::vector<double>(baseline.begin(), baseline.end()));
  std::vector<double> means;
  for (const auto& g : r.trace) means.push_back(g.mean_fitness);
  const std::size_t w = std::min(c.cartpole.window, means.size());
  const double first = means.empty() ? 0.0 : median({means.begin(), means.begin() + static_cast<std::ptrdiff_t>(w)});
  const double last = means.empty() ? 0.0 : median({means.end() - static_cast<std::ptrdiff_t>(w), means.end()});
  o.metrics = {{"final_window_median", last},
               {"first_window_median", first},
               {"random_policy_median", random_median},
               {"improvement_over_random", last / random_median},
               {"final_center_fitness", r.trace.empty() ? 0.0 : r.trace.back().center_fitness},
               {"generations", r.trace.size()}};
  std::ostringstream trace;
  trace << "generation,mean_fitness,max_fitness,center_fitness,wall_time_s\n";
  for (const auto& g : r.trace) {
    trace << g.generation << ',' << number(g.mean_fitness) << ',' << number(g.max_fitness) << ','
          << number(g.center_fitness) << ',' << number(g.wall_time_s) << '\n';
  }
  o.trace_csv = trace.str();
  o.checkpoint = to_json(model);
  return o;
}

}  // namespace

RunRecord run_experiment(const ExperimentConfig& config) {
  RunRecord record;
  record.config = to_json(config);
  record.config_hash = config_hash(config);
  record.started_at = iso_now();
  Outcome o;
  try {
    switch (config.experiment) {
      case ExperimentKind::kBenchmark: o = run_benchmark(config); break;
      case ExperimentKind::kHamsimIsing:
      case ExperimentKind::kHamsimBh: o = run_hamsim(config); break;
      case ExperimentKind::kAutoencoder: o = run_autoencoder(config); break;
      case ExperimentKind::kCartpole: o = run_cartpole(config); break;
    }
  } catch (const std::exception& e) {
    o.failure = e.what();
  }
  for (const auto& [name, value] : o.metrics.items()) {
    if (value.is_number_float() && !std::isfinite(value.get<double>())) {
      o.failure = "non-finite metric '" + name + "'";
    }
  }
  record.ok = o.failure.empty();
  record.diagnostic = o.failure;
  record.metrics = o.metrics;
  record.details = o.details;
  record.finished_at = iso_now();

  try {
    std::filesystem::create_directories(config.output_dir);
    if (!o.trace_csv.empty()) {
      write_text(config.output_dir / "trace.csv", o.trace_csv);
      record.trace_files.push_back("trace.csv");
    }
    if (!o.checkpoint.is_null()) {
      write_text(config.output_dir / "checkpoint.json", o.checkpoint.dump(2) + "\n");
      record.checkpoint = "checkpoint.json";
    }
    write_text(config.output_dir / "record.json", to_json(record).dump(2) + "\n");
  } catch (const std::exception& e) {
    record.ok = false;
    record.diagnostic = (record.diagnostic.empty() ? "" : record.diagnostic + "; ") + e.what();
  }
  return record;
}

ExperimentConfig sweep_point(const ExperimentConfig& config, std::size_t index) {
  if (!config.sweep) throw ConfigError("/sweep", "no sweep axis declared");
  const SweepSpec& sweep = *config.sweep;
  if (index >= sweep.values.size()) throw std::out_of_range("sweep_point: index out of range");
  ExperimentConfig c = config;
  c.sweep.reset();
  const double v = sweep.values[index];
  switch (sweep.axis) {
    case SweepAxis::kLayers: c.model.layers = static_cast<int>(v); break;
    case SweepAxis::kJOverB: c.ising.J = v * c.ising.B; break;
    case SweepAxis::kUOverTHop: c.bose_hubbard.U = v * c.bose_hubbard.t_hop; break;
    case SweepAxis::kRestart: c.restart = static_cast<std::uint64_t>(v); break;
  }
  char name[32];
  std::snprintf(name, sizeof name, "point-%03zu", index);
  c.output_dir = config.output_dir / name;
  return c;
}

std::vector<RunRecord> run_sweep(const ExperimentConfig& config) {
  if (!config.sweep) throw ConfigError("/sweep", "no sweep axis declared");
  const std::size_t points = config.sweep->values.size();
  const int jobs = std::max(config.jobs, 1);
  std::vector<RunRecord> records(points);
  parallel_for(points, jobs, [&](std::size_t i) {
    ExperimentConfig point = sweep_point(config, i);
    point.jobs = jobs > 1 ? 1 : config.jobs;
    records[i] = run_experiment(point);
  });

  std::set<std::string> columns;
  for (const auto& r : records) {
    for (const auto& [name, value] : r.metrics.items()) {
      if (value.is_number() || value.is_boolean()) columns.insert(name);
    }
  }
  std::ostringstream csv;
  csv << "point," << to_string(config.sweep->axis) << ",ok";
  for (const auto& name : columns) csv << ',' << name;
  csv << '\n';
  for (std::size_t i = 0; i < points; ++i) {
    csv << i << ',' << number(config.sweep->values[i]) << ',' << (records[i].ok ? 1 : 0);
    for (const auto& name : columns) {
      csv << ',';
      if (!records[i].metrics.contains(name)) continue;
      const json& v = records[i].metrics.at(name);
      if (v.is_boolean()) {
        csv << (v.get<bool>() ? 1 : 0);
      } else if (v.is_number_integer() || v.is_number_unsigned()) {
        csv << v.dump();
      } else {
        csv << number(v.get<double>());
      }
    }
    csv << '\n';
  }
  std::filesystem::create_directories(config.output_dir);
  write_text(config.output_dir / "summary.csv", csv.str());
  return records;
}

// ---------------------------------------------------------------------------

json evaluate_checkpoint(const json& checkpoint, const json& probes) {
  const QonnModel model = section("/checkpoint", [&] { return model_from_json(checkpoint); });
  const FockBasisPtr basis = model.basis_ptr();
  const json& list = probes.is_object() && probes.contains("probes") ? probes.at("probes") : probes;
  if (!list.is_array()) throw ConfigError("/probes", "expected a list of probes");
  const bool dual_rail = model.modes() == 2 * model.photons();

  json out = {{"model", {{"n", model.photons()}, {"m", model.modes()}, {"layers", model.layers()}}},
              {"probes", json::array()}};
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string path = "/probes/" + std::to_string(i);
    const json& probe = list[i];
    expect_keys(probe, path, {}, {"label", "state", "occupation", "logical"});
    const int forms = probe.contains("state") + probe.contains("occupation") + probe.contains("logical");
    if (forms != 1) throw ConfigError(path, "give exactly one of state, occupation, logical");
    const QuantumState input = section(path, [&]() -> QuantumState {
      if (probe.contains("state")) return state_from_json(probe.at("state"), basis);
      if (probe.contains("occupation")) {
        const auto occ = probe.at("occupation").get<Occupation>();
        if (static_cast<int>(occ.size()) != model.modes()) {
          throw std::invalid_argument("occupation has " + std::to_string(occ.size()) +
                                      " modes, the checkpoint has " +
                                      std::to_string(model.modes()));
        }
        return QuantumState::basis_state(basis, occ);
      }
      if (!dual_rail) throw std::invalid_argument("logical probes need a dual-rail model");
      const auto& arr = probe.at("logical");
      ComplexVector v(static_cast<Eigen::Index>(arr.size()));
      for (std::size_t k = 0; k < arr.size(); ++k) v(static_cast<Eigen::Index>(k)) = complex_from_json(arr[k]);
      if (v.size() != (Eigen::Index{1} << model.photons())) {
        throw std::invalid_argument("logical probe needs 2^n amplitudes");
      }
      return encode_dual_rail(v, basis);
    });
    const QuantumState output = forward(model, input);
    json entry;
    entry["label"] = probe.value("label", "probe-" + std::to_string(i));
    json dist = json::array();
    for (std::size_t k = 0; k < basis->size(); ++k) {
      dist.push_back({{"occupation", basis->state(k)},
                      {"p", std::norm(output.amplitudes()(static_cast<Eigen::Index>(k)))}});
    }
    entry["probabilities"] = dist;
    if (dual_rail) {
      const DualRailDecoding d = decode_dual_rail(output, model.photons());
      std::vector<double> p;
      for (Eigen::Index k = 0; k < d.logical.size(); ++k) p.push_back(std::norm(d.logical(k)));
      entry["dual_rail"] = {{"logical_probabilities", p}, {"leakage", d.leakage}};
    }
    out["probes"].push_back(entry);
  }
  return out;
}

}  // namespace qonn

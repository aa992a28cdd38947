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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qonn/hamiltonians.hpp"
#include "qonn/model.hpp"
#include "qonn/optimizers.hpp"
#include "qonn/tasks.hpp"

namespace qonn {

/// Invalid experiment configuration; `path` is a JSON pointer to the field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

enum class ExperimentKind { kBenchmark, kHamsimIsing, kHamsimBh, kAutoencoder, kCartpole };

std::string to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& name);

struct ModelSpec {
  int layers = 2;
  double phi = kPi;
  Propagation propagation = Propagation::kDense;
  /// Restricts every mesh to these mode couplings when set.
  std::optional<std::vector<Edge>> connectivity;
};

struct BenchmarkTaskConfig {
  std::string name = "cnot";
  double success_threshold = 1e-4;
};

struct HamsimTaskConfig {
  std::size_t train_pairs = 20;
  std::size_t test_pairs = 50;
};

struct AutoencoderTaskConfig {
  AutoencoderStrategy strategy = AutoencoderStrategy::kGlobalStructured;
  std::filesystem::path coefficients;
};

struct CartpoleTaskConfig {
  CartPoleConfig env;
  PolicyEncoding encoding;
  /// Episodes used for the random-policy reference median.
  std::size_t baseline_episodes = 400;
  /// Generations in the rolling window reported as the final median.
  std::size_t window = 10;
};

enum class SweepAxis { kLayers, kJOverB, kUOverTHop, kRestart };

std::string to_string(SweepAxis a);
SweepAxis sweep_axis_from_string(const std::string& name);

struct SweepSpec {
  SweepAxis axis = SweepAxis::kLayers;
  std::vector<double> values;
};

/// One experiment. Only the task section matching `experiment` is used.
/// Randomness derives from `seed`: training data from it directly, the
/// optimizer from substream "restart"[restart].
struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::kBenchmark;
  std::uint64_t seed = 0;
  std::uint64_t restart = 0;
  std::filesystem::path output_dir;
  ModelSpec model;
  BenchmarkTaskConfig benchmark;
  IsingSpec ising;
  BoseHubbardSpec bose_hubbard;
  HamsimTaskConfig hamsim;
  AutoencoderTaskConfig autoencoder;
  CartpoleTaskConfig cartpole;
  MultiStartConfig search;
  EsConfig es;
  std::optional<SweepSpec> sweep;
  /// Worker threads; not part of the serialized config.
  int jobs = 1;

  /// Photon and mode counts implied by the task.
  std::pair<int, int> shape() const;
  std::uint64_t optimizer_seed() const;
};

/// Parses and validates a config document. Relative file paths inside the
/// document resolve against `base_dir`.
ExperimentConfig parse_experiment_config(const nlohmann::json& j,
                                         const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
/// Fully resolved document; parse(to_json(c)) reproduces c.
nlohmann::json to_json(const ExperimentConfig& c);

/// Hex SHA-1 of "blob <size>\0<content>", as computed by git.
std::string git_blob_sha1(std::string_view content);
/// Blob hash of the compact resolved config with output_dir removed.
std::string config_hash(const ExperimentConfig& c);

struct RunRecord {
  nlohmann::json config;
  std::string config_hash;
  std::string started_at;
  std::string finished_at;
  bool ok = false;
  std::string diagnostic;
  /// Flat name -> number (or bool) map; identical across reruns.
  nlohmann::json metrics = nlohmann::json::object();
  /// Structured per-start, per-stage or per-probe results.
  nlohmann::json details = nlohmann::json::object();
  std::vector<std::string> trace_files;
  std::string checkpoint;
};

nlohmann::json to_json(const RunRecord& r);

/// Runs one experiment (any sweep section is ignored) and writes
/// record.json, checkpoint.json and trace.csv under config.output_dir.
/// Failures are reported through the record, never thrown.
RunRecord run_experiment(const ExperimentConfig& config);

/// Config of sweep point `index`, writing to output_dir/point-NNN.
ExperimentConfig sweep_point(const ExperimentConfig& config, std::size_t index);

/// Runs every point of the sweep, up to config.jobs at a time, and writes
/// summary.csv (point, axis value, ok, then every scalar metric).
std::vector<RunRecord> run_sweep(const ExperimentConfig& config);

/// Output distributions of a checkpointed model for each probe. A probe is
/// {"label"?, and one of "state": {n, m, amplitudes}, "occupation": [...],
/// "logical": [[re, im], ...]}; the last is dual-rail encoded.
nlohmann::json evaluate_checkpoint(const nlohmann::json& checkpoint, const nlohmann::json& probes);

}  // namespace qonn

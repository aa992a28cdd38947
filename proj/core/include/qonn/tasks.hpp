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

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qonn/fock.hpp"
#include "qonn/model.hpp"
#include "qonn/optimizers.hpp"
#include "qonn/rng.hpp"

namespace qonn {

// ---------------------------------------------------------------------------
// Benchmark gate sets

/// "bell", "cnot" (2 photons, 4 modes) or "ghz" (3 photons, 6 modes).
TrainingSet benchmark_training_set(std::string_view name);
std::vector<std::string> benchmark_names();

// ---------------------------------------------------------------------------
// Autoencoder

struct H2Coefficients {
  double bond_length_angstrom = 0.0;
  Complex alpha;  // |0011>
  Complex beta;   // |1100>
};

/// JSON list of {bond_length_angstrom, alpha: [re, im], beta: [re, im]}.
/// Rejects pairs whose squared norms do not sum to one within 1e-6.
std::vector<H2Coefficients> h2_coefficients_from_json(const nlohmann::json& j);
std::vector<H2Coefficients> load_h2_coefficients(const std::filesystem::path& path);

enum class AutoencoderStrategy { kLocalStructured, kGlobalStructured, kGlobalUnstructured };

std::string to_string(AutoencoderStrategy s);
AutoencoderStrategy autoencoder_strategy_from_string(const std::string& name);

/// Four-qubit states alpha|0011> + beta|1100> on the (4, 8) basis. Qubits
/// {0, 1, 2} are compressed to logical |0>; qubit 3 holds the latent state.
struct AutoencoderTask {
  std::vector<QuantumState> states;
  std::vector<int> reference_qubits{0, 1, 2};
  double phi = kPi;

  static AutoencoderTask from_coefficients(const std::vector<H2Coefficients>& coefficients);
  /// Arbitrary (4, 8) input states.
  static AutoencoderTask from_states(std::vector<QuantumState> states);
};

inline constexpr int kAutoencoderStages = 3;
inline constexpr int kLayersPerStage = 2;

/// Three stages of two layers on 8 modes; stage s meshes act only on modes
/// 2s..7, so already compressed qubits pass through.
QonnModel structured_autoencoder_model(double phi = kPi);
/// Six full-mesh layers on 8 modes.
QonnModel unstructured_autoencoder_model(double phi = kPi);

/// 1 - mean reference fidelity of the model outputs over `qubits`. The
/// model must act on the (4, 8) basis; it may have any number of layers.
double autoencoder_cost(const QonnModel& model, std::span<const double> theta,
                        const std::vector<QuantumState>& states, std::span<const int> qubits);
double autoencoder_cost(const QonnModel& model, const AutoencoderTask& task);

struct AutoencoderStage {
  std::string name;
  double fidelity = 0.0;
  std::size_t evaluations = 0;
};

struct AutoencoderResult {
  AutoencoderStrategy strategy = AutoencoderStrategy::kGlobalStructured;
  std::optional<QonnModel> model;
  /// Reference fidelity of the final model on the task, 1 - cost.
  double fidelity = 0.0;
  std::size_t evaluations = 0;
  std::vector<AutoencoderStage> stages;
  /// Best cost against cumulative evaluation count, across all stages.
  std::vector<TracePoint> trace;
  bool ok = true;
  std::string diagnostic;
};

/// Trains the autoencoder with one strategy. Each stage runs
/// `minimize_multistart` with `config`; stage k draws from substream
/// "stage"[k] of `seed`. The local strategy trains stage s on the first
/// 2(s + 1) layers against qubits {0..s} with earlier stages frozen, then
/// refines every parameter with one local search from the staged optimum.
/// Optimizer exceptions are reported through `ok` and `diagnostic`.
AutoencoderResult run_autoencoder_strategy(const AutoencoderTask& task,
                                           AutoencoderStrategy strategy,
                                           const MultiStartConfig& config, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Cartpole

struct CartPoleState {
  double x = 0.0;
  double x_dot = 0.0;
  double theta = 0.0;
  double theta_dot = 0.0;
};

struct CartPoleConfig {
  double gravity = 9.8;
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double pole_half_length = 0.5;
  double timestep = 0.02;
  double force_magnitude = 10.0;
  double x_max = 2.4;
  double theta_max = 12.0 * kPi / 180.0;
  int t_max = 300;
  /// Initial states are uniform on [-w, w] per component.
  CartPoleState initial_half_width{0.12, 0.15, 0.6 * kPi / 180.0, 0.15};

  void validate() const;
};

/// Second derivatives (x_ddot, theta_ddot) of the frictionless cart with a
/// uniform pole, theta measured from upright.
std::array<double, 2> cartpole_accelerations(const CartPoleConfig& config,
                                             const CartPoleState& state, double force);
/// One explicit Euler step.
CartPoleState cartpole_integrate(const CartPoleConfig& config, const CartPoleState& state,
                                 double force);
/// Kinetic plus potential energy, zero potential at the pivot height.
double cartpole_energy(const CartPoleConfig& config, const CartPoleState& state);

class CartPoleEnv {
 public:
  CartPoleEnv(CartPoleConfig config, CartPoleState initial);
  /// Initial state drawn uniformly from the configured half widths.
  static CartPoleEnv random(const CartPoleConfig& config, Rng& rng);

  const CartPoleState& state() const { return state_; }
  const CartPoleConfig& config() const { return config_; }
  int steps() const { return steps_; }
  bool done() const { return done_; }

  /// Applies force action * force_magnitude for one timestep; action must
  /// be -1 or +1. Returns true once a bound or t_max is reached.
  bool step(int action);

 private:
  CartPoleConfig config_;
  CartPoleState state_;
  int steps_ = 0;
  bool done_ = false;
};

/// Affine map of each observable from its clip range onto [0, pi/2].
struct PolicyEncoding {
  std::array<double, 4> lower{-2.4, -3.0, -12.0 * kPi / 180.0, -3.0};
  std::array<double, 4> upper{2.4, 3.0, 12.0 * kPi / 180.0, 3.0};

  std::array<double, 4> angles(const CartPoleState& s) const;
  /// Product state (cos g |0> + sin g |1>) over the four qubits, as 16
  /// logical amplitudes with qubit 0 most significant.
  ComplexVector logical_input(const CartPoleState& s) const;
  void validate() const;
};

/// A trained network read out by photon counting: a measured outcome with
/// more photons in mode 0 than in mode 1 pushes left (-1), anything else
/// pushes right (+1).
class QonnPolicy {
 public:
  QonnPolicy(const QonnModel& model, std::span<const double> theta, PolicyEncoding encoding = {});

  /// Output amplitudes for an observation.
  ComplexVector output(const CartPoleState& s) const;
  /// Exact probability of action -1.
  double left_probability(const CartPoleState& s) const;
  /// One Fock outcome (basis index) drawn from the output distribution.
  std::size_t sample_outcome(const CartPoleState& s, Rng& rng) const;
  /// The action a measured outcome maps to.
  int action_for(std::size_t outcome) const;
  /// Draws an action with the outcome-level law of sample_outcome followed
  /// by action_for, using one uniform variate against left_probability.
  int act(const CartPoleState& s, Rng& rng) const;

 private:
  PolicyEncoding encoding_;
  FockBasisPtr basis_;
  ComplexMatrix transfer_;  // columns: network outputs of the 16 dual-rail inputs
  std::vector<bool> left_;
  Eigen::Matrix<double, 16, 16> left_form_;
};

using Policy = std::function<int(const CartPoleState&, Rng&)>;

/// Steps survived in one episode, in [1, t_max]. The initial state and the
/// policy both draw from `rng`.
int episode_fitness(const Policy& policy, const CartPoleConfig& config, Rng& rng);
int episode_fitness(const QonnPolicy& policy, const CartPoleConfig& config, Rng& rng);

/// Fitness of the uniform random policy for `episodes` runs, run i seeded
/// from substream "random-policy"[i].
std::vector<int> random_policy_fitness(const CartPoleConfig& config, std::size_t episodes,
                                       std::uint64_t seed);

double median(std::vector<double> values);

nlohmann::json to_json(const CartPoleConfig& c);
CartPoleConfig cartpole_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PolicyEncoding& e);
PolicyEncoding policy_encoding_from_json(const nlohmann::json& j);

}  // namespace qonn

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

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <fstream>
#include <random>

#include "qonn/tasks.hpp"
#include "test_util.hpp"

namespace qonn {
namespace {

constexpr double kR = 0.70710678118654752440;

Complex amp(const QuantumState& s, const Occupation& occ) { return s.amplitude(occ); }

// ---------------------------------------------------------------------------
// Benchmark sets

TEST(Benchmark, CnotSwapsLastTwo) {
  const TrainingSet set = benchmark_training_set("cnot");
  ASSERT_EQ(set.size(), 4u);
  const std::vector<Occupation> in = {{1, 0, 1, 0}, {1, 0, 0, 1}, {0, 1, 1, 0}, {0, 1, 0, 1}};
  const std::vector<Occupation> out = {{1, 0, 1, 0}, {1, 0, 0, 1}, {0, 1, 0, 1}, {0, 1, 1, 0}};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(amp(set.pairs()[i].first, in[i]), Complex(1.0));
    EXPECT_EQ(amp(set.pairs()[i].second, out[i]), Complex(1.0));
  }
}

TEST(Benchmark, BellInputsAndOutputs) {
  const TrainingSet set = benchmark_training_set("bell");
  ASSERT_EQ(set.size(), 4u);
  const auto& phi_minus = set.pairs()[1].first;
  EXPECT_NEAR(amp(phi_minus, {1, 0, 1, 0}).real(), kR, 1e-15);
  EXPECT_NEAR(amp(phi_minus, {0, 1, 0, 1}).real(), -kR, 1e-15);
  const auto& psi_plus = set.pairs()[2].first;
  EXPECT_NEAR(amp(psi_plus, {1, 0, 0, 1}).real(), kR, 1e-15);
  EXPECT_NEAR(amp(psi_plus, {0, 1, 1, 0}).real(), kR, 1e-15);
  EXPECT_EQ(amp(set.pairs()[3].second, {0, 1, 0, 1}), Complex(1.0));
}

TEST(Benchmark, GhzSinglePair) {
  const TrainingSet set = benchmark_training_set("ghz");
  ASSERT_EQ(set.size(), 1u);
  EXPECT_EQ(set.basis_ptr()->photons(), 3);
  EXPECT_EQ(set.basis_ptr()->modes(), 6);
  EXPECT_EQ(amp(set.pairs()[0].first, {1, 0, 1, 0, 1, 0}), Complex(1.0));
  const auto& target = set.pairs()[0].second;
  EXPECT_NEAR(amp(target, {1, 0, 1, 0, 1, 0}).real(), kR, 1e-15);
  EXPECT_NEAR(amp(target, {0, 1, 0, 1, 0, 1}).real(), kR, 1e-15);
}

TEST(Benchmark, FamiliesAreOrthonormal) {
  for (const char* name : {"bell", "cnot"}) {
    const TrainingSet set = benchmark_training_set(name);
    for (const ComplexMatrix* family : {&set.inputs(), &set.targets()}) {
      const ComplexMatrix gram = family->adjoint() * *family;
      EXPECT_LT((gram - ComplexMatrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-12) << name;
    }
  }
}

TEST(Benchmark, UnknownNameRejected) {
  EXPECT_THROW(benchmark_training_set("toffoli"), std::invalid_argument);
  EXPECT_EQ(benchmark_names().size(), 3u);
}

// ---------------------------------------------------------------------------
// H2 coefficients

TEST(H2, JsonParsingAndNormCheck) {
  const auto ok = nlohmann::json::parse(
      R"([{"bond_length_angstrom": 1.0, "alpha": [0.6, 0.0], "beta": [0.0, 0.8]}])");
  const auto c = h2_coefficients_from_json(ok);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].beta, Complex(0.0, 0.8));
  const auto bad = nlohmann::json::parse(
      R"([{"bond_length_angstrom": 1.0, "alpha": [0.6, 0.0], "beta": [0.6, 0.0]}])");
  EXPECT_THROW(h2_coefficients_from_json(bad), std::invalid_argument);
  EXPECT_THROW(h2_coefficients_from_json(nlohmann::json::array()), std::invalid_argument);
}

// The shipped coefficients must be the ground state of the stored 2x2 CI
// matrix; solved here in closed form.
TEST(H2, ShippedFileIsCiGroundState) {
  const auto path = std::filesystem::path(QONN_DATA_DIR) / "h2_sto3g_coefficients.json";
  std::ifstream in(path);
  ASSERT_TRUE(in) << path;
  const auto doc = nlohmann::json::parse(in);
  const auto coeffs = h2_coefficients_from_json(doc);
  ASSERT_EQ(coeffs.size(), 4u);
  const double lengths[4] = {0.5, 1.0, 1.5, 2.0};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_DOUBLE_EQ(coeffs[i].bond_length_angstrom, lengths[i]);
    const auto& h = doc[i].at("ci_matrix_hartree");
    const double a = h[0][0].get<double>();
    const double b = h[0][1].get<double>();
    const double d = h[1][1].get<double>();
    const double lowest = 0.5 * (a + d) - std::sqrt(0.25 * (a - d) * (a - d) + b * b);
    // Eigenvector (b, lowest - a) up to normalisation and sign.
    double v0 = b;
    double v1 = lowest - a;
    const double n = std::hypot(v0, v1);
    v0 /= n;
    v1 /= n;
    if (v0 < 0) {
      v0 = -v0;
      v1 = -v1;
    }
    EXPECT_NEAR(coeffs[i].beta.real(), v0, 1e-10);
    EXPECT_NEAR(coeffs[i].alpha.real(), v1, 1e-10);
    // Bonding configuration dominates at every length, less so when stretched.
    EXPECT_GT(std::abs(coeffs[i].beta), std::abs(coeffs[i].alpha));
    if (i > 0) EXPECT_GT(std::abs(coeffs[i].alpha), std::abs(coeffs[i - 1].alpha));
  }
}

// ---------------------------------------------------------------------------
// Autoencoder

AutoencoderTask shipped_task() {
  return AutoencoderTask::from_coefficients(
      load_h2_coefficients(std::filesystem::path(QONN_DATA_DIR) / "h2_sto3g_coefficients.json"));
}

TEST(Autoencoder, TaskStates) {
  const AutoencoderTask task = shipped_task();
  ASSERT_EQ(task.states.size(), 4u);
  for (const auto& s : task.states) {
    EXPECT_NEAR(s.amplitudes().norm(), 1.0, 1e-12);
    const double p = std::norm(s.amplitude({1, 0, 1, 0, 0, 1, 0, 1})) +
                     std::norm(s.amplitude({0, 1, 0, 1, 1, 0, 1, 0}));
    EXPECT_NEAR(p, 1.0, 1e-12);
  }
  EXPECT_EQ(task.reference_qubits, (std::vector<int>{0, 1, 2}));
  EXPECT_THROW(AutoencoderTask::from_states({}), std::invalid_argument);
}

TEST(Autoencoder, ModelShapes) {
  const QonnModel s = structured_autoencoder_model();
  EXPECT_EQ(s.layers(), 6);
  EXPECT_EQ(s.parameter_count(), 2u * (56 + 30 + 12));
  const QonnModel u = unstructured_autoencoder_model();
  EXPECT_EQ(u.parameter_count(), 6u * 56);
  // Later stages never touch the modes of qubits already compressed.
  std::mt19937_64 rng(3);
  std::vector<double> theta(s.parameter_count());
  for (auto& t : theta) t = uniform_phase(rng);
  for (std::size_t layer = 2; layer < 6; ++layer) {
    const ComplexMatrix m = s.layer_unitary(layer, theta);
    const int frozen = layer < 4 ? 2 : 4;
    for (int i = 0; i < frozen; ++i) {
      for (int j = 0; j < 8; ++j) {
        EXPECT_LT(std::abs(m(i, j) - (i == j ? 1.0 : 0.0)), 1e-14);
      }
    }
  }
}

TEST(Autoencoder, CostExamples) {
  const FockBasisPtr basis = enumerate_basis(4, 8);
  QonnModel id = structured_autoencoder_model();
  const std::vector<int> refs{0, 1, 2};
  // |0011>: qubits 0, 1 are already |0> but qubit 2 is |1>.
  const QuantumState s0011 = QuantumState::basis_state(basis, {1, 0, 1, 0, 0, 1, 0, 1});
  EXPECT_NEAR(autoencoder_cost(id, id.theta(), {s0011}, refs), 1.0, 1e-14);
  // Already compressed inputs, any latent state.
  const QuantumState s0001 = QuantumState::basis_state(basis, {1, 0, 1, 0, 1, 0, 0, 1});
  const QuantumState s0000 = QuantumState::basis_state(basis, {1, 0, 1, 0, 1, 0, 1, 0});
  EXPECT_NEAR(autoencoder_cost(id, id.theta(), {s0001, s0000}, refs), 0.0, 1e-14);
  // Single state: 1 - its reference fidelity.
  std::mt19937_64 rng(5);
  std::vector<double> theta(id.parameter_count());
  for (auto& t : theta) t = uniform_phase(rng);
  id.set_theta(theta);
  const QuantumState out = forward(id, s0011);
  EXPECT_NEAR(autoencoder_cost(id, theta, {s0011}, refs),
              1.0 - reference_qubit_fidelity(out, refs), 1e-14);
}

TEST(Autoencoder, CostBoundsAndBasisCheck) {
  const AutoencoderTask task = shipped_task();
  const QonnModel model = unstructured_autoencoder_model();
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> theta(model.parameter_count());
    for (auto& t : theta) t = uniform_phase(rng);
    const double c = autoencoder_cost(model, theta, task.states, task.reference_qubits);
    EXPECT_GE(c, 0.0);
    EXPECT_LE(c, 1.0);
  }
  const QonnModel small(2, 4, 1);
  EXPECT_THROW(autoencoder_cost(small, small.theta(), task.states, task.reference_qubits),
               std::invalid_argument);
}

MultiStartConfig small_config(std::size_t budget) {
  MultiStartConfig c;
  c.starts = 1;
  c.local.max_evaluations = budget;
  c.local.initial_radius = 0.5;
  c.local.final_radius = 1e-4;
  return c;
}

TEST(Autoencoder, TrivialTaskFromIdentityStart) {
  const FockBasisPtr basis = enumerate_basis(4, 8);
  const AutoencoderTask task = AutoencoderTask::from_states(
      {QuantumState::basis_state(basis, {1, 0, 1, 0, 1, 0, 1, 0})});
  MultiStartConfig c = small_config(50);
  c.sample_lower = kPi;
  c.sample_upper = kPi + 1e-9;
  c.local.target = 1e-12;
  for (auto s : {AutoencoderStrategy::kLocalStructured, AutoencoderStrategy::kGlobalStructured,
                 AutoencoderStrategy::kGlobalUnstructured}) {
    const AutoencoderResult r = run_autoencoder_strategy(task, s, c, 1);
    ASSERT_TRUE(r.ok) << r.diagnostic;
    EXPECT_LE(1.0 - r.fidelity, 1e-6) << to_string(s);
  }
}

TEST(Autoencoder, LocalStrategyStagesAndRefinement) {
  const AutoencoderTask task = shipped_task();
  const AutoencoderResult r =
      run_autoencoder_strategy(task, AutoencoderStrategy::kLocalStructured, small_config(250), 11);
  ASSERT_TRUE(r.ok) << r.diagnostic;
  ASSERT_EQ(r.stages.size(), 4u);
  EXPECT_EQ(r.stages[3].name, "refine");
  // The refinement starts from the staged optimum, whose objective it shares.
  EXPECT_GE(r.stages[3].fidelity, r.stages[2].fidelity);
  EXPECT_NEAR(r.fidelity, r.stages[3].fidelity, 1e-12);
  std::size_t total = 0;
  for (const auto& s : r.stages) total += s.evaluations;
  EXPECT_EQ(total, r.evaluations);
  for (std::size_t i = 1; i < r.trace.size(); ++i) {
    EXPECT_GT(r.trace[i].evaluation, r.trace[i - 1].evaluation);
  }
}

TEST(Autoencoder, DeterministicAndNames) {
  const AutoencoderTask task = shipped_task();
  const auto a = run_autoencoder_strategy(task, AutoencoderStrategy::kGlobalStructured,
                                          small_config(150), 4);
  const auto b = run_autoencoder_strategy(task, AutoencoderStrategy::kGlobalStructured,
                                          small_config(150), 4);
  ASSERT_TRUE(a.ok);
  EXPECT_EQ(a.fidelity, b.fidelity);
  EXPECT_EQ(std::vector<double>(a.model->theta().begin(), a.model->theta().end()),
            std::vector<double>(b.model->theta().begin(), b.model->theta().end()));
  for (auto s : {AutoencoderStrategy::kLocalStructured, AutoencoderStrategy::kGlobalStructured,
                 AutoencoderStrategy::kGlobalUnstructured}) {
    EXPECT_EQ(autoencoder_strategy_from_string(to_string(s)), s);
  }
  EXPECT_THROW(autoencoder_strategy_from_string("bogus"), std::invalid_argument);
}

TEST(Autoencoder, OptimizerFailureBecomesDiagnostic) {
  MultiStartConfig c = small_config(10);
  c.starts = 0;
  const auto r =
      run_autoencoder_strategy(shipped_task(), AutoencoderStrategy::kGlobalStructured, c, 1);
  EXPECT_FALSE(r.ok);
  EXPECT_FALSE(r.diagnostic.empty());
}

// ---------------------------------------------------------------------------
// Cartpole dynamics

// Energy from the Lagrangian of a cart with a uniform rod, computed from the
// pole's centre-of-mass velocity rather than the closed form in the library.
double oracle_energy(const CartPoleConfig& c, const CartPoleState& s) {
  const double l = c.pole_half_length;
  const double vx = s.x_dot + l * std::cos(s.theta) * s.theta_dot;
  const double vy = -l * std::sin(s.theta) * s.theta_dot;
  const double inertia = c.pole_mass * l * l / 3.0;
  return 0.5 * c.cart_mass * s.x_dot * s.x_dot + 0.5 * c.pole_mass * (vx * vx + vy * vy) +
         0.5 * inertia * s.theta_dot * s.theta_dot + c.pole_mass * c.gravity * l * std::cos(s.theta);
}

CartPoleState rk4(const CartPoleConfig& c, const CartPoleState& s, double h) {
  auto deriv = [&](const CartPoleState& y) {
    const auto acc = cartpole_accelerations(c, y, 0.0);
    return std::array<double, 4>{y.x_dot, acc[0], y.theta_dot, acc[1]};
  };
  auto shift = [](const CartPoleState& y, const std::array<double, 4>& k, double f) {
    return CartPoleState{y.x + f * k[0], y.x_dot + f * k[1], y.theta + f * k[2],
                         y.theta_dot + f * k[3]};
  };
  const auto k1 = deriv(s);
  const auto k2 = deriv(shift(s, k1, h / 2));
  const auto k3 = deriv(shift(s, k2, h / 2));
  const auto k4 = deriv(shift(s, k3, h));
  std::array<double, 4> k{};
  for (std::size_t i = 0; i < 4; ++i) k[i] = (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]) / 6.0;
  return shift(s, k, h);
}

TEST(CartPole, EquilibriumHasNoAcceleration) {
  const CartPoleConfig c;
  const auto acc = cartpole_accelerations(c, {}, 0.0);
  EXPECT_EQ(acc[0], 0.0);
  EXPECT_EQ(acc[1], 0.0);
  // A push to the right tips the pole to the left.
  const auto push = cartpole_accelerations(c, {}, 10.0);
  EXPECT_GT(push[0], 0.0);
  EXPECT_LT(push[1], 0.0);
}

TEST(CartPole, EnergyMatchesOracle) {
  const CartPoleConfig c;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 50; ++i) {
    const CartPoleState s{u(rng), u(rng), u(rng), u(rng)};
    EXPECT_NEAR(cartpole_energy(c, s), oracle_energy(c, s), 1e-12);
  }
}

// Exact force-free dynamics conserve energy: integrate finely with RK4.
TEST(CartPole, EquationsOfMotionConserveEnergy) {
  const CartPoleConfig c;
  CartPoleState s{0.0, 0.2, 0.3, -0.5};
  const double e0 = oracle_energy(c, s);
  for (int i = 0; i < 60000; ++i) s = rk4(c, s, 1e-4);
  EXPECT_NEAR(oracle_energy(c, s), e0, 1e-9);
  EXPECT_GT(std::abs(s.theta), 1.0);  // the pole actually fell
}

// Explicit Euler: over 300 force-free steps of a swinging pole the drift
// stays below 1e-2 J and shrinks with the step.
TEST(CartPole, EulerDriftWithinTolerance) {
  auto drift = [](double dt, int steps) {
    CartPoleConfig c;
    c.timestep = dt;
    CartPoleState s{0.0, 0.3, kPi - 0.05, 0.0};
    const double e0 = oracle_energy(c, s);
    double worst = 0.0;
    for (int i = 0; i < steps; ++i) {
      s = cartpole_integrate(c, s, 0.0);
      worst = std::max(worst, std::abs(oracle_energy(c, s) - e0));
    }
    return worst;
  };
  const double coarse = drift(0.02, 300);
  const double fine = drift(0.01, 600);
  EXPECT_LT(coarse, 1e-2);
  EXPECT_GT(coarse / fine, 1.5);
}

TEST(CartPole, SymmetricEquilibriumPreserved) {
  CartPoleConfig c;
  c.force_magnitude = 0.0;
  CartPoleEnv env(c, {});
  int action = 1;
  while (!env.done()) {
    env.step(action);
    action = -action;
    EXPECT_EQ(env.state().theta, 0.0);
    EXPECT_EQ(env.state().x, 0.0);
  }
  EXPECT_EQ(env.steps(), c.t_max);
  EXPECT_THROW(env.step(1), std::logic_error);
}

TEST(CartPole, Termination) {
  const CartPoleConfig c;
  CartPoleEnv env(c, {2.39, 1.0, 0.0, 0.0});
  EXPECT_TRUE(env.step(1));  // x = 2.41
  EXPECT_EQ(env.steps(), 1);
  CartPoleEnv tilt(c, {0.0, 0.0, c.theta_max - 1e-4, 1.0});
  EXPECT_TRUE(tilt.step(1));
  CartPoleEnv fine(c, {});
  EXPECT_THROW(fine.step(0), std::invalid_argument);
  EXPECT_FALSE(fine.step(1));
}

TEST(CartPole, RandomInitialStateWithinHalfWidths) {
  const CartPoleConfig c;
  Rng rng(9);
  for (int i = 0; i < 200; ++i) {
    const CartPoleState s = CartPoleEnv::random(c, rng).state();
    EXPECT_LE(std::abs(s.x), c.initial_half_width.x);
    EXPECT_LE(std::abs(s.x_dot), c.initial_half_width.x_dot);
    EXPECT_LE(std::abs(s.theta), c.initial_half_width.theta);
    EXPECT_LE(std::abs(s.theta_dot), c.initial_half_width.theta_dot);
  }
}

TEST(CartPole, ConfigValidationAndJson) {
  CartPoleConfig c;
  c.t_max = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = CartPoleConfig{};
  c.pole_mass = -1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = CartPoleConfig{};
  c.force_magnitude = 3.5;
  c.initial_half_width.theta = 0.02;
  const CartPoleConfig back = cartpole_config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_THROW(cartpole_config_from_json(nlohmann::json::object()), nlohmann::json::exception);
}

// ---------------------------------------------------------------------------
// Policy

TEST(Policy, EncodingAngles) {
  const PolicyEncoding e;
  const auto lo = e.angles({-9.0, -3.0, -1.0, -3.0});
  const auto hi = e.angles({9.0, 3.0, 1.0, 3.0});
  const auto mid = e.angles({});
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_DOUBLE_EQ(lo[i], 0.0);
    EXPECT_DOUBLE_EQ(hi[i], kPi / 2);
    EXPECT_DOUBLE_EQ(mid[i], kPi / 4);
  }
  const ComplexVector v = e.logical_input({0.3, -1.0, 0.1, 2.0});
  EXPECT_NEAR(v.norm(), 1.0, 1e-14);
  // Qubit 0 (x) at its lower clip is exactly |0>.
  const ComplexVector w = e.logical_input({-2.4, 0.0, 0.0, 0.0});
  for (Eigen::Index i = 8; i < 16; ++i) EXPECT_EQ(w(i), Complex(0.0));
  PolicyEncoding bad;
  bad.upper[2] = bad.lower[2];
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  const PolicyEncoding back = policy_encoding_from_json(to_json(e));
  EXPECT_EQ(back.lower, e.lower);
  EXPECT_EQ(back.upper, e.upper);
}

TEST(Policy, DeterministicRules) {
  const QonnModel id(4, 8, 1);
  const QonnPolicy policy(id, id.identity_theta());
  Rng rng(1);
  // Photon stays in mode 0: always push left.
  const CartPoleState left{-2.4, 0.0, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(policy.left_probability(left), 1.0);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(policy.act(left, rng), -1);
  // Photon in mode 1: push right.
  const CartPoleState right{2.4, 0.0, 0.0, 0.0};
  for (int i = 0; i < 50; ++i) EXPECT_EQ(policy.act(right, rng), 1);

  // A unit fully swapping modes 1 and 2 leaves modes 0 and 1 empty for this
  // input (qubit 0 = |1>, qubit 1 = |1>): a tie, which pushes right.
  const QonnModel swap(4, 8, {MeshLayout(8, {{1, 2}})}, 0.0);
  const std::vector<double> swap_theta{0.0, 0.0};
  const QonnPolicy tie(swap, swap_theta);
  const CartPoleState s{2.4, 3.0, 0.0, 0.0};
  EXPECT_NEAR(tie.left_probability(s), 0.0, 1e-30);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(tie.act(s, rng), 1);
}

TEST(Policy, SampledActionsMatchExactMarginal) {
  QonnModel model(4, 8, 2);
  model.set_propagation(Propagation::kFactorized);
  std::mt19937_64 gen(21);
  std::vector<double> theta(model.parameter_count());
  for (auto& t : theta) t = uniform_phase(gen);
  const QonnPolicy policy(model, theta);
  const CartPoleState s{0.4, -0.7, 0.05, 1.1};
  EXPECT_NEAR(policy.output(s).norm(), 1.0, 1e-12);
  const double p = policy.left_probability(s);
  ASSERT_GT(p, 0.05);
  ASSERT_LT(p, 0.95);
  Rng rng(77);
  const int samples = 10000;
  int left = 0;
  for (int i = 0; i < samples; ++i) left += policy.act(s, rng) == -1;
  const double expected = samples * p;
  const double chi2 = (left - expected) * (left - expected) / (expected * (1.0 - p));
  EXPECT_LT(chi2, 10.83);  // one degree of freedom, p = 0.001

  // Full outcome sampling: per-outcome frequencies against |amplitude|^2,
  // pooled into the outcomes with expected count >= 5.
  const ComplexVector out = policy.output(s);
  std::vector<int> counts(static_cast<std::size_t>(out.size()), 0);
  int sampled_left = 0;
  for (int i = 0; i < samples; ++i) {
    const std::size_t k = policy.sample_outcome(s, rng);
    ++counts[k];
    sampled_left += policy.action_for(k) == -1;
  }
  double stat = 0.0;
  int cells = 0;
  double rest_expected = 0.0;
  int rest_count = 0;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const double e = samples * std::norm(out(i));
    if (e >= 5.0) {
      stat += (counts[static_cast<std::size_t>(i)] - e) * (counts[static_cast<std::size_t>(i)] - e) / e;
      ++cells;
    } else {
      rest_expected += e;
      rest_count += counts[static_cast<std::size_t>(i)];
    }
  }
  if (rest_expected > 0.0) {
    stat += (rest_count - rest_expected) * (rest_count - rest_expected) / rest_expected;
    ++cells;
  }
  ASSERT_GT(cells, 3);
  // Wilson-Hilferty upper 0.1% quantile of chi-squared with cells - 1 dof.
  const double dof = cells - 1;
  const double q = dof * std::pow(1.0 - 2.0 / (9.0 * dof) + 3.09 * std::sqrt(2.0 / (9.0 * dof)), 3);
  EXPECT_LT(stat, q);
  const double chi2_left = (sampled_left - expected) * (sampled_left - expected) / (expected * (1.0 - p));
  EXPECT_LT(chi2_left, 10.83);
}

TEST(Policy, ReproducibleActions) {
  QonnModel model(4, 8, 1);
  model.set_propagation(Propagation::kFactorized);
  std::mt19937_64 gen(4);
  std::vector<double> theta(model.parameter_count());
  for (auto& t : theta) t = uniform_phase(gen);
  const QonnPolicy policy(model, theta);
  auto actions = [&] {
    Rng rng(99);
    std::vector<int> a;
    for (int i = 0; i < 100; ++i) a.push_back(policy.act({0.1 * i / 100.0, 0.0, 0.0, 0.0}, rng));
    return a;
  };
  EXPECT_EQ(actions(), actions());
  EXPECT_THROW(QonnPolicy(QonnModel(2, 4, 1), std::vector<double>(12, kPi)),
               std::invalid_argument);
}

TEST(Episode, FitnessRangeAndDeterminism) {
  const CartPoleConfig c;
  QonnModel model(4, 8, 1);
  model.set_propagation(Propagation::kFactorized);
  const QonnPolicy policy(model, model.identity_theta());
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng a(seed);
    Rng b(seed);
    const int fa = episode_fitness(policy, c, a);
    EXPECT_EQ(fa, episode_fitness(policy, c, b));
    EXPECT_GE(fa, 1);
    EXPECT_LE(fa, c.t_max);
  }
  // A policy that never pushes balances forever at the exact equilibrium.
  CartPoleConfig still = c;
  still.force_magnitude = 0.0;
  still.initial_half_width = {};
  Rng rng(0);
  EXPECT_EQ(episode_fitness([](const CartPoleState&, Rng&) { return 1; }, still, rng), 300);
}

TEST(Episode, RandomPolicyBaseline) {
  const CartPoleConfig c;
  const std::vector<int> f = random_policy_fitness(c, 400, 2024);
  EXPECT_EQ(f, random_policy_fitness(c, 400, 2024));
  const double m = median(std::vector<double>(f.begin(), f.end()));
  EXPECT_GT(m, 5.0);
  EXPECT_LT(m, 40.0);
}

TEST(Median, Examples) {
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
  EXPECT_THROW(median({}), std::invalid_argument);
}

}  // namespace
}  // namespace qonn

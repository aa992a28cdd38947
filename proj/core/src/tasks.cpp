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

#include "qonn/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace qonn {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

ComplexVector logical_vector(int qubits, std::initializer_list<std::pair<std::size_t, Complex>> terms) {
  ComplexVector v = ComplexVector::Zero(Eigen::Index{1} << qubits);
  for (const auto& [index, amp] : terms) v(static_cast<Eigen::Index>(index)) += amp;
  return v;
}

QuantumState dual_rail(const FockBasisPtr& basis, const ComplexVector& logical) {
  return encode_dual_rail(logical, basis);
}

}  // namespace

TrainingSet benchmark_training_set(std::string_view name) {
  const double r = kInvSqrt2;
  std::vector<TrainingSet::Pair> pairs;
  if (name == "bell" || name == "cnot") {
    const FockBasisPtr basis = enumerate_basis(2, 4);
    auto basis_ket = [&](std::size_t i) { return dual_rail(basis, logical_vector(2, {{i, 1.0}})); };
    if (name == "bell") {
      const std::vector<ComplexVector> bell = {
          logical_vector(2, {{0, r}, {3, r}}), logical_vector(2, {{0, r}, {3, -r}}),
          logical_vector(2, {{1, r}, {2, r}}), logical_vector(2, {{1, r}, {2, -r}})};
      for (std::size_t i = 0; i < 4; ++i) pairs.emplace_back(dual_rail(basis, bell[i]), basis_ket(i));
    } else {
      const std::size_t image[4] = {0, 1, 3, 2};
      for (std::size_t i = 0; i < 4; ++i) pairs.emplace_back(basis_ket(i), basis_ket(image[i]));
    }
  } else if (name == "ghz") {
    const FockBasisPtr basis = enumerate_basis(3, 6);
    pairs.emplace_back(dual_rail(basis, logical_vector(3, {{0, 1.0}})),
                       dual_rail(basis, logical_vector(3, {{0, r}, {7, r}})));
  } else {
    throw std::invalid_argument("benchmark_training_set: unknown task '" + std::string(name) +
                                "'");
  }
  return TrainingSet(std::move(pairs));
}

std::vector<std::string> benchmark_names() { return {"bell", "cnot", "ghz"}; }

// ---------------------------------------------------------------------------

std::vector<H2Coefficients> h2_coefficients_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) {
    throw std::invalid_argument("h2 coefficients: expected a non-empty array");
  }
  std::vector<H2Coefficients> out;
  for (const auto& item : j) {
    H2Coefficients c;
    c.bond_length_angstrom = item.at("bond_length_angstrom").get<double>();
    c.alpha = complex_from_json(item.at("alpha"));
    c.beta = complex_from_json(item.at("beta"));
    const double norm = std::norm(c.alpha) + std::norm(c.beta);
    if (std::abs(norm - 1.0) > 1e-6) {
      throw std::invalid_argument("h2 coefficients: |alpha|^2 + |beta|^2 = " +
                                  std::to_string(norm) + " at bond length " +
                                  std::to_string(c.bond_length_angstrom));
    }
    out.push_back(c);
  }
  return out;
}

std::vector<H2Coefficients> load_h2_coefficients(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return h2_coefficients_from_json(nlohmann::json::parse(in));
}

std::string to_string(AutoencoderStrategy s) {
  switch (s) {
    case AutoencoderStrategy::kLocalStructured: return "local_structured";
    case AutoencoderStrategy::kGlobalStructured: return "global_structured";
    case AutoencoderStrategy::kGlobalUnstructured: return "global_unstructured";
  }
  return "?";
}

AutoencoderStrategy autoencoder_strategy_from_string(const std::string& name) {
  for (auto s : {AutoencoderStrategy::kLocalStructured, AutoencoderStrategy::kGlobalStructured,
                 AutoencoderStrategy::kGlobalUnstructured}) {
    if (to_string(s) == name) return s;
  }
  throw std::invalid_argument("unknown autoencoder strategy '" + name + "'");
}

AutoencoderTask AutoencoderTask::from_coefficients(
    const std::vector<H2Coefficients>& coefficients) {
  const FockBasisPtr basis = enumerate_basis(4, 8);
  std::vector<QuantumState> states;
  for (const auto& c : coefficients) {
    states.push_back(QuantumState::normalized(
        basis, encode_dual_rail(logical_vector(4, {{0b0011, c.alpha}, {0b1100, c.beta}}), basis)
                   .amplitudes()));
  }
  return from_states(std::move(states));
}

AutoencoderTask AutoencoderTask::from_states(std::vector<QuantumState> states) {
  if (states.empty()) throw std::invalid_argument("autoencoder task: no training states");
  for (const auto& s : states) {
    if (s.basis().photons() != 4 || s.basis().modes() != 8) {
      throw std::invalid_argument("autoencoder task: states must live on the (4, 8) basis");
    }
  }
  AutoencoderTask task;
  task.states = std::move(states);
  return task;
}

QonnModel structured_autoencoder_model(double phi) {
  std::vector<MeshLayout> layouts;
  for (int s = 0; s < kAutoencoderStages; ++s) {
    std::vector<int> active;
    for (int mode = 2 * s; mode < 8; ++mode) active.push_back(mode);
    for (int l = 0; l < kLayersPerStage; ++l) layouts.push_back(MeshLayout::reck_on(8, active));
  }
  QonnModel model(4, 8, std::move(layouts), phi);
  model.set_propagation(Propagation::kFactorized);
  return model;
}

QonnModel unstructured_autoencoder_model(double phi) {
  QonnModel model(4, 8, kAutoencoderStages * kLayersPerStage, phi);
  model.set_propagation(Propagation::kFactorized);
  return model;
}

double autoencoder_cost(const QonnModel& model, std::span<const double> theta,
                        const std::vector<QuantumState>& states, std::span<const int> qubits) {
  if (states.empty()) throw std::invalid_argument("autoencoder_cost: no states");
  const FockBasis& basis = *model.basis_ptr();
  ComplexMatrix batch(static_cast<Eigen::Index>(basis.size()),
                      static_cast<Eigen::Index>(states.size()));
  for (std::size_t k = 0; k < states.size(); ++k) {
    if (!(states[k].basis() == basis)) {
      throw std::invalid_argument("autoencoder_cost: state basis does not match the model");
    }
    batch.col(static_cast<Eigen::Index>(k)) = states[k].amplitudes();
  }
  model.propagate(theta, batch);
  double total = 0.0;
  for (Eigen::Index k = 0; k < batch.cols(); ++k) {
    total += reference_qubit_fidelity(basis, batch.col(k), qubits);
  }
  const double c = 1.0 - total / static_cast<double>(states.size());
  return std::clamp(c, 0.0, 1.0);
}

double autoencoder_cost(const QonnModel& model, const AutoencoderTask& task) {
  return autoencoder_cost(model, model.theta(), task.states, task.reference_qubits);
}

namespace {

// Appends the running-best trace of a multistart run, offset by `base`
// evaluations.
void append_trace(const MultiStartResult& r, std::size_t base, std::vector<TracePoint>& trace) {
  double best = trace.empty() ? std::numeric_limits<double>::infinity() : trace.back().best;
  std::size_t offset = base;
  for (const auto& start : r.starts) {
    for (const auto& p : start.result.trace) {
      if (p.best < best) {
        best = p.best;
        trace.push_back({offset + p.evaluation, p.best, p.wall_time_s});
      }
    }
    offset += start.result.evaluations;
  }
}

MultiStartConfig sliced(const MultiStartConfig& config, std::size_t begin, std::size_t count,
                        std::size_t full) {
  MultiStartConfig c = config;
  if (c.local.lower.size() == full) {
    c.local.lower.assign(config.local.lower.begin() + static_cast<std::ptrdiff_t>(begin),
                         config.local.lower.begin() + static_cast<std::ptrdiff_t>(begin + count));
    c.local.upper.assign(config.local.upper.begin() + static_cast<std::ptrdiff_t>(begin),
                         config.local.upper.begin() + static_cast<std::ptrdiff_t>(begin + count));
  }
  return c;
}

void run_global(const AutoencoderTask& task, QonnModel model, const char* stage_name,
                const MultiStartConfig& config, std::uint64_t seed, AutoencoderResult& out) {
  const Objective f = [&](std::span<const double> theta) {
    return autoencoder_cost(model, theta, task.states, task.reference_qubits);
  };
  const MultiStartResult r =
      minimize_multistart(f, model.parameter_count(), config, derive_seed(seed, "stage", 0));
  append_trace(r, out.evaluations, out.trace);
  out.evaluations += r.evaluations;
  model.set_theta(r.x);
  out.stages.push_back({stage_name, 1.0 - r.value, r.evaluations});
  out.model = std::move(model);
}

void run_local(const AutoencoderTask& task, const MultiStartConfig& config, std::uint64_t seed,
               AutoencoderResult& out) {
  QonnModel full = structured_autoencoder_model(task.phi);
  std::vector<double> theta = full.identity_theta();
  for (int s = 0; s < kAutoencoderStages; ++s) {
    const std::size_t layers = static_cast<std::size_t>(kLayersPerStage * (s + 1));
    std::vector<MeshLayout> prefix(full.layouts().begin(),
                                   full.layouts().begin() + static_cast<std::ptrdiff_t>(layers));
    QonnModel sub(4, 8, std::move(prefix), task.phi);
    sub.set_propagation(Propagation::kFactorized);
    const std::size_t begin = full.layer_offset(layers - kLayersPerStage);
    const std::size_t count = full.layer_offset(layers) - begin;
    std::vector<int> qubits(static_cast<std::size_t>(s + 1));
    std::iota(qubits.begin(), qubits.end(), 0);

    const std::vector<double> frozen(theta.begin(),
                                     theta.begin() + static_cast<std::ptrdiff_t>(begin + count));
    const Objective f = [&](std::span<const double> block) {
      std::vector<double> t = frozen;
      std::copy(block.begin(), block.end(), t.begin() + static_cast<std::ptrdiff_t>(begin));
      return autoencoder_cost(sub, t, task.states, qubits);
    };
    const MultiStartResult r =
        minimize_multistart(f, count, sliced(config, begin, count, full.parameter_count()),
                            derive_seed(seed, "stage", static_cast<std::uint64_t>(s)));
    append_trace(r, out.evaluations, out.trace);
    out.evaluations += r.evaluations;
    std::copy(r.x.begin(), r.x.end(), theta.begin() + static_cast<std::ptrdiff_t>(begin));
    out.stages.push_back({"stage" + std::to_string(s), 1.0 - r.value, r.evaluations});
  }

  const Objective f = [&](std::span<const double> t) {
    return autoencoder_cost(full, t, task.states, task.reference_qubits);
  };
  const LocalSearchResult r = minimize_local(f, theta, config.local);
  double best = out.trace.empty() ? std::numeric_limits<double>::infinity() : out.trace.back().best;
  for (const auto& p : r.trace) {
    if (p.best < best) {
      best = p.best;
      out.trace.push_back({out.evaluations + p.evaluation, p.best, p.wall_time_s});
    }
  }
  out.evaluations += r.evaluations;
  full.set_theta(r.x);
  out.stages.push_back({"refine", 1.0 - r.value, r.evaluations});
  out.model = std::move(full);
}

}  // namespace

AutoencoderResult run_autoencoder_strategy(const AutoencoderTask& task,
                                           AutoencoderStrategy strategy,
                                           const MultiStartConfig& config, std::uint64_t seed) {
  AutoencoderResult out;
  out.strategy = strategy;
  try {
    switch (strategy) {
      case AutoencoderStrategy::kLocalStructured:
        run_local(task, config, seed, out);
        break;
      case AutoencoderStrategy::kGlobalStructured:
        run_global(task, structured_autoencoder_model(task.phi), "global", config, seed, out);
        break;
      case AutoencoderStrategy::kGlobalUnstructured:
        run_global(task, unstructured_autoencoder_model(task.phi), "global", config, seed, out);
        break;
    }
    out.fidelity = 1.0 - autoencoder_cost(*out.model, task);
  } catch (const std::exception& e) {
    out.ok = false;
    out.diagnostic = e.what();
  }
  return out;
}

// ---------------------------------------------------------------------------

void CartPoleConfig::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(std::string("cartpole: ") + what + " must be positive");
    }
  };
  positive(gravity, "gravity");
  positive(cart_mass, "cart_mass");
  positive(pole_mass, "pole_mass");
  positive(pole_half_length, "pole_half_length");
  positive(timestep, "timestep");
  positive(x_max, "x_max");
  positive(theta_max, "theta_max");
  if (!(force_magnitude >= 0.0)) throw std::invalid_argument("cartpole: force_magnitude < 0");
  if (t_max < 1) throw std::invalid_argument("cartpole: t_max must be >= 1");
  for (double w : {initial_half_width.x, initial_half_width.x_dot, initial_half_width.theta,
                   initial_half_width.theta_dot}) {
    if (!(w >= 0.0)) throw std::invalid_argument("cartpole: initial half widths must be >= 0");
  }
}

std::array<double, 2> cartpole_accelerations(const CartPoleConfig& c, const CartPoleState& s,
                                             double force) {
  const double total = c.cart_mass + c.pole_mass;
  const double ml = c.pole_mass * c.pole_half_length;
  const double sin_t = std::sin(s.theta);
  const double cos_t = std::cos(s.theta);
  const double temp = (force + ml * s.theta_dot * s.theta_dot * sin_t) / total;
  const double theta_acc = (c.gravity * sin_t - cos_t * temp) /
                           (c.pole_half_length * (4.0 / 3.0 - c.pole_mass * cos_t * cos_t / total));
  const double x_acc = temp - ml * theta_acc * cos_t / total;
  return {x_acc, theta_acc};
}

CartPoleState cartpole_integrate(const CartPoleConfig& c, const CartPoleState& s, double force) {
  const auto [x_acc, theta_acc] = cartpole_accelerations(c, s, force);
  CartPoleState n;
  n.x = s.x + c.timestep * s.x_dot;
  n.x_dot = s.x_dot + c.timestep * x_acc;
  n.theta = s.theta + c.timestep * s.theta_dot;
  n.theta_dot = s.theta_dot + c.timestep * theta_acc;
  return n;
}

double cartpole_energy(const CartPoleConfig& c, const CartPoleState& s) {
  const double total = c.cart_mass + c.pole_mass;
  const double l = c.pole_half_length;
  const double m = c.pole_mass;
  return 0.5 * total * s.x_dot * s.x_dot + m * l * s.x_dot * s.theta_dot * std::cos(s.theta) +
         (2.0 / 3.0) * m * l * l * s.theta_dot * s.theta_dot + m * c.gravity * l * std::cos(s.theta);
}

CartPoleEnv::CartPoleEnv(CartPoleConfig config, CartPoleState initial)
    : config_(config), state_(initial) {
  config_.validate();
}

CartPoleEnv CartPoleEnv::random(const CartPoleConfig& config, Rng& rng) {
  const CartPoleState& w = config.initial_half_width;
  auto draw = [&rng](double half) {
    return half * (2.0 * std::generate_canonical<double, 53>(rng) - 1.0);
  };
  CartPoleState s;
  s.x = draw(w.x);
  s.x_dot = draw(w.x_dot);
  s.theta = draw(w.theta);
  s.theta_dot = draw(w.theta_dot);
  return CartPoleEnv(config, s);
}

bool CartPoleEnv::step(int action) {
  if (done_) throw std::logic_error("CartPoleEnv::step: episode already terminated");
  if (action != -1 && action != 1) throw std::invalid_argument("CartPoleEnv::step: action must be +-1");
  state_ = cartpole_integrate(config_, state_, action * config_.force_magnitude);
  ++steps_;
  done_ = std::abs(state_.x) > config_.x_max || std::abs(state_.theta) > config_.theta_max ||
          steps_ >= config_.t_max || !std::isfinite(state_.x) || !std::isfinite(state_.theta);
  return done_;
}

void PolicyEncoding::validate() const {
  for (std::size_t i = 0; i < 4; ++i) {
    if (!(upper[i] > lower[i])) {
      throw std::invalid_argument("policy encoding: every clip range needs lower < upper");
    }
  }
}

std::array<double, 4> PolicyEncoding::angles(const CartPoleState& s) const {
  const std::array<double, 4> obs{s.x, s.x_dot, s.theta, s.theta_dot};
  std::array<double, 4> g{};
  for (std::size_t i = 0; i < 4; ++i) {
    const double clipped = std::clamp(obs[i], lower[i], upper[i]);
    g[i] = 0.5 * kPi * (clipped - lower[i]) / (upper[i] - lower[i]);
  }
  return g;
}

ComplexVector PolicyEncoding::logical_input(const CartPoleState& s) const {
  const std::array<double, 4> g = angles(s);
  ComplexVector v(16);
  for (Eigen::Index idx = 0; idx < 16; ++idx) {
    double amp = 1.0;
    for (int q = 0; q < 4; ++q) {
      const bool one = (idx >> (3 - q)) & 1;
      amp *= one ? std::sin(g[static_cast<std::size_t>(q)]) : std::cos(g[static_cast<std::size_t>(q)]);
    }
    v(idx) = amp;
  }
  return v;
}

QonnPolicy::QonnPolicy(const QonnModel& model, std::span<const double> theta,
                       PolicyEncoding encoding)
    : encoding_(encoding), basis_(model.basis_ptr()) {
  encoding_.validate();
  if (basis_->photons() != 4 || basis_->modes() != 8) {
    throw std::invalid_argument("QonnPolicy: model must act on the (4, 8) basis");
  }
  transfer_ = ComplexMatrix::Zero(static_cast<Eigen::Index>(basis_->size()), 16);
  for (std::size_t j = 0; j < 16; ++j) {
    transfer_(static_cast<Eigen::Index>(basis_->index_of(dual_rail_occupation(j, 4))),
              static_cast<Eigen::Index>(j)) = 1.0;
  }
  model.propagate(theta, transfer_);
  left_.resize(basis_->size());
  ComplexMatrix left_rows = ComplexMatrix::Zero(transfer_.rows(), transfer_.cols());
  for (std::size_t i = 0; i < basis_->size(); ++i) {
    const Occupation& occ = basis_->state(i);
    left_[i] = occ[0] > occ[1];
    if (left_[i]) left_rows.row(static_cast<Eigen::Index>(i)) = transfer_.row(static_cast<Eigen::Index>(i));
  }
  // Inputs are real, so only the real part of the Gram matrix contributes.
  left_form_ = (left_rows.adjoint() * left_rows).real();
}

ComplexVector QonnPolicy::output(const CartPoleState& s) const {
  return transfer_ * encoding_.logical_input(s);
}

double QonnPolicy::left_probability(const CartPoleState& s) const {
  const Eigen::VectorXd v = encoding_.logical_input(s).real();
  return std::clamp(v.dot(left_form_ * v), 0.0, 1.0);
}

std::size_t QonnPolicy::sample_outcome(const CartPoleState& s, Rng& rng) const {
  const ComplexVector out = output(s);
  const double u = std::generate_canonical<double, 53>(rng);
  double cumulative = 0.0;
  Eigen::Index chosen = -1;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const double p = std::norm(out(i));
    if (p <= 0.0) continue;
    chosen = i;
    cumulative += p;
    if (u < cumulative) break;
  }
  if (chosen < 0) throw std::runtime_error("QonnPolicy: empty output distribution");
  return static_cast<std::size_t>(chosen);
}

int QonnPolicy::action_for(std::size_t outcome) const { return left_.at(outcome) ? -1 : 1; }

int QonnPolicy::act(const CartPoleState& s, Rng& rng) const {
  return std::generate_canonical<double, 53>(rng) < left_probability(s) ? -1 : 1;
}

int episode_fitness(const Policy& policy, const CartPoleConfig& config, Rng& rng) {
  CartPoleEnv env = CartPoleEnv::random(config, rng);
  while (!env.done()) env.step(policy(env.state(), rng));
  return env.steps();
}

int episode_fitness(const QonnPolicy& policy, const CartPoleConfig& config, Rng& rng) {
  return episode_fitness(
      [&policy](const CartPoleState& s, Rng& r) { return policy.act(s, r); }, config, rng);
}

std::vector<int> random_policy_fitness(const CartPoleConfig& config, std::size_t episodes,
                                       std::uint64_t seed) {
  const Policy coin = [](const CartPoleState&, Rng& r) {
    return std::generate_canonical<double, 53>(r) < 0.5 ? -1 : 1;
  };
  std::vector<int> out(episodes);
  for (std::size_t i = 0; i < episodes; ++i) {
    Rng rng = make_rng(seed, "random-policy", i);
    out[i] = episode_fitness(coin, config, rng);
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty input");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

nlohmann::json to_json(const CartPoleConfig& c) {
  return {{"gravity", c.gravity},
          {"cart_mass", c.cart_mass},
          {"pole_mass", c.pole_mass},
          {"pole_half_length", c.pole_half_length},
          {"timestep", c.timestep},
          {"force_magnitude", c.force_magnitude},
          {"x_max", c.x_max},
          {"theta_max", c.theta_max},
          {"t_max", c.t_max},
          {"initial_half_width",
           {{"x", c.initial_half_width.x},
            {"x_dot", c.initial_half_width.x_dot},
            {"theta", c.initial_half_width.theta},
            {"theta_dot", c.initial_half_width.theta_dot}}}};
}

CartPoleConfig cartpole_config_from_json(const nlohmann::json& j) {
  CartPoleConfig c;
  c.gravity = j.at("gravity").get<double>();
  c.cart_mass = j.at("cart_mass").get<double>();
  c.pole_mass = j.at("pole_mass").get<double>();
  c.pole_half_length = j.at("pole_half_length").get<double>();
  c.timestep = j.at("timestep").get<double>();
  c.force_magnitude = j.at("force_magnitude").get<double>();
  c.x_max = j.at("x_max").get<double>();
  c.theta_max = j.at("theta_max").get<double>();
  c.t_max = j.at("t_max").get<int>();
  const auto& w = j.at("initial_half_width");
  c.initial_half_width = {w.at("x").get<double>(), w.at("x_dot").get<double>(),
                          w.at("theta").get<double>(), w.at("theta_dot").get<double>()};
  c.validate();
  return c;
}

nlohmann::json to_json(const PolicyEncoding& e) {
  nlohmann::json j;
  const char* names[4] = {"x", "x_dot", "theta", "theta_dot"};
  for (std::size_t i = 0; i < 4; ++i) j[names[i]] = {e.lower[i], e.upper[i]};
  return j;
}

PolicyEncoding policy_encoding_from_json(const nlohmann::json& j) {
  PolicyEncoding e;
  const char* names[4] = {"x", "x_dot", "theta", "theta_dot"};
  for (std::size_t i = 0; i < 4; ++i) {
    const auto range = j.at(names[i]).get<std::array<double, 2>>();
    e.lower[i] = range[0];
    e.upper[i] = range[1];
  }
  e.validate();
  return e;
}

}  // namespace qonn

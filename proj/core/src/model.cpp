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

#include "qonn/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qonn/parallel.hpp"

namespace qonn {

int excess_photons(const Occupation& occupation) {
  int excess = 0;
  for (int k : occupation) excess += std::max(k - 1, 0);
  return excess;
}

QuantumState apply_kerr(const QuantumState& state, double phi) {
  ComplexVector amps = state.amplitudes();
  for (std::size_t i = 0; i < state.basis().size(); ++i) {
    const int excess = excess_photons(state.basis().state(i));
    if (excess != 0) amps(static_cast<Eigen::Index>(i)) *= std::polar(1.0, phi * excess);
  }
  return QuantumState(state.basis_ptr(), std::move(amps));
}

std::string to_string(Propagation p) {
  return p == Propagation::kDense ? "dense" : "factorized";
}

Propagation propagation_from_string(const std::string& name) {
  if (name == "dense") return Propagation::kDense;
  if (name == "factorized") return Propagation::kFactorized;
  throw std::invalid_argument("unknown propagation '" + name + "' (dense|factorized)");
}

TrainingSet::TrainingSet(std::vector<Pair> pairs) : pairs_(std::move(pairs)) {
  if (pairs_.empty()) throw std::invalid_argument("TrainingSet: needs at least one pair");
  const FockBasis& basis = pairs_.front().first.basis();
  const auto dim = static_cast<Eigen::Index>(basis.size());
  const auto k = static_cast<Eigen::Index>(pairs_.size());
  inputs_.resize(dim, k);
  targets_.resize(dim, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& [in, out] = pairs_[static_cast<std::size_t>(i)];
    if (!(in.basis() == basis) || !(out.basis() == basis)) {
      throw std::invalid_argument("TrainingSet: all states must share one basis");
    }
    inputs_.col(i) = in.amplitudes();
    targets_.col(i) = out.amplitudes();
  }
}

QonnModel::QonnModel(int photons, int modes, int layers, double phi)
    : QonnModel(photons, modes,
                std::vector<MeshLayout>(static_cast<std::size_t>(std::max(layers, 0)),
                                        MeshLayout::reck(modes)),
                phi) {
  if (layers < 1) throw std::invalid_argument("QonnModel: need at least one layer");
}

QonnModel::QonnModel(int photons, int modes, std::vector<MeshLayout> layer_layouts, double phi)
    : basis_(enumerate_basis(photons, modes)), layouts_(std::move(layer_layouts)), phi_(phi) {
  if (layouts_.empty()) throw std::invalid_argument("QonnModel: need at least one layer");
  offsets_.push_back(0);
  for (const auto& layout : layouts_) {
    if (layout.modes() != modes) {
      throw std::invalid_argument("QonnModel: layer layout has the wrong mode count");
    }
    offsets_.push_back(offsets_.back() + layout.phase_count());
  }
  kerr_phases_.reserve(basis_->size());
  for (const auto& occ : basis_->states()) {
    kerr_phases_.push_back(std::polar(1.0, phi_ * excess_photons(occ)));
  }
  lift_plan_ = std::make_shared<const detail::LiftPlan>(basis_);
  for (std::size_t i = 0; i < layouts_.size(); ++i) {
    std::shared_ptr<const FactorizedMesh> mesh;
    for (std::size_t j = 0; j < i; ++j) {
      if (layouts_[j] == layouts_[i]) {
        mesh = factorized_[j];
        break;
      }
    }
    if (!mesh) mesh = std::make_shared<const FactorizedMesh>(basis_, layouts_[i]);
    factorized_.push_back(std::move(mesh));
  }
  theta_ = identity_theta();
}

QonnModel QonnModel::with_connectivity(int photons, int modes, int layers,
                                       const std::vector<std::pair<int, int>>& edges,
                                       double phi) {
  if (layers < 1) throw std::invalid_argument("QonnModel: need at least one layer");
  return QonnModel(photons, modes,
                   std::vector<MeshLayout>(static_cast<std::size_t>(layers),
                                           MeshLayout::from_edges(modes, edges)),
                   phi);
}

bool QonnModel::uses_full_meshes() const {
  const MeshLayout full = MeshLayout::reck(modes());
  return std::all_of(layouts_.begin(), layouts_.end(),
                     [&](const MeshLayout& l) { return l == full; });
}

void QonnModel::check_theta(std::span<const double> theta) const {
  if (theta.size() != parameter_count()) {
    throw std::invalid_argument("QonnModel: expected " + std::to_string(parameter_count()) +
                                " parameters, got " + std::to_string(theta.size()));
  }
}

void QonnModel::set_theta(std::vector<double> theta) {
  check_theta(theta);
  theta_ = std::move(theta);
}

std::vector<double> QonnModel::identity_theta() const {
  std::vector<double> theta(parameter_count());
  for (std::size_t i = 0; i < theta.size(); i += 2) {
    theta[i] = kIdentityTheta;
    theta[i + 1] = kIdentityPhi;
  }
  return theta;
}

ComplexMatrix QonnModel::layer_unitary(std::size_t layer, std::span<const double> theta) const {
  check_theta(theta);
  return mesh_to_unitary(layouts_.at(layer),
                         theta.subspan(offsets_[layer], offsets_[layer + 1] - offsets_[layer]));
}

void QonnModel::propagate(std::span<const double> theta, ComplexMatrix& states) const {
  check_theta(theta);
  if (static_cast<std::size_t>(states.rows()) != basis_->size()) {
    throw std::invalid_argument("QonnModel::propagate: state dimension " +
                                std::to_string(states.rows()) + " does not match basis size " +
                                std::to_string(basis_->size()));
  }
  ComplexMatrix lifted;
  for (std::size_t layer = 0; layer < layouts_.size(); ++layer) {
    const auto phases = theta.subspan(offsets_[layer], offsets_[layer + 1] - offsets_[layer]);
    if (propagation_ == Propagation::kDense) {
      lift_plan_->lift(mesh_to_unitary(layouts_[layer], phases), lifted);
      states = lifted * states;
    } else {
      factorized_[layer]->apply(phases, states);
    }
    if (phi_ != 0.0) {
      for (Eigen::Index r = 0; r < states.rows(); ++r) {
        const Complex phase = kerr_phases_[static_cast<std::size_t>(r)];
        if (phase != Complex(1.0, 0.0)) states.row(r) *= phase;
      }
    }
  }
}

QuantumState forward(const QonnModel& model, const QuantumState& state) {
  if (!(state.basis() == *model.basis_ptr())) {
    throw std::invalid_argument("forward: state basis does not match the model");
  }
  ComplexMatrix column = state.amplitudes();
  model.propagate(column);
  return QuantumState(state.basis_ptr(), column.col(0));
}

double cost(const QonnModel& model, std::span<const double> theta, const TrainingSet& train,
            int jobs) {
  if (!(*train.basis_ptr() == *model.basis_ptr())) {
    throw std::invalid_argument("cost: training set basis does not match the model");
  }
  const auto k = static_cast<std::size_t>(train.inputs().cols());
  const std::size_t blocks = std::min<std::size_t>(k, static_cast<std::size_t>(std::max(jobs, 1)));
  std::vector<double> overlap(k, 0.0);
  parallel_for(blocks, static_cast<int>(blocks), [&](std::size_t b) {
    const auto begin = static_cast<Eigen::Index>(k * b / blocks);
    const auto end = static_cast<Eigen::Index>(k * (b + 1) / blocks);
    ComplexMatrix out = train.inputs().middleCols(begin, end - begin);
    model.propagate(theta, out);
    for (Eigen::Index i = 0; i < out.cols(); ++i) {
      overlap[static_cast<std::size_t>(begin + i)] =
          std::norm(train.targets().col(begin + i).dot(out.col(i)));
    }
  });
  double total = 0.0;
  for (double o : overlap) total += o;
  return std::clamp(1.0 - total / static_cast<double>(k), 0.0, 1.0);
}

double cost(const QonnModel& model, const TrainingSet& train) {
  return cost(model, model.theta(), train);
}

double mean_test_error(const QonnModel& model, const TrainingSet& test) {
  return cost(model, test);
}

double reference_qubit_fidelity(const FockBasis& basis, const ComplexVector& amplitudes,
                                std::span<const int> qubits) {
  if (basis.modes() % 2 != 0 || basis.photons() * 2 != basis.modes()) {
    throw std::invalid_argument("reference_qubit_fidelity: basis is not dual-rail (q, 2q)");
  }
  const int q = basis.photons();
  for (int k : qubits) {
    if (k < 0 || k >= q) {
      throw std::out_of_range("reference_qubit_fidelity: qubit " + std::to_string(k) +
                              " out of range for " + std::to_string(q) + " qubits");
    }
  }
  double total = 0.0;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const Occupation& occ = basis.state(i);
    const bool all_zero = std::all_of(qubits.begin(), qubits.end(), [&](int k) {
      return occ[static_cast<std::size_t>(2 * k)] == 1 &&
             occ[static_cast<std::size_t>(2 * k + 1)] == 0;
    });
    if (all_zero) total += std::norm(amplitudes(static_cast<Eigen::Index>(i)));
  }
  return std::clamp(total, 0.0, 1.0);
}

double reference_qubit_fidelity(const QuantumState& state, std::span<const int> qubits) {
  return reference_qubit_fidelity(state.basis(), state.amplitudes(), qubits);
}

nlohmann::json to_json(const QonnModel& model) {
  nlohmann::json j = {{"n", model.photons()},
                      {"m", model.modes()},
                      {"layers", model.layers()},
                      {"phi", model.phi()},
                      {"theta", std::vector<double>(model.theta().begin(), model.theta().end())},
                      {"propagation", to_string(model.propagation())}};
  if (!model.uses_full_meshes()) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& layout : model.layouts()) {
      nlohmann::json units = nlohmann::json::array();
      for (const auto& u : layout.units()) units.push_back({u.upper, u.lower});
      layers.push_back(units);
    }
    j["layer_units"] = layers;
  }
  return j;
}

QonnModel model_from_json(const nlohmann::json& j) {
  const int n = j.at("n").get<int>();
  const int m = j.at("m").get<int>();
  const int layers = j.at("layers").get<int>();
  const double phi = j.value("phi", kPi);
  std::vector<MeshLayout> layouts;
  if (j.contains("layer_units")) {
    for (const auto& layer : j.at("layer_units")) {
      std::vector<MeshUnit> units;
      for (const auto& u : layer) units.push_back({u.at(0).get<int>(), u.at(1).get<int>()});
      layouts.emplace_back(m, std::move(units));
    }
    if (static_cast<int>(layouts.size()) != layers) {
      throw std::invalid_argument("model_from_json: layer_units length differs from layers");
    }
  } else {
    if (layers < 1) throw std::invalid_argument("model_from_json: layers must be >= 1");
    layouts.assign(static_cast<std::size_t>(layers), MeshLayout::reck(m));
  }
  QonnModel model(n, m, std::move(layouts), phi);
  model.set_theta(j.at("theta").get<std::vector<double>>());
  if (j.contains("propagation")) {
    model.set_propagation(propagation_from_string(j.at("propagation").get<std::string>()));
  }
  return model;
}

nlohmann::json to_json(const TrainingSet& set) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [in, out] : set.pairs()) {
    pairs.push_back({{"input", to_json(in)}, {"output", to_json(out)}});
  }
  return pairs;
}

TrainingSet training_set_from_json(const nlohmann::json& j) {
  const nlohmann::json& pairs = j.is_object() ? j.at("pairs") : j;
  std::vector<TrainingSet::Pair> out;
  FockBasisPtr basis;
  for (const auto& p : pairs) {
    QuantumState in = state_from_json(p.at("input"), basis);
    basis = in.basis_ptr();
    QuantumState target = state_from_json(p.at("output"), basis);
    out.emplace_back(std::move(in), std::move(target));
  }
  return TrainingSet(std::move(out));
}

}  // namespace qonn

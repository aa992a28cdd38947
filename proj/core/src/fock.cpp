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

#include "qonn/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace qonn {
namespace {

void enumerate_into(int remaining, int mode, Occupation& current,
                    std::vector<Occupation>& out) {
  const int last = static_cast<int>(current.size()) - 1;
  if (mode == last) {
    current[mode] = remaining;
    out.push_back(current);
    return;
  }
  for (int k = remaining; k >= 0; --k) {
    current[mode] = k;
    enumerate_into(remaining - k, mode + 1, current, out);
  }
  current[mode] = 0;
}

}  // namespace

std::size_t fock_dimension(int n, int m) {
  if (n < 0 || m < 1) throw std::invalid_argument("fock_dimension: need n >= 0 and m >= 1");
  // C(n + m - 1, n) computed multiplicatively; exact for all bases we can store.
  std::size_t result = 1;
  for (int i = 1; i <= n; ++i) {
    result = result * static_cast<std::size_t>(m - 1 + i) / static_cast<std::size_t>(i);
  }
  return result;
}

FockBasis::FockBasis(int photons, int modes) : photons_(photons), modes_(modes) {
  if (modes < 1) throw std::invalid_argument("FockBasis: mode count must be >= 1");
  if (photons < 0) throw std::invalid_argument("FockBasis: photon count must be >= 0");
  states_.reserve(fock_dimension(photons, modes));
  Occupation current(static_cast<std::size_t>(modes), 0);
  enumerate_into(photons, 0, current, states_);
  for (std::size_t i = 0; i < states_.size(); ++i) index_.emplace(states_[i], i);
}

std::size_t FockBasis::index_of(const Occupation& occupation) const {
  auto it = index_.find(occupation);
  if (it == index_.end()) {
    throw std::out_of_range("FockBasis::index_of: occupation not in (" +
                            std::to_string(photons_) + ", " + std::to_string(modes_) +
                            ") basis");
  }
  return it->second;
}

bool FockBasis::contains(const Occupation& occupation) const {
  return index_.find(occupation) != index_.end();
}

FockBasisPtr enumerate_basis(int photons, int modes) {
  return std::make_shared<const FockBasis>(photons, modes);
}

QuantumState::QuantumState(FockBasisPtr basis, ComplexVector amplitudes)
    : basis_(std::move(basis)), amplitudes_(std::move(amplitudes)) {
  if (!basis_) throw std::invalid_argument("QuantumState: null basis");
  if (static_cast<std::size_t>(amplitudes_.size()) != basis_->size()) {
    throw std::invalid_argument("QuantumState: amplitude count " +
                                std::to_string(amplitudes_.size()) +
                                " does not match basis size " +
                                std::to_string(basis_->size()));
  }
  if (std::abs(amplitudes_.norm() - 1.0) > kNormTolerance) {
    throw std::invalid_argument("QuantumState: amplitudes are not unit norm (norm = " +
                                std::to_string(amplitudes_.norm()) + ")");
  }
}

QuantumState QuantumState::normalized(FockBasisPtr basis, ComplexVector amplitudes) {
  const double norm = amplitudes.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw std::invalid_argument("QuantumState::normalized: zero or non-finite vector");
  }
  amplitudes /= norm;
  return QuantumState(std::move(basis), std::move(amplitudes));
}

QuantumState QuantumState::basis_state(FockBasisPtr basis, const Occupation& occupation) {
  ComplexVector amps = ComplexVector::Zero(static_cast<Eigen::Index>(basis->size()));
  amps(static_cast<Eigen::Index>(basis->index_of(occupation))) = 1.0;
  return QuantumState(std::move(basis), std::move(amps));
}

double fidelity(const QuantumState& a, const QuantumState& b) {
  if (!(a.basis() == b.basis())) throw std::invalid_argument("fidelity: basis mismatch");
  return std::norm(a.amplitudes().dot(b.amplitudes()));
}

Occupation dual_rail_occupation(std::size_t logical_index, int qubits) {
  Occupation occ(static_cast<std::size_t>(2 * qubits), 0);
  for (int k = 0; k < qubits; ++k) {
    const bool one = (logical_index >> (qubits - 1 - k)) & 1U;
    occ[static_cast<std::size_t>(2 * k + (one ? 1 : 0))] = 1;
  }
  return occ;
}

int qubits_for_dimension(std::size_t dimension) {
  int q = 0;
  while ((std::size_t{1} << q) < dimension) ++q;
  if ((std::size_t{1} << q) != dimension || dimension < 2) {
    throw std::invalid_argument("dimension " + std::to_string(dimension) +
                                " is not 2^q for q >= 1");
  }
  return q;
}

QuantumState encode_dual_rail(const ComplexVector& logical, FockBasisPtr basis) {
  const int q = qubits_for_dimension(static_cast<std::size_t>(logical.size()));
  if (std::abs(logical.norm() - 1.0) > QuantumState::kNormTolerance) {
    throw std::invalid_argument("encode_dual_rail: logical amplitudes are not unit norm");
  }
  if (!basis) basis = enumerate_basis(q, 2 * q);
  if (basis->photons() != q || basis->modes() != 2 * q) {
    throw std::invalid_argument("encode_dual_rail: basis is not (q, 2q)");
  }
  ComplexVector amps = ComplexVector::Zero(static_cast<Eigen::Index>(basis->size()));
  for (Eigen::Index i = 0; i < logical.size(); ++i) {
    amps(static_cast<Eigen::Index>(
        basis->index_of(dual_rail_occupation(static_cast<std::size_t>(i), q)))) = logical(i);
  }
  return QuantumState(std::move(basis), std::move(amps));
}

DualRailDecoding decode_dual_rail(const QuantumState& state, int qubits) {
  if (qubits < 1 || state.basis().photons() != qubits || state.basis().modes() != 2 * qubits) {
    throw std::invalid_argument("decode_dual_rail: state basis is not (q, 2q) for q = " +
                                std::to_string(qubits));
  }
  const std::size_t dim = std::size_t{1} << qubits;
  DualRailDecoding out;
  out.logical = ComplexVector::Zero(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    out.logical(static_cast<Eigen::Index>(i)) =
        state.amplitude(dual_rail_occupation(i, qubits));
  }
  out.leakage = std::clamp(1.0 - out.logical.squaredNorm(), 0.0, 1.0);
  return out;
}

nlohmann::json complex_to_json(Complex value) {
  return nlohmann::json::array({value.real(), value.imag()});
}

Complex complex_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) {
    throw std::invalid_argument("complex value must be a [re, im] array");
  }
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

nlohmann::json to_json(const QuantumState& state) {
  nlohmann::json amps = nlohmann::json::array();
  for (Eigen::Index i = 0; i < state.amplitudes().size(); ++i) {
    amps.push_back(complex_to_json(state.amplitudes()(i)));
  }
  return {{"n", state.basis().photons()}, {"m", state.basis().modes()}, {"amplitudes", amps}};
}

QuantumState state_from_json(const nlohmann::json& j, FockBasisPtr basis) {
  const int n = j.at("n").get<int>();
  const int m = j.at("m").get<int>();
  if (!basis) {
    basis = enumerate_basis(n, m);
  } else if (basis->photons() != n || basis->modes() != m) {
    throw std::invalid_argument("state_from_json: state (" + std::to_string(n) + ", " +
                                std::to_string(m) + ") does not match the expected basis");
  }
  const auto& arr = j.at("amplitudes");
  if (arr.size() != basis->size()) {
    throw std::invalid_argument("state_from_json: amplitude count does not match basis size");
  }
  ComplexVector amps(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    amps(static_cast<Eigen::Index>(i)) = complex_from_json(arr[i]);
  }
  return QuantumState(std::move(basis), std::move(amps));
}

}  // namespace qonn

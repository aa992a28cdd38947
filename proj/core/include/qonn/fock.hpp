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

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace qonn {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

/// Photon counts per optical mode.
using Occupation = std::vector<int>;

/// Number of ways to place n indistinguishable photons in m modes,
/// C(n + m - 1, n).
std::size_t fock_dimension(int n, int m);

/// The fixed-photon-number Fock basis for n photons in m modes.
///
/// States are ordered lexicographically descending, so (n, 0, ..., 0) is
/// index 0 and (0, ..., 0, n) is the last index. The basis is immutable and
/// is normally shared through `FockBasisPtr`.
class FockBasis {
 public:
  FockBasis(int photons, int modes);

  int photons() const { return photons_; }
  int modes() const { return modes_; }
  std::size_t size() const { return states_.size(); }

  const Occupation& state(std::size_t index) const { return states_.at(index); }
  const std::vector<Occupation>& states() const { return states_; }

  /// Index of an occupation vector; throws std::out_of_range when absent.
  std::size_t index_of(const Occupation& occupation) const;
  bool contains(const Occupation& occupation) const;

  bool operator==(const FockBasis& other) const {
    return photons_ == other.photons_ && modes_ == other.modes_;
  }

 private:
  int photons_;
  int modes_;
  std::vector<Occupation> states_;
  std::map<Occupation, std::size_t> index_;
};

using FockBasisPtr = std::shared_ptr<const FockBasis>;

/// Enumerates the (n, m) basis. Rejects m < 1 or n < 0.
FockBasisPtr enumerate_basis(int photons, int modes);

/// A pure state: a unit-norm amplitude vector over a Fock basis.
class QuantumState {
 public:
  static constexpr double kNormTolerance = 1e-10;

  /// Validates that `amplitudes` matches the basis size and has unit norm.
  QuantumState(FockBasisPtr basis, ComplexVector amplitudes);

  /// Rescales to unit norm before construction. Rejects the zero vector.
  static QuantumState normalized(FockBasisPtr basis, ComplexVector amplitudes);
  /// |occupation> with amplitude one.
  static QuantumState basis_state(FockBasisPtr basis, const Occupation& occupation);

  const FockBasis& basis() const { return *basis_; }
  const FockBasisPtr& basis_ptr() const { return basis_; }
  const ComplexVector& amplitudes() const { return amplitudes_; }
  Complex amplitude(const Occupation& occupation) const {
    return amplitudes_(static_cast<Eigen::Index>(basis_->index_of(occupation)));
  }

 private:
  FockBasisPtr basis_;
  ComplexVector amplitudes_;
};

/// |<a|b>|^2. Both states must live on the same basis.
double fidelity(const QuantumState& a, const QuantumState& b);

/// Dual-rail qubit k occupies modes (2k, 2k + 1); a photon in mode 2k is
/// logical |0>, a photon in mode 2k + 1 is logical |1>. Qubit 0 is the most
/// significant bit of a computational-basis index.
Occupation dual_rail_occupation(std::size_t logical_index, int qubits);

/// Maps a unit-norm vector over the 2^q computational basis onto the (q, 2q)
/// Fock basis. `basis` may be passed to share an existing (q, 2q) basis.
QuantumState encode_dual_rail(const ComplexVector& logical, FockBasisPtr basis = nullptr);

struct DualRailDecoding {
  /// Unnormalized amplitudes on the 2^q dual-rail configurations.
  ComplexVector logical;
  /// Probability outside the dual-rail subspace, in [0, 1].
  double leakage = 0.0;
};

DualRailDecoding decode_dual_rail(const QuantumState& state, int qubits);

/// Number of qubits q such that 2^q == dimension; throws otherwise.
int qubits_for_dimension(std::size_t dimension);

// JSON: {"n": .., "m": .., "amplitudes": [[re, im], ...]} in basis order.
nlohmann::json to_json(const QuantumState& state);
QuantumState state_from_json(const nlohmann::json& j, FockBasisPtr basis = nullptr);

nlohmann::json complex_to_json(Complex value);
Complex complex_from_json(const nlohmann::json& j);

}  // namespace qonn

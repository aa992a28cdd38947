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
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "qonn/fock.hpp"

namespace qonn {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// A Mach-Zehnder unit between two modes, `upper` < `lower`.
struct MeshUnit {
  int upper = 0;
  int lower = 1;
  bool operator==(const MeshUnit&) const = default;
};

/// 2x2 transfer matrix of one unit: a phase shifter `phi` on the upper input,
/// then a 50:50 splitter, internal phase `theta` on the upper arm, and a
/// second 50:50 splitter. Splitters are (1/sqrt2)[[1, i], [i, 1]].
///
///   T(theta, phi) = i e^{i theta/2} [[sin(theta/2), cos(theta/2)],
///                                    [cos(theta/2), -sin(theta/2)]] diag(e^{i phi}, 1)
///
/// T(pi, pi) is the identity; T(pi/2, 0) = e^{3 i pi/4} H with H the
/// balanced (Hadamard) splitter.
ComplexMatrix mzi_matrix(double theta, double phi);

inline constexpr double kIdentityTheta = kPi;
inline constexpr double kIdentityPhi = kPi;

/// Ordered list of units. Units act on the input in list order, so the mesh
/// unitary is T_last ... T_first. Each unit consumes two consecutive phases
/// (theta, phi).
class MeshLayout {
 public:
  MeshLayout() = default;
  MeshLayout(int modes, std::vector<MeshUnit> units);

  /// Triangular (Reck) mesh over all modes: diagonal d = 0..m-2 applies
  /// units (d, d+1), (d-1, d), ..., (0, 1). m(m-1)/2 units.
  static MeshLayout reck(int modes);
  /// Triangular mesh over a subset of modes; units couple neighbours in the
  /// sorted subset. Other modes pass through untouched.
  static MeshLayout reck_on(int modes, std::vector<int> active_modes);
  /// Units restricted to the listed couplings, cycled in order until
  /// m(m-1)/2 units are placed so the phase count matches a full mesh.
  static MeshLayout from_edges(int modes, const std::vector<std::pair<int, int>>& edges);

  int modes() const { return modes_; }
  const std::vector<MeshUnit>& units() const { return units_; }
  std::size_t phase_count() const { return 2 * units_.size(); }
  bool is_full_reck() const { return *this == reck(modes_); }

  bool operator==(const MeshLayout&) const = default;

 private:
  int modes_ = 0;
  std::vector<MeshUnit> units_;
};

/// Phases for one mesh. Phases are unconstrained reals; they are wrapped
/// into (0, 2pi] only when serialized.
struct MeshParams {
  MeshLayout layout;
  std::vector<double> phases;

  MeshParams() = default;
  MeshParams(MeshLayout layout, std::vector<double> phases);

  int modes() const { return layout.modes(); }
  /// Full Reck mesh with every unit at the identity point.
  static MeshParams identity(int modes);
};

/// Ordered product of unit matrices, an m x m unitary.
ComplexMatrix mesh_to_unitary(const MeshLayout& layout, std::span<const double> phases);
ComplexMatrix mesh_to_unitary(const MeshParams& params);

/// I.i.d. uniform phases on (0, 2pi] for a full Reck mesh. Requires m >= 2.
MeshParams random_mesh(int modes, std::uint64_t seed);

/// Representative of `phase` modulo 2pi in (0, 2pi].
double wrap_phase(double phase);

nlohmann::json to_json(const MeshParams& params);
MeshParams mesh_from_json(const nlohmann::json& j);

namespace detail {

/// Per-basis data reused across lifts: repeated-mode lists and the
/// 1/sqrt(prod occ!) normalisation of every basis state.
struct LiftPlan {
  explicit LiftPlan(FockBasisPtr basis);

  FockBasisPtr basis;
  std::vector<std::vector<Eigen::Index>> modes_of;
  std::vector<double> inv_sqrt_norm;

  /// Writes the lift of `unitary` into `entries` (resized as needed).
  void lift(const ComplexMatrix& unitary, ComplexMatrix& entries, int jobs = 1) const;
};

}  // namespace detail

/// Multi-photon transfer matrix of a linear-optical unitary on a fixed-n
/// Fock basis.
struct TransferMatrix {
  FockBasisPtr basis;
  ComplexMatrix entries;
};

/// Entry (T, S) = perm(U[T, S]) / sqrt(prod T! prod S!). Rejects a
/// non-unitary U (Frobenius deviation of U^dagger U from I above 1e-8) and a
/// basis whose mode count differs from U. `jobs` > 1 splits output rows
/// across threads.
TransferMatrix lift_to_fock(const ComplexMatrix& unitary, FockBasisPtr basis, int jobs = 1);

/// ||M^dagger M - I||_F.
double unitarity_deviation(const ComplexMatrix& matrix);

/// Applies a mesh unit by unit to a batch of Fock-space column vectors.
///
/// Each unit only mixes amplitudes that differ in the occupation of its two
/// modes, so its action on a k-photon pair sector is the k-photon lift of
/// the 2x2 unit matrix. This is equivalent to multiplying by the full lift of
/// the mesh unitary but costs O(units * dim * n) per vector instead of
/// O(dim^2) plus dim^2 permanents.
class FactorizedMesh {
 public:
  FactorizedMesh(FockBasisPtr basis, MeshLayout layout);

  const MeshLayout& layout() const { return layout_; }
  const FockBasisPtr& basis() const { return basis_; }

  /// states: basis-size x K matrix whose columns are updated in place.
  void apply(std::span<const double> phases, ComplexMatrix& states) const;

 private:
  struct PairSectors {
    // sector_indices[k] holds groups of k + 1 basis indices, flattened; within
    // a group the upper-mode count runs k, k-1, ..., 0.
    std::vector<std::vector<int>> sector_indices;
  };

  FockBasisPtr basis_;
  MeshLayout layout_;
  std::vector<double> sqrt_factorial_;
  std::vector<std::shared_ptr<const PairSectors>> unit_sectors_;
};

}  // namespace qonn

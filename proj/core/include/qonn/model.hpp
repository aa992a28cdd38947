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

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qonn/fock.hpp"
#include "qonn/interferometer.hpp"

namespace qonn {

/// Number of photons beyond the first in each mode, summed over modes.
int excess_photons(const Occupation& occupation);

/// Single-mode Kerr layer on every mode: the amplitude of |S> is multiplied by
/// exp(i phi sum_j max(S_j - 1, 0)).
QuantumState apply_kerr(const QuantumState& state, double phi);

/// How a linear layer acts on Fock-space vectors. Both give the same result
/// to rounding; kDense builds the full permanent-based transfer matrix per
/// layer, kFactorized applies the mesh unit by unit.
enum class Propagation { kDense, kFactorized };

std::string to_string(Propagation p);
Propagation propagation_from_string(const std::string& name);

/// K input/target pairs on a shared basis, stored column-wise for batched
/// evaluation.
class TrainingSet {
 public:
  using Pair = std::pair<QuantumState, QuantumState>;

  explicit TrainingSet(std::vector<Pair> pairs);

  std::size_t size() const { return pairs_.size(); }
  const std::vector<Pair>& pairs() const { return pairs_; }
  const FockBasisPtr& basis_ptr() const { return pairs_.front().first.basis_ptr(); }
  const ComplexMatrix& inputs() const { return inputs_; }
  const ComplexMatrix& targets() const { return targets_; }

 private:
  std::vector<Pair> pairs_;
  ComplexMatrix inputs_;
  ComplexMatrix targets_;
};

/// Layered network S(Theta) = prod_i Sigma(phi) U(theta_i): each layer applies
/// its mesh, then the Kerr layer on every mode.
///
/// By default every layer is a full Reck mesh, so Theta holds N m(m-1)
/// phases, layer i occupying the i-th contiguous block. Custom per-layer
/// layouts (a subset of modes or restricted couplings) change the block
/// sizes accordingly.
class QonnModel {
 public:
  QonnModel(int photons, int modes, int layers, double phi = kPi);
  QonnModel(int photons, int modes, std::vector<MeshLayout> layer_layouts, double phi = kPi);

  /// Every layer restricted to the given mode couplings.
  static QonnModel with_connectivity(int photons, int modes, int layers,
                                     const std::vector<std::pair<int, int>>& edges,
                                     double phi = kPi);

  int photons() const { return basis_->photons(); }
  int modes() const { return basis_->modes(); }
  int layers() const { return static_cast<int>(layouts_.size()); }
  double phi() const { return phi_; }
  const FockBasisPtr& basis_ptr() const { return basis_; }
  const std::vector<MeshLayout>& layouts() const { return layouts_; }
  bool uses_full_meshes() const;

  std::size_t parameter_count() const { return offsets_.back(); }
  std::span<const double> theta() const { return theta_; }
  void set_theta(std::vector<double> theta);
  /// Offset of layer i's phases inside Theta; offset(layers()) == size.
  std::size_t layer_offset(std::size_t layer) const { return offsets_.at(layer); }
  /// Every unit at its identity point.
  std::vector<double> identity_theta() const;

  Propagation propagation() const { return propagation_; }
  void set_propagation(Propagation p) { propagation_ = p; }

  /// m x m unitary of layer `layer` for the parameter vector `theta`.
  ComplexMatrix layer_unitary(std::size_t layer, std::span<const double> theta) const;

  /// Applies S(theta) to every column of `states` in place.
  void propagate(std::span<const double> theta, ComplexMatrix& states) const;
  void propagate(ComplexMatrix& states) const { propagate(theta_, states); }

 private:
  void check_theta(std::span<const double> theta) const;

  FockBasisPtr basis_;
  std::vector<MeshLayout> layouts_;
  double phi_;
  std::vector<double> theta_;
  std::vector<std::size_t> offsets_;
  Propagation propagation_ = Propagation::kDense;
  std::vector<Complex> kerr_phases_;
  std::shared_ptr<const detail::LiftPlan> lift_plan_;
  std::vector<std::shared_ptr<const FactorizedMesh>> factorized_;
};

/// S(Theta)|state> using the model's stored parameters.
QuantumState forward(const QonnModel& model, const QuantumState& state);

/// 1 - (1/K) sum_i |<target_i| S(theta) |input_i>|^2, in [0, 1]. With
/// `jobs` > 1 the K pairs are split across threads; the result does not
/// depend on the job count.
double cost(const QonnModel& model, std::span<const double> theta, const TrainingSet& train,
            int jobs = 1);
double cost(const QonnModel& model, const TrainingSet& train);

/// Same formula as `cost`, evaluated on held-out pairs.
double mean_test_error(const QonnModel& model, const TrainingSet& test);

/// Probability that every listed dual-rail qubit is found as logical |0>
/// (one photon in mode 2k, none in mode 2k + 1), marginalised over all other
/// modes. Requires a (q, 2q) basis.
double reference_qubit_fidelity(const QuantumState& state, std::span<const int> qubits);
double reference_qubit_fidelity(const FockBasis& basis, const ComplexVector& amplitudes,
                                std::span<const int> qubits);

// Checkpoint format: {"n", "m", "layers", "phi", "theta": [...]}, plus
// "propagation" and, for non-default meshes, "layer_units".
nlohmann::json to_json(const QonnModel& model);
QonnModel model_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TrainingSet& set);
TrainingSet training_set_from_json(const nlohmann::json& j);

}  // namespace qonn

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
#include <utility>
#include <vector>

#include "qonn/fock.hpp"
#include "qonn/model.hpp"
#include "qonn/rng.hpp"

namespace qonn {

using Edge = std::pair<int, int>;

/// Transverse-field Ising chain H = B sum_i X_i + J sum_<i,j> Z_i Z_j.
/// Qubit 0 is the most significant bit of the computational index.
struct IsingSpec {
  int spins = 2;
  double B = 1.0;
  double J = 1.0;
  std::vector<Edge> couplings = {{0, 1}};
  double t = 1.0;

  /// Open nearest-neighbour chain (0,1), (1,2), ..., (n-2, n-1).
  static IsingSpec chain(int spins, double B, double J, double t);
  void validate() const;
};

/// H = omega sum n_i - t_hop sum_<i,j> (b_i^dag b_j + b_j^dag b_i) + U/2 sum n_i (n_i - 1).
struct BoseHubbardSpec {
  int photons = 2;
  int sites = 4;
  double omega = 0.0;
  double t_hop = 1.0;
  double U = 0.0;
  std::vector<Edge> edges = square_plaquette();
  double t = 1.0;

  /// 2x2 square lattice on sites 0..3: (0,1), (1,3), (3,2), (2,0).
  static std::vector<Edge> square_plaquette();
  void validate() const;
};

ComplexMatrix ising_matrix(const IsingSpec& spec);
ComplexMatrix bose_hubbard_matrix(const BoseHubbardSpec& spec, const FockBasis& basis);

/// exp(-i H t) by eigendecomposition. Rejects H with ||H - H^dag||_max > 1e-10.
ComplexMatrix evolution_operator(const ComplexMatrix& hamiltonian, double t);
ComplexVector evolve_exact(const ComplexMatrix& hamiltonian, double t, const ComplexVector& psi);

/// Normalised vector of i.i.d. complex standard normals (Haar measure).
ComplexVector haar_random_state(Eigen::Index dimension, Rng& rng);

struct TrainTestSets {
  TrainingSet train;
  TrainingSet test;
};

/// K_train + K_test Haar-random n-qubit states, evolved under exp(-i H t) and
/// dual-rail encoded on the (n, 2n) basis. Sample i draws from substream
/// "train-data"[i] of `seed`, train samples first.
TrainTestSets make_ising_training_data(const IsingSpec& spec, std::size_t k_train,
                                       std::size_t k_test, std::uint64_t seed, int jobs = 1);
/// Same, with Haar-random states on the full (n, m) Fock basis.
TrainTestSets make_bh_training_data(const BoseHubbardSpec& spec, std::size_t k_train,
                                    std::size_t k_test, std::uint64_t seed, int jobs = 1);

nlohmann::json to_json(const IsingSpec& spec);
IsingSpec ising_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BoseHubbardSpec& spec);
BoseHubbardSpec bose_hubbard_spec_from_json(const nlohmann::json& j);

/// {"provenance": {...}, "pairs": [{input, output}, ...]}.
nlohmann::json training_set_document(const TrainingSet& set, const nlohmann::json& provenance);

}  // namespace qonn

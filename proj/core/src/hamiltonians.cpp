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
#include "qonn/hamiltonians.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>

#include "qonn/parallel.hpp"

namespace qonn {
namespace {

constexpr double kHermitianTolerance = 1e-10;

void check_edges(const std::vector<Edge>& edges, int count, const char* what) {
  for (const auto& [a, b] : edges) {
    if (a < 0 || b < 0 || a >= count || b >= count || a == b) {
      throw std::invalid_argument(std::string(what) + ": edge (" + std::to_string(a) + ", " +
                                  std::to_string(b) + ") is invalid for " +
                                  std::to_string(count) + " sites");
    }
  }
}

TrainTestSets sample_pairs(const ComplexMatrix& evolution, Eigen::Index dimension,
                           std::size_t k_train, std::size_t k_test, std::uint64_t seed, int jobs,
                           const std::function<QuantumState(const ComplexVector&)>& embed) {
  if (k_train < 1 || k_test < 1) {
    throw std::invalid_argument("training data: need at least one train and one test pair");
  }
  const std::size_t total = k_train + k_test;
  std::vector<std::optional<TrainingSet::Pair>> pairs(total);
  parallel_for(total, jobs, [&](std::size_t i) {
    Rng rng = make_rng(seed, "train-data", i);
    const ComplexVector in = haar_random_state(dimension, rng);
    ComplexVector out = evolution * in;
    out.normalize();
    pairs[i].emplace(embed(in), embed(out));
  });
  std::vector<TrainingSet::Pair> train, test;
  for (std::size_t i = 0; i < total; ++i) {
    (i < k_train ? train : test).push_back(std::move(*pairs[i]));
  }
  return {TrainingSet(std::move(train)), TrainingSet(std::move(test))};
}

nlohmann::json edges_to_json(const std::vector<Edge>& edges) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [a, b] : edges) out.push_back({a, b});
  return out;
}

std::vector<Edge> edges_from_json(const nlohmann::json& j) {
  std::vector<Edge> out;
  for (const auto& e : j) out.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  return out;
}

}  // namespace

IsingSpec IsingSpec::chain(int spins, double B, double J, double t) {
  IsingSpec spec;
  spec.spins = spins;
  spec.B = B;
  spec.J = J;
  spec.t = t;
  spec.couplings.clear();
  for (int i = 0; i + 1 < spins; ++i) spec.couplings.emplace_back(i, i + 1);
  return spec;
}

void IsingSpec::validate() const {
  if (spins < 1) throw std::invalid_argument("IsingSpec: need at least one spin");
  if (spins > 12) throw std::invalid_argument("IsingSpec: at most 12 spins supported");
  check_edges(couplings, spins, "IsingSpec");
}

std::vector<Edge> BoseHubbardSpec::square_plaquette() { return {{0, 1}, {1, 3}, {3, 2}, {2, 0}}; }

void BoseHubbardSpec::validate() const {
  if (sites < 1 || photons < 0) throw std::invalid_argument("BoseHubbardSpec: invalid (n, m)");
  check_edges(edges, sites, "BoseHubbardSpec");
}

ComplexMatrix ising_matrix(const IsingSpec& spec) {
  spec.validate();
  const int n = spec.spins;
  const Eigen::Index dim = Eigen::Index{1} << n;
  ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
  auto bit = [n](Eigen::Index index, int qubit) { return (index >> (n - 1 - qubit)) & 1; };
  for (Eigen::Index s = 0; s < dim; ++s) {
    for (int q = 0; q < n; ++q) h(s ^ (Eigen::Index{1} << (n - 1 - q)), s) += spec.B;
    for (const auto& [a, b] : spec.couplings) {
      h(s, s) += spec.J * (bit(s, a) == bit(s, b) ? 1.0 : -1.0);
    }
  }
  return h;
}

ComplexMatrix bose_hubbard_matrix(const BoseHubbardSpec& spec, const FockBasis& basis) {
  spec.validate();
  if (basis.photons() != spec.photons || basis.modes() != spec.sites) {
    throw std::invalid_argument("bose_hubbard_matrix: basis does not match (n, m) of the spec");
  }
  const auto dim = static_cast<Eigen::Index>(basis.size());
  ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
  for (Eigen::Index s = 0; s < dim; ++s) {
    const Occupation& occ = basis.state(static_cast<std::size_t>(s));
    double diag = 0.0;
    for (int k : occ) diag += spec.omega * k + 0.5 * spec.U * k * (k - 1);
    h(s, s) = diag;
    for (const auto& [i, j] : spec.edges) {
      // b_i^dag b_j and b_j^dag b_i.
      for (const auto& [to, from] : {Edge{i, j}, Edge{j, i}}) {
        const auto f = static_cast<std::size_t>(from);
        const auto t = static_cast<std::size_t>(to);
        if (occ[f] == 0) continue;
        Occupation moved = occ;
        --moved[f];
        ++moved[t];
        const double element = std::sqrt(static_cast<double>((occ[t] + 1) * occ[f]));
        h(static_cast<Eigen::Index>(basis.index_of(moved)), s) -= spec.t_hop * element;
      }
    }
  }
  return h;
}

ComplexMatrix evolution_operator(const ComplexMatrix& hamiltonian, double t) {
  if (hamiltonian.rows() != hamiltonian.cols()) {
    throw std::invalid_argument("evolution_operator: Hamiltonian is not square");
  }
  const double asym = (hamiltonian - hamiltonian.adjoint()).cwiseAbs().maxCoeff();
  if (!(asym <= kHermitianTolerance)) {
    throw std::invalid_argument("evolution_operator: Hamiltonian is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(hamiltonian);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("evolution_operator: eigendecomposition failed");
  }
  ComplexVector phases(eig.eigenvalues().size());
  for (Eigen::Index i = 0; i < phases.size(); ++i) {
    phases(i) = std::polar(1.0, -eig.eigenvalues()(i) * t);
  }
  return eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
}

ComplexVector evolve_exact(const ComplexMatrix& hamiltonian, double t, const ComplexVector& psi) {
  if (psi.size() != hamiltonian.rows()) {
    throw std::invalid_argument("evolve_exact: state dimension does not match the Hamiltonian");
  }
  return evolution_operator(hamiltonian, t) * psi;
}

ComplexVector haar_random_state(Eigen::Index dimension, Rng& rng) {
  std::normal_distribution<double> g;
  ComplexVector v(dimension);
  for (Eigen::Index i = 0; i < dimension; ++i) {
    const double re = g(rng);
    const double im = g(rng);
    v(i) = Complex(re, im);
  }
  return v / v.norm();
}

TrainTestSets make_ising_training_data(const IsingSpec& spec, std::size_t k_train,
                                       std::size_t k_test, std::uint64_t seed, int jobs) {
  const ComplexMatrix evolution = evolution_operator(ising_matrix(spec), spec.t);
  const FockBasisPtr basis = enumerate_basis(spec.spins, 2 * spec.spins);
  return sample_pairs(evolution, evolution.rows(), k_train, k_test, seed, jobs,
                      [&](const ComplexVector& v) { return encode_dual_rail(v, basis); });
}

TrainTestSets make_bh_training_data(const BoseHubbardSpec& spec, std::size_t k_train,
                                    std::size_t k_test, std::uint64_t seed, int jobs) {
  const FockBasisPtr basis = enumerate_basis(spec.photons, spec.sites);
  const ComplexMatrix evolution = evolution_operator(bose_hubbard_matrix(spec, *basis), spec.t);
  return sample_pairs(evolution, evolution.rows(), k_train, k_test, seed, jobs,
                      [&](const ComplexVector& v) { return QuantumState(basis, v); });
}

nlohmann::json to_json(const IsingSpec& spec) {
  return {{"spins", spec.spins}, {"B", spec.B},
          {"J", spec.J},         {"couplings", edges_to_json(spec.couplings)},
          {"t", spec.t}};
}

IsingSpec ising_spec_from_json(const nlohmann::json& j) {
  IsingSpec spec = IsingSpec::chain(j.at("spins").get<int>(), j.at("B").get<double>(),
                                    j.at("J").get<double>(), j.at("t").get<double>());
  if (j.contains("couplings")) spec.couplings = edges_from_json(j.at("couplings"));
  spec.validate();
  return spec;
}

nlohmann::json to_json(const BoseHubbardSpec& spec) {
  return {{"photons", spec.photons}, {"sites", spec.sites}, {"omega", spec.omega},
          {"t_hop", spec.t_hop},     {"U", spec.U},         {"edges", edges_to_json(spec.edges)},
          {"t", spec.t}};
}

BoseHubbardSpec bose_hubbard_spec_from_json(const nlohmann::json& j) {
  BoseHubbardSpec spec;
  spec.photons = j.at("photons").get<int>();
  spec.sites = j.at("sites").get<int>();
  spec.omega = j.at("omega").get<double>();
  spec.t_hop = j.at("t_hop").get<double>();
  spec.U = j.at("U").get<double>();
  spec.edges = edges_from_json(j.at("edges"));
  spec.t = j.at("t").get<double>();
  spec.validate();
  return spec;
}

nlohmann::json training_set_document(const TrainingSet& set, const nlohmann::json& provenance) {
  return {{"provenance", provenance}, {"pairs", to_json(set)}};
}

}  // namespace qonn

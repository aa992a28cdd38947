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

#include "qonn/interferometer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>
#include <string>

#include "qonn/parallel.hpp"
#include "qonn/permanent.hpp"
#include "qonn/rng.hpp"

namespace qonn {
namespace {

constexpr double kLiftUnitarityTolerance = 1e-8;

double factorial_product(const Occupation& occ) {
  double prod = 1.0;
  for (int k : occ) {
    for (int i = 2; i <= k; ++i) prod *= i;
  }
  return prod;
}

// Mode list with mode j repeated occ[j] times.
std::vector<Eigen::Index> repeated_modes(const Occupation& occ) {
  std::vector<Eigen::Index> out;
  for (std::size_t j = 0; j < occ.size(); ++j) {
    for (int r = 0; r < occ[j]; ++r) out.push_back(static_cast<Eigen::Index>(j));
  }
  return out;
}

// Fills rows [row_begin, row_end) of `entries`.
void lift_rows(const ComplexMatrix& unitary, const detail::LiftPlan& plan, std::size_t row_begin,
               std::size_t row_end, ComplexMatrix& entries) {
  const auto n = static_cast<Eigen::Index>(plan.basis->photons());
  const std::size_t dim = plan.basis->size();
  ComplexMatrix sub(n, n);
  for (std::size_t t = row_begin; t < row_end; ++t) {
    const auto& rows = plan.modes_of[t];
    for (std::size_t s = 0; s < dim; ++s) {
      const auto& cols = plan.modes_of[s];
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
          sub(i, j) = unitary(rows[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]);
        }
      }
      entries(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(s)) =
          permanent_ryser(sub) * (plan.inv_sqrt_norm[t] * plan.inv_sqrt_norm[s]);
    }
  }
}

}  // namespace

ComplexMatrix mzi_matrix(double theta, double phi) {
  const Complex global = Complex(0.0, 1.0) * std::polar(1.0, 0.5 * theta);
  const double s = std::sin(0.5 * theta);
  const double c = std::cos(0.5 * theta);
  const Complex ext = std::polar(1.0, phi);
  ComplexMatrix t(2, 2);
  t << global * s * ext, global * c, global * c * ext, -global * s;
  return t;
}

MeshLayout::MeshLayout(int modes, std::vector<MeshUnit> units)
    : modes_(modes), units_(std::move(units)) {
  if (modes < 1) throw std::invalid_argument("MeshLayout: mode count must be >= 1");
  for (const auto& u : units_) {
    if (u.upper < 0 || u.lower >= modes || u.upper >= u.lower) {
      throw std::invalid_argument("MeshLayout: unit (" + std::to_string(u.upper) + ", " +
                                  std::to_string(u.lower) + ") is invalid for " +
                                  std::to_string(modes) + " modes");
    }
  }
}

MeshLayout MeshLayout::reck(int modes) {
  std::vector<int> all(static_cast<std::size_t>(modes));
  for (int i = 0; i < modes; ++i) all[static_cast<std::size_t>(i)] = i;
  return reck_on(modes, std::move(all));
}

MeshLayout MeshLayout::reck_on(int modes, std::vector<int> active_modes) {
  std::sort(active_modes.begin(), active_modes.end());
  active_modes.erase(std::unique(active_modes.begin(), active_modes.end()), active_modes.end());
  std::vector<MeshUnit> units;
  const int k = static_cast<int>(active_modes.size());
  for (int d = 0; d + 1 < k; ++d) {
    for (int i = d; i >= 0; --i) {
      units.push_back({active_modes[static_cast<std::size_t>(i)],
                       active_modes[static_cast<std::size_t>(i + 1)]});
    }
  }
  return MeshLayout(modes, std::move(units));
}

MeshLayout MeshLayout::from_edges(int modes, const std::vector<std::pair<int, int>>& edges) {
  if (edges.empty()) throw std::invalid_argument("MeshLayout::from_edges: no edges");
  const std::size_t target = static_cast<std::size_t>(modes) * static_cast<std::size_t>(modes - 1) / 2;
  std::vector<MeshUnit> units;
  units.reserve(target);
  for (std::size_t i = 0; units.size() < target; ++i) {
    const auto& [a, b] = edges[i % edges.size()];
    units.push_back({std::min(a, b), std::max(a, b)});
  }
  return MeshLayout(modes, std::move(units));
}

MeshParams::MeshParams(MeshLayout layout_in, std::vector<double> phases_in)
    : layout(std::move(layout_in)), phases(std::move(phases_in)) {
  if (phases.size() != layout.phase_count()) {
    throw std::invalid_argument("MeshParams: expected " + std::to_string(layout.phase_count()) +
                                " phases, got " + std::to_string(phases.size()));
  }
}

MeshParams MeshParams::identity(int modes) {
  MeshLayout layout = MeshLayout::reck(modes);
  std::vector<double> phases(layout.phase_count());
  for (std::size_t i = 0; i < phases.size(); i += 2) {
    phases[i] = kIdentityTheta;
    phases[i + 1] = kIdentityPhi;
  }
  return MeshParams(std::move(layout), std::move(phases));
}

ComplexMatrix mesh_to_unitary(const MeshLayout& layout, std::span<const double> phases) {
  if (phases.size() != layout.phase_count()) {
    throw std::invalid_argument("mesh_to_unitary: expected " +
                                std::to_string(layout.phase_count()) + " phases, got " +
                                std::to_string(phases.size()));
  }
  const int m = layout.modes();
  ComplexMatrix u = ComplexMatrix::Identity(m, m);
  for (std::size_t k = 0; k < layout.units().size(); ++k) {
    const auto& unit = layout.units()[k];
    const ComplexMatrix t = mzi_matrix(phases[2 * k], phases[2 * k + 1]);
    // Left-multiply rows `upper` and `lower` of u by t.
    for (Eigen::Index col = 0; col < m; ++col) {
      const Complex a = u(unit.upper, col);
      const Complex b = u(unit.lower, col);
      u(unit.upper, col) = t(0, 0) * a + t(0, 1) * b;
      u(unit.lower, col) = t(1, 0) * a + t(1, 1) * b;
    }
  }
  return u;
}

ComplexMatrix mesh_to_unitary(const MeshParams& params) {
  return mesh_to_unitary(params.layout, params.phases);
}

MeshParams random_mesh(int modes, std::uint64_t seed) {
  if (modes < 2) throw std::invalid_argument("random_mesh: need at least two modes");
  MeshLayout layout = MeshLayout::reck(modes);
  std::mt19937_64 rng(seed);
  std::vector<double> phases(layout.phase_count());
  for (auto& p : phases) p = uniform_phase(rng);
  return MeshParams(std::move(layout), std::move(phases));
}

double wrap_phase(double phase) {
  double r = std::fmod(phase, kTwoPi);
  if (r <= 0.0) r += kTwoPi;
  return r;
}

nlohmann::json to_json(const MeshParams& params) {
  nlohmann::json phases = nlohmann::json::array();
  for (double p : params.phases) phases.push_back(wrap_phase(p));
  nlohmann::json j = {{"m", params.modes()}, {"phases", phases}};
  if (!params.layout.is_full_reck()) {
    nlohmann::json units = nlohmann::json::array();
    for (const auto& u : params.layout.units()) units.push_back({u.upper, u.lower});
    j["units"] = units;
  }
  return j;
}

MeshParams mesh_from_json(const nlohmann::json& j) {
  const int m = j.at("m").get<int>();
  MeshLayout layout = MeshLayout::reck(m);
  if (j.contains("units")) {
    std::vector<MeshUnit> units;
    for (const auto& u : j.at("units")) units.push_back({u.at(0).get<int>(), u.at(1).get<int>()});
    layout = MeshLayout(m, std::move(units));
  }
  return MeshParams(std::move(layout), j.at("phases").get<std::vector<double>>());
}

double unitarity_deviation(const ComplexMatrix& matrix) {
  return (matrix.adjoint() * matrix - ComplexMatrix::Identity(matrix.cols(), matrix.cols())).norm();
}

namespace detail {

LiftPlan::LiftPlan(FockBasisPtr basis_in) : basis(std::move(basis_in)) {
  modes_of.reserve(basis->size());
  inv_sqrt_norm.reserve(basis->size());
  for (const auto& occ : basis->states()) {
    modes_of.push_back(repeated_modes(occ));
    inv_sqrt_norm.push_back(1.0 / std::sqrt(factorial_product(occ)));
  }
}

void LiftPlan::lift(const ComplexMatrix& unitary, ComplexMatrix& entries, int jobs) const {
  const auto dim = static_cast<Eigen::Index>(basis->size());
  entries.resize(dim, dim);
  const std::size_t rows = basis->size();
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(rows)));
  parallel_for(static_cast<std::size_t>(workers), workers, [&](std::size_t w) {
    const std::size_t begin = rows * w / static_cast<std::size_t>(workers);
    const std::size_t end = rows * (w + 1) / static_cast<std::size_t>(workers);
    lift_rows(unitary, *this, begin, end, entries);
  });
}

}  // namespace detail

TransferMatrix lift_to_fock(const ComplexMatrix& unitary, FockBasisPtr basis, int jobs) {
  if (!basis) throw std::invalid_argument("lift_to_fock: null basis");
  if (unitary.rows() != unitary.cols() || unitary.rows() != basis->modes()) {
    throw std::invalid_argument("lift_to_fock: unitary is " + std::to_string(unitary.rows()) +
                                "x" + std::to_string(unitary.cols()) + " but the basis has " +
                                std::to_string(basis->modes()) + " modes");
  }
  const double deviation = unitarity_deviation(unitary);
  if (!(deviation <= kLiftUnitarityTolerance)) {
    throw std::invalid_argument("lift_to_fock: matrix is not unitary (deviation " +
                                std::to_string(deviation) + ")");
  }
  TransferMatrix out;
  detail::LiftPlan(basis).lift(unitary, out.entries, jobs);
  out.basis = std::move(basis);
  return out;
}

FactorizedMesh::FactorizedMesh(FockBasisPtr basis, MeshLayout layout)
    : basis_(std::move(basis)), layout_(std::move(layout)) {
  if (!basis_) throw std::invalid_argument("FactorizedMesh: null basis");
  if (basis_->modes() != layout_.modes()) {
    throw std::invalid_argument("FactorizedMesh: layout and basis mode counts differ");
  }
  const int n = basis_->photons();
  sqrt_factorial_.assign(static_cast<std::size_t>(n + 1), 1.0);
  for (int k = 1; k <= n; ++k) {
    sqrt_factorial_[static_cast<std::size_t>(k)] =
        sqrt_factorial_[static_cast<std::size_t>(k - 1)] * std::sqrt(static_cast<double>(k));
  }

  std::map<std::pair<int, int>, std::shared_ptr<const PairSectors>> by_pair;
  for (const auto& unit : layout_.units()) {
    const auto key = std::make_pair(unit.upper, unit.lower);
    auto it = by_pair.find(key);
    if (it == by_pair.end()) {
      auto sectors = std::make_shared<PairSectors>();
      sectors->sector_indices.resize(static_cast<std::size_t>(n + 1));
      for (const auto& occ : basis_->states()) {
        if (occ[static_cast<std::size_t>(unit.lower)] != 0) continue;
        const int k = occ[static_cast<std::size_t>(unit.upper)];
        Occupation moved = occ;
        auto& group = sectors->sector_indices[static_cast<std::size_t>(k)];
        for (int lower = 0; lower <= k; ++lower) {
          moved[static_cast<std::size_t>(unit.upper)] = k - lower;
          moved[static_cast<std::size_t>(unit.lower)] = lower;
          group.push_back(static_cast<int>(basis_->index_of(moved)));
        }
      }
      it = by_pair.emplace(key, std::move(sectors)).first;
    }
    unit_sectors_.push_back(it->second);
  }
}

void FactorizedMesh::apply(std::span<const double> phases, ComplexMatrix& states) const {
  if (phases.size() != layout_.phase_count()) {
    throw std::invalid_argument("FactorizedMesh::apply: wrong phase count");
  }
  if (static_cast<std::size_t>(states.rows()) != basis_->size()) {
    throw std::invalid_argument("FactorizedMesh::apply: state dimension mismatch");
  }
  const Eigen::Index batch = states.cols();
  const int n = basis_->photons();
  const std::size_t width = static_cast<std::size_t>(n + 1);
  std::vector<Complex> scratch(width);
  std::vector<Complex> poly(width);
  std::vector<Complex> lift(width * width);
  for (std::size_t u = 0; u < layout_.units().size(); ++u) {
    const ComplexMatrix t = mzi_matrix(phases[2 * u], phases[2 * u + 1]);
    const auto& sectors = unit_sectors_[u]->sector_indices;
    for (int k = 1; k <= n; ++k) {
      const auto& indices = sectors[static_cast<std::size_t>(k)];
      if (indices.empty()) continue;
      const std::size_t group = static_cast<std::size_t>(k + 1);
      // Column b: the state with k - b photons upstairs and b downstairs maps
      // to (t00 + t10 y)^(k-b) (t01 + t11 y)^b; the y^a coefficient feeds row a.
      for (std::size_t b = 0; b < group; ++b) {
        std::fill(poly.begin(), poly.end(), Complex(0.0));
        poly[0] = 1.0;
        std::size_t degree = 0;
        auto multiply = [&](Complex c0, Complex c1) {
          poly[degree + 1] = c1 * poly[degree];
          for (std::size_t a = degree; a > 0; --a) poly[a] = c0 * poly[a] + c1 * poly[a - 1];
          poly[0] *= c0;
          ++degree;
        };
        for (std::size_t r = 0; r < group - 1 - b; ++r) multiply(t(0, 0), t(1, 0));
        for (std::size_t r = 0; r < b; ++r) multiply(t(0, 1), t(1, 1));
        const double in_norm = sqrt_factorial_[group - 1 - b] * sqrt_factorial_[b];
        for (std::size_t a = 0; a < group; ++a) {
          lift[a * group + b] =
              poly[a] * (sqrt_factorial_[group - 1 - a] * sqrt_factorial_[a] / in_norm);
        }
      }
      for (std::size_t g = 0; g < indices.size(); g += group) {
        for (Eigen::Index col = 0; col < batch; ++col) {
          for (std::size_t a = 0; a < group; ++a) scratch[a] = states(indices[g + a], col);
          for (std::size_t a = 0; a < group; ++a) {
            double re = 0.0;
            double im = 0.0;
            for (std::size_t b = 0; b < group; ++b) {
              const Complex l = lift[a * group + b];
              re += l.real() * scratch[b].real() - l.imag() * scratch[b].imag();
              im += l.real() * scratch[b].imag() + l.imag() * scratch[b].real();
            }
            states(indices[g + a], col) = Complex(re, im);
          }
        }
      }
    }
  }
}

}  // namespace qonn

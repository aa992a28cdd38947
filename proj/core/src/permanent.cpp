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

#include "qonn/permanent.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace qonn {
namespace {

void require_square(const ComplexMatrix& matrix, const char* who) {
  if (matrix.rows() != matrix.cols()) {
    throw std::invalid_argument(std::string(who) + ": matrix is not square (" +
                                std::to_string(matrix.rows()) + "x" +
                                std::to_string(matrix.cols()) + ")");
  }
}

}  // namespace

Complex permanent_naive(const ComplexMatrix& matrix) {
  require_square(matrix, "permanent_naive");
  const Eigen::Index n = matrix.rows();
  if (n > kNaivePermanentMaxDimension) {
    throw std::invalid_argument("permanent_naive: dimension " + std::to_string(n) +
                                " exceeds the factorial-cost guard");
  }
  std::vector<Eigen::Index> sigma(static_cast<std::size_t>(n));
  std::iota(sigma.begin(), sigma.end(), Eigen::Index{0});
  Complex total = 0.0;
  do {
    Complex product = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) product *= matrix(i, sigma[static_cast<std::size_t>(i)]);
    total += product;
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return total;
}

Complex permanent_ryser(const ComplexMatrix& matrix) {
  require_square(matrix, "permanent_ryser");
  const Eigen::Index n = matrix.rows();
  if (n == 0) return 1.0;
  if (n == 1) return matrix(0, 0);
  if (n == 2) return matrix(0, 0) * matrix(1, 1) + matrix(0, 1) * matrix(1, 0);
  constexpr Eigen::Index kMaxDimension = 40;
  if (n > kMaxDimension) {
    throw std::invalid_argument("permanent_ryser: dimension " + std::to_string(n) +
                                " is beyond what 2^n enumeration can finish");
  }

  // row_sums[i] = sum over columns j in the current subset of M[i, j].
  std::array<Complex, kMaxDimension> row_sums{};
  const std::uint64_t subsets = std::uint64_t{1} << n;
  std::uint64_t gray = 0;
  Complex total = 0.0;
  for (std::uint64_t k = 1; k < subsets; ++k) {
    const int column = std::countr_zero(k);
    const std::uint64_t bit = std::uint64_t{1} << column;
    gray ^= bit;
    if (gray & bit) {
      for (Eigen::Index i = 0; i < n; ++i) row_sums[static_cast<std::size_t>(i)] += matrix(i, column);
    } else {
      for (Eigen::Index i = 0; i < n; ++i) row_sums[static_cast<std::size_t>(i)] -= matrix(i, column);
    }
    Complex product = row_sums[0];
    for (Eigen::Index i = 1; i < n; ++i) product *= row_sums[static_cast<std::size_t>(i)];
    // (-1)^{n - |S|}
    if ((n - std::popcount(gray)) & 1) {
      total -= product;
    } else {
      total += product;
    }
  }
  return total;
}

ComplexMatrix build_submatrix(const ComplexMatrix& unitary, const Occupation& out,
                              const Occupation& in) {
  const auto modes = static_cast<std::size_t>(unitary.rows());
  if (unitary.rows() != unitary.cols() || out.size() != modes || in.size() != modes) {
    throw std::invalid_argument("build_submatrix: occupation length does not match unitary");
  }
  const int n_out = std::accumulate(out.begin(), out.end(), 0);
  const int n_in = std::accumulate(in.begin(), in.end(), 0);
  if (n_out != n_in) {
    throw std::invalid_argument("build_submatrix: photon-count mismatch (" +
                                std::to_string(n_out) + " vs " + std::to_string(n_in) + ")");
  }
  std::vector<Eigen::Index> rows;
  std::vector<Eigen::Index> cols;
  rows.reserve(static_cast<std::size_t>(n_out));
  cols.reserve(static_cast<std::size_t>(n_in));
  for (std::size_t mode = 0; mode < modes; ++mode) {
    for (int r = 0; r < out[mode]; ++r) rows.push_back(static_cast<Eigen::Index>(mode));
    for (int c = 0; c < in[mode]; ++c) cols.push_back(static_cast<Eigen::Index>(mode));
  }
  ComplexMatrix sub(n_out, n_in);
  for (Eigen::Index i = 0; i < n_out; ++i) {
    for (Eigen::Index j = 0; j < n_in; ++j) {
      sub(i, j) = unitary(rows[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]);
    }
  }
  return sub;
}

}  // namespace qonn

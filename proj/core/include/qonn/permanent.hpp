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

#include "qonn/fock.hpp"

namespace qonn {

/// Largest dimension accepted by `permanent_naive` (factorial cost).
inline constexpr Eigen::Index kNaivePermanentMaxDimension = 10;

/// Sum over all permutations of the products M[i, sigma(i)]. Reference
/// implementation; rejects non-square input and dimension above 10.
Complex permanent_naive(const ComplexMatrix& matrix);

/// Ryser's inclusion-exclusion formula with Gray-code subset ordering,
/// O(2^n n). The permanent of the 0x0 matrix is 1.
Complex permanent_ryser(const ComplexMatrix& matrix);

/// The n x n matrix whose rows repeat row i of `unitary` out[i] times and
/// whose columns repeat column j in[j] times, modes in ascending order.
/// Both occupations must hold the same photon count and match the unitary's
/// dimension.
ComplexMatrix build_submatrix(const ComplexMatrix& unitary, const Occupation& out,
                              const Occupation& in);

}  // namespace qonn

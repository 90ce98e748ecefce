// Copyright 2026 The qpt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QPT_TOLERANCES_HPP_
#define QPT_TOLERANCES_HPP_

namespace qpt::tol {

// Hermiticity expected after symmetrization.
inline constexpr double kConstruction = 1e-12;
// Eigendecomposition reconstruction / unitarity, per unit of dimension.
inline constexpr double kDecomposition = 1e-10;
// Anti-Hermitian part above this is a caller bug, not rounding.
inline constexpr double kRejection = 1e-8;

// Eigenvalues in [-kPsdClamp, 0) are rounding and get clamped to zero.
inline constexpr double kPsdClamp = 1e-10;
// Eigenvalues below -kNotPsd are reported as "not PSD".
inline constexpr double kNotPsd = 1e-8;

// Operator-basis completeness and orthogonality.
inline constexpr double kBasis = 1e-10;
// Kraus completeness.
inline constexpr double kKraus = 1e-10;
// Process-matrix positivity and trace-preservation checks.
inline constexpr double kProcess = 1e-8;
// Effect resolution of identity.
inline constexpr double kEffects = 1e-9;

// Default relative eigenvalue cut-off for chi_rank.
inline constexpr double kRankRelative = 1e-7;

}  // namespace qpt::tol

#endif  // QPT_TOLERANCES_HPP_

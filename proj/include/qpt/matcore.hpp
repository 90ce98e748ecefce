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

/// \file matcore.hpp
/// \brief Dense complex matrix kernel shared by every other module.
///
/// Matrices are plain Eigen dense types. The only wrapper is
/// HermitianMatrix, which carries the Hermiticity invariant so that
/// downstream code (eigendecomposition, PSD projection, vectorization)
/// never has to re-check it.

#ifndef QPT_MATCORE_HPP_
#define QPT_MATCORE_HPP_

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace qpt {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Max-norm distance check with an explicit absolute tolerance.
bool approx_equal(const ComplexMatrix& a, const ComplexMatrix& b, double abs_tol);

/// Largest absolute entry.
double max_norm(const ComplexMatrix& m);

/// A square matrix equal to its adjoint.
///
/// Construction symmetrizes the input to (M + M^dagger)/2 and throws
/// InvariantError if the discarded anti-Hermitian part exceeds
/// tol::kRejection in max-norm.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(const ComplexMatrix& m);

  static HermitianMatrix zero(Index dim);
  static HermitianMatrix identity(Index dim);
  static HermitianMatrix diagonal(const RealVector& diag);

  Index dim() const { return m_.rows(); }
  const ComplexMatrix& matrix() const { return m_; }
  Complex operator()(Index i, Index j) const { return m_(i, j); }
  double trace() const { return m_.trace().real(); }

  HermitianMatrix operator+(const HermitianMatrix& o) const;
  HermitianMatrix operator-(const HermitianMatrix& o) const;
  HermitianMatrix operator*(double s) const;

 private:
  struct Trusted {};
  HermitianMatrix(ComplexMatrix m, Trusted) : m_(std::move(m)) {}

  ComplexMatrix m_;
};

struct EigenDecomposition {
  RealVector eigenvalues;     // ascending
  ComplexMatrix eigenvectors;  // columns, unitary
};

/// Throws NumericalError if the solver reports non-convergence.
EigenDecomposition hermitian_eig(const HermitianMatrix& m);

/// Frobenius-nearest PSD matrix: V diag(max(w, 0)) V^dagger.
HermitianMatrix psd_project(const HermitianMatrix& m);

/// Unique PSD square root. Eigenvalues in [-kNotPsd, 0) are clamped;
/// anything more negative throws InvariantError.
HermitianMatrix psd_sqrt(const HermitianMatrix& m);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// Tr(A^dagger B).
Complex hs_inner(const ComplexMatrix& a, const ComplexMatrix& b);

/// Real coordinates of a Hermitian n x n matrix.
///
/// Layout (n^2 entries):
///   [0, n)                    diagonal entries M(i,i)
///   [n, n + n(n-1)/2)         sqrt(2) Re M(i,j) for i < j, row-major
///   [n + n(n-1)/2, n^2)       sqrt(2) Im M(i,j) for i < j, row-major
/// The Euclidean inner product of two vectorizations equals Re Tr(A^dagger B).
struct RealVectorization {
  Index dim = 0;
  RealVector coords;
};

RealVectorization vec_hermitian(const HermitianMatrix& m);
HermitianMatrix mat_hermitian(const RealVectorization& v);

/// Coordinates of vec_hermitian(X) as a flat vector, for hot loops that
/// already hold a trusted Hermitian matrix.
void vec_hermitian_into(const ComplexMatrix& m, Eigen::Ref<RealVector> out);
void mat_hermitian_into(Eigen::Ref<const RealVector> coords, ComplexMatrix& out);

/// Incrementally tracks the dimension of the span of a set of matrices
/// viewed as Hilbert-Schmidt vectors (modified Gram-Schmidt with one
/// re-orthogonalization pass).
class SpanTracker {
 public:
  explicit SpanTracker(double rel_tol = 1e-9) : rel_tol_(rel_tol) {}

  /// Adds m; returns true if it increased the span dimension.
  bool add(const ComplexMatrix& m);
  Index rank() const { return static_cast<Index>(basis_.size()); }

 private:
  double rel_tol_;
  std::vector<Eigen::VectorXcd> basis_;
};

/// Dimension of span{m_i} in Hilbert-Schmidt space.
Index hs_rank(const std::vector<ComplexMatrix>& ms, double rel_tol = 1e-9);

}  // namespace qpt

#endif  // QPT_MATCORE_HPP_

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

#include "qpt/matcore.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "qpt/error.hpp"
#include "qpt/tolerances.hpp"

namespace qpt {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

std::string shape(const ComplexMatrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

bool approx_equal(const ComplexMatrix& a, const ComplexMatrix& b, double abs_tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return max_norm(a - b) <= abs_tol;
}

double max_norm(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

HermitianMatrix::HermitianMatrix(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) {
    throw DimensionError("HermitianMatrix: matrix is not square (" + shape(m) + ")");
  }
  const double anti = max_norm((m - m.adjoint()) * 0.5);
  if (anti > tol::kRejection) {
    throw InvariantError("HermitianMatrix: anti-Hermitian part " + std::to_string(anti) +
                         " exceeds rejection tolerance");
  }
  m_ = (m + m.adjoint()) * 0.5;
}

HermitianMatrix HermitianMatrix::zero(Index dim) {
  return {ComplexMatrix::Zero(dim, dim), Trusted{}};
}

HermitianMatrix HermitianMatrix::identity(Index dim) {
  return {ComplexMatrix::Identity(dim, dim), Trusted{}};
}

HermitianMatrix HermitianMatrix::diagonal(const RealVector& diag) {
  return {diag.cast<Complex>().asDiagonal().toDenseMatrix(), Trusted{}};
}

HermitianMatrix HermitianMatrix::operator+(const HermitianMatrix& o) const {
  if (dim() != o.dim()) throw DimensionError("HermitianMatrix: sum of different sizes");
  return {m_ + o.m_, Trusted{}};
}

HermitianMatrix HermitianMatrix::operator-(const HermitianMatrix& o) const {
  if (dim() != o.dim()) throw DimensionError("HermitianMatrix: difference of different sizes");
  return {m_ - o.m_, Trusted{}};
}

HermitianMatrix HermitianMatrix::operator*(double s) const { return {m_ * s, Trusted{}}; }

EigenDecomposition hermitian_eig(const HermitianMatrix& m) {
  // Householder tridiagonalization followed by implicit symmetric QR.
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m.matrix());
  if (solver.info() != Eigen::Success) {
    throw NumericalError("hermitian_eig: QR iteration did not converge for a " +
                         std::to_string(m.dim()) + "x" + std::to_string(m.dim()) + " matrix");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

HermitianMatrix psd_project(const HermitianMatrix& m) {
  const auto eig = hermitian_eig(m);
  const RealVector clamped = eig.eigenvalues.cwiseMax(0.0);
  return HermitianMatrix(eig.eigenvectors * clamped.cast<Complex>().asDiagonal() *
                         eig.eigenvectors.adjoint());
}

HermitianMatrix psd_sqrt(const HermitianMatrix& m) {
  const auto eig = hermitian_eig(m);
  if (eig.eigenvalues.size() > 0 && eig.eigenvalues(0) < -tol::kNotPsd) {
    throw InvariantError("psd_sqrt: matrix is not PSD (smallest eigenvalue " +
                         std::to_string(eig.eigenvalues(0)) + ")");
  }
  const RealVector roots = eig.eigenvalues.cwiseMax(0.0).cwiseSqrt();
  return HermitianMatrix(eig.eigenvectors * roots.cast<Complex>().asDiagonal() *
                         eig.eigenvectors.adjoint());
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Complex hs_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("hs_inner: shapes " + shape(a) + " and " + shape(b) + " differ");
  }
  return (a.conjugate().cwiseProduct(b)).sum();
}

void vec_hermitian_into(const ComplexMatrix& m, Eigen::Ref<RealVector> out) {
  const Index n = m.rows();
  const Index n_upper = n * (n - 1) / 2;
  Index k = 0;
  for (Index i = 0; i < n; ++i) out(i) = m(i, i).real();
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j, ++k) {
      out(n + k) = kSqrt2 * m(i, j).real();
      out(n + n_upper + k) = kSqrt2 * m(i, j).imag();
    }
  }
}

void mat_hermitian_into(Eigen::Ref<const RealVector> coords, ComplexMatrix& out) {
  const auto n = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(coords.size()))));
  const Index n_upper = n * (n - 1) / 2;
  out.resize(n, n);
  Index k = 0;
  for (Index i = 0; i < n; ++i) out(i, i) = coords(i);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j, ++k) {
      const Complex z(coords(n + k) / kSqrt2, coords(n + n_upper + k) / kSqrt2);
      out(i, j) = z;
      out(j, i) = std::conj(z);
    }
  }
}

RealVectorization vec_hermitian(const HermitianMatrix& m) {
  RealVectorization v{m.dim(), RealVector(m.dim() * m.dim())};
  vec_hermitian_into(m.matrix(), v.coords);
  return v;
}

HermitianMatrix mat_hermitian(const RealVectorization& v) {
  if (v.coords.size() != v.dim * v.dim) {
    throw DimensionError("mat_hermitian: expected " + std::to_string(v.dim * v.dim) +
                         " coordinates, got " + std::to_string(v.coords.size()));
  }
  ComplexMatrix m;
  mat_hermitian_into(v.coords, m);
  return HermitianMatrix(m);
}

bool SpanTracker::add(const ComplexMatrix& m) {
  Eigen::VectorXcd v = Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size());
  const double norm = v.norm();
  if (norm == 0.0) return false;
  if (!basis_.empty() && basis_.front().size() != v.size()) {
    throw DimensionError("SpanTracker: matrix size differs from earlier entries");
  }
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& q : basis_) v -= q.dot(v) * q;
  }
  const double residual = v.norm();
  if (residual <= rel_tol_ * norm) return false;
  basis_.push_back(v / residual);
  return true;
}

Index hs_rank(const std::vector<ComplexMatrix>& ms, double rel_tol) {
  SpanTracker tracker(rel_tol);
  for (const auto& m : ms) tracker.add(m);
  return tracker.rank();
}

}  // namespace qpt

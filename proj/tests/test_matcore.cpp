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

#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qpt/error.hpp"
#include "qpt/matcore.hpp"
#include "test_util.hpp"

using namespace qpt;
using qpt::testing::random_complex;
using qpt::testing::random_hermitian;

namespace {

ComplexMatrix diag(std::initializer_list<double> v) {
  RealVector d(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) d(i++) = x;
  return d.cast<Complex>().asDiagonal();
}

ComplexMatrix sx() { return oracle::pauli(1); }
ComplexMatrix sz() { return oracle::pauli(3); }

}  // namespace

TEST_CASE("hermitian construction symmetrizes and rejects") {
  ComplexMatrix m(2, 2);
  m << 1, Complex(2, 1e-13), Complex(2, -1e-13 + 1e-14), 3;
  const HermitianMatrix h(m);
  CHECK(h.matrix().isApprox(h.matrix().adjoint(), 0.0));

  ComplexMatrix bad(2, 2);
  bad << 1, 1, 0, 1;
  CHECK_THROWS_AS(HermitianMatrix{bad}, InvariantError);
  CHECK_THROWS_AS(HermitianMatrix{ComplexMatrix::Zero(2, 3)}, DimensionError);
}

TEST_CASE("eigendecomposition of small known spectra") {
  auto w = hermitian_eig(HermitianMatrix(sx())).eigenvalues;
  CHECK(w(0) == doctest::Approx(-1.0));
  CHECK(w(1) == doctest::Approx(1.0));

  w = hermitian_eig(HermitianMatrix(diag({3, -2, 5}))).eigenvalues;
  CHECK(w(0) == doctest::Approx(-2.0));
  CHECK(w(1) == doctest::Approx(3.0));
  CHECK(w(2) == doctest::Approx(5.0));

  const auto e = hermitian_eig(HermitianMatrix::identity(4));
  for (Index i = 0; i < 4; ++i) CHECK(e.eigenvalues(i) == doctest::Approx(1.0));

  // I - (I + sz)/6 has spectrum {2/3, 1}.
  const ComplexMatrix h = ComplexMatrix::Identity(2, 2) - (ComplexMatrix::Identity(2, 2) + sz()) / 6.0;
  w = hermitian_eig(HermitianMatrix(h)).eigenvalues;
  CHECK(w(0) == doctest::Approx(2.0 / 3.0));
  CHECK(w(1) == doctest::Approx(1.0));
}

TEST_CASE("eigendecomposition reconstructs random matrices") {
  std::mt19937 gen(11);
  for (Index n : {1, 2, 3, 4, 8, 16, 32}) {
    const HermitianMatrix m = random_hermitian(n, gen);
    const auto e = hermitian_eig(m);
    const ComplexMatrix back = e.eigenvectors * e.eigenvalues.cast<Complex>().asDiagonal() * e.eigenvectors.adjoint();
    CHECK(max_norm(back - m.matrix()) <= 1e-10 * static_cast<double>(n));
    CHECK(max_norm(e.eigenvectors.adjoint() * e.eigenvectors - ComplexMatrix::Identity(n, n)) <= 1e-10);
    for (Index i = 1; i < n; ++i) CHECK(e.eigenvalues(i - 1) <= e.eigenvalues(i));
  }
}

TEST_CASE("psd projection") {
  CHECK(approx_equal(psd_project(HermitianMatrix(diag({1, -0.5}))).matrix(), diag({1, 0}), 1e-12));
  ComplexMatrix half(2, 2);
  half << 0.5, 0.5, 0.5, 0.5;
  CHECK(approx_equal(psd_project(HermitianMatrix(sx())).matrix(), half, 1e-12));

  std::mt19937 gen(3);
  for (int trial = 0; trial < 20; ++trial) {
    const HermitianMatrix m = random_hermitian(4, gen);
    const HermitianMatrix p = psd_project(m);
    // Brute-force clamp through an independent eigensolver.
    Eigen::ComplexEigenSolver<ComplexMatrix> ces(m.matrix());
    ComplexMatrix clamp = ComplexMatrix::Zero(4, 4);
    for (Index i = 0; i < 4; ++i) {
      const double lam = ces.eigenvalues()(i).real();
      const Eigen::VectorXcd v = ces.eigenvectors().col(i).normalized();
      if (lam > 0) clamp += lam * v * v.adjoint();
    }
    CHECK(approx_equal(p.matrix(), clamp, 1e-10));
    CHECK(approx_equal(psd_project(p).matrix(), p.matrix(), 1e-10));
    CHECK(hermitian_eig(p).eigenvalues(0) >= -1e-12);
    // No PSD matrix is closer: perturbing within the cone never helps.
    const ComplexMatrix g = random_complex(4, 4, gen);
    const ComplexMatrix other = p.matrix() + 0.1 * g * g.adjoint();
    CHECK((m.matrix() - p.matrix()).norm() <= (m.matrix() - other).norm() + 1e-12);
  }
  const ComplexMatrix g = random_complex(4, 2, gen);
  const HermitianMatrix psd(ComplexMatrix(g * g.adjoint()));
  CHECK(approx_equal(psd_project(psd).matrix(), psd.matrix(), 1e-10));
}

TEST_CASE("psd square root") {
  CHECK(approx_equal(psd_sqrt(HermitianMatrix(diag({4, 9}))).matrix(), diag({2, 3}), 1e-12));
  CHECK(approx_equal(psd_sqrt(HermitianMatrix::identity(3)).matrix(), ComplexMatrix::Identity(3, 3), 1e-12));
  Eigen::VectorXcd v(3);
  v << Complex(1, 1), 2, Complex(0, -1);
  v.normalize();
  const ComplexMatrix proj = v * v.adjoint();
  CHECK(approx_equal(psd_sqrt(HermitianMatrix(proj)).matrix(), proj, 1e-10));

  std::mt19937 gen(5);
  const ComplexMatrix g = random_complex(5, 3, gen);
  const HermitianMatrix m(ComplexMatrix(g * g.adjoint()));
  const ComplexMatrix s = psd_sqrt(m).matrix();
  CHECK(max_norm(s * s - m.matrix()) <= 1e-9);

  CHECK_THROWS_AS(psd_sqrt(HermitianMatrix(diag({1, -1e-3}))), InvariantError);
  CHECK_NOTHROW(psd_sqrt(HermitianMatrix(diag({1, -1e-11}))));
}

TEST_CASE("kronecker product") {
  CHECK(approx_equal(kron(ComplexMatrix::Identity(2, 2), sz()), diag({1, -1, 1, -1}), 0.0));
  CHECK(approx_equal(kron(diag({2, 3}), diag({5, 7})), diag({10, 14, 15, 21}), 0.0));
  std::mt19937 gen(7);
  const ComplexMatrix a = random_complex(2, 3, gen), b = random_complex(3, 2, gen), c = random_complex(2, 2, gen);
  CHECK(approx_equal(kron(a, ComplexMatrix::Identity(1, 1)), a, 0.0));
  CHECK(approx_equal(kron(a, b), oracle::naive_kron(a, b), 1e-14));
  CHECK(approx_equal(kron(kron(a, b), c), kron(a, kron(b, c)), 1e-12));
}

TEST_CASE("hilbert-schmidt inner product") {
  CHECK(hs_inner(sx(), sx()).real() == doctest::Approx(2.0));
  CHECK(std::abs(hs_inner(sx(), sz())) == doctest::Approx(0.0));
  CHECK(hs_inner(ComplexMatrix::Identity(5, 5), ComplexMatrix::Identity(5, 5)).real() == doctest::Approx(5.0));
  std::mt19937 gen(9);
  const ComplexMatrix a = random_complex(3, 3, gen), b = random_complex(3, 3, gen);
  CHECK(std::abs(hs_inner(a, b) - oracle::trace_of(a.adjoint() * b)) <= 1e-12);
  CHECK_THROWS_AS(hs_inner(a, ComplexMatrix::Zero(2, 2)), DimensionError);
}

TEST_CASE("real vectorization") {
  auto v = vec_hermitian(HermitianMatrix::identity(2)).coords;
  CHECK(v.isApprox(Eigen::Vector4d(1, 1, 0, 0)));
  v = vec_hermitian(HermitianMatrix(sx())).coords;
  CHECK((v - Eigen::Vector4d(0, 0, std::sqrt(2.0), 0)).norm() <= 1e-15);

  std::mt19937 gen(13);
  for (Index n : {1, 2, 3, 4, 7}) {
    const HermitianMatrix a = random_hermitian(n, gen), b = random_hermitian(n, gen);
    const auto va = vec_hermitian(a);
    CHECK(va.dim == n);
    CHECK((va.coords - oracle::svec(a.matrix())).norm() <= 1e-15);
    CHECK(max_norm(mat_hermitian(va).matrix() - a.matrix()) <= 1e-14);
    CHECK((vec_hermitian(mat_hermitian(va)).coords - va.coords).cwiseAbs().maxCoeff() <= 1e-14);
    const double ip = va.coords.dot(vec_hermitian(b).coords);
    CHECK(std::abs(ip - hs_inner(a.matrix(), b.matrix()).real()) <= 1e-12);
  }
  CHECK_THROWS_AS(mat_hermitian({2, RealVector::Zero(3)}), DimensionError);
}

TEST_CASE("span tracking matches a singular value rank") {
  std::mt19937 gen(17);
  std::vector<ComplexMatrix> ms;
  SpanTracker tracker;
  for (int i = 0; i < 6; ++i) ms.push_back(random_complex(3, 3, gen));
  ms.push_back(ms[0] + 2.0 * ms[3]);
  ms.push_back(ms[1] * Complex(0, 1));
  ms.push_back(ComplexMatrix::Zero(3, 3));
  Index grew = 0;
  for (const auto& m : ms) grew += tracker.add(m) ? 1 : 0;
  CHECK(tracker.rank() == oracle::span_rank(ms));
  CHECK(grew == 6);
  CHECK(hs_rank(ms) == 6);

  std::vector<ComplexMatrix> full;
  for (int i = 0; i < 12; ++i) full.push_back(random_complex(3, 3, gen));
  CHECK(hs_rank(full) == 9);
}

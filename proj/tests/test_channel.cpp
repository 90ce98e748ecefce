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
#include "qpt/channel.hpp"
#include "qpt/error.hpp"
#include "qpt/probes.hpp"
#include "test_util.hpp"

using namespace qpt;

namespace {

ComplexMatrix eye(Index d) { return ComplexMatrix::Identity(d, d); }

KrausSet identity_channel(Index d) { return KrausSet({eye(d)}, true); }

KrausSet depolarizing(double p) {
  std::vector<ComplexMatrix> ops = {std::sqrt(1 - 3 * p / 4) * oracle::pauli(0)};
  for (int a = 1; a <= 3; ++a) ops.push_back(std::sqrt(p / 4) * oracle::pauli(a));
  return KrausSet(ops, true);
}

ComplexMatrix ket0() {
  ComplexMatrix r = ComplexMatrix::Zero(2, 2);
  r(0, 0) = 1;
  return r;
}

}  // namespace

TEST_CASE("scaled pauli basis matches a direct construction") {
  for (int n : {1, 2, 3}) {
    const BasisPtr b = build_scaled_pauli_basis(n);
    const auto ref = oracle::pauli_basis(n);
    const Index d = Index{1} << n;
    REQUIRE(b->size() == ref.size());
    CHECK(b->d() == d);
    CHECK(b->id() == "scaled-pauli-" + std::to_string(n));
    ComplexMatrix sum = ComplexMatrix::Zero(d, d);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      CHECK(approx_equal((*b)[i], ref[i], 1e-15));
      CHECK(b->gram_diag()[i] == doctest::Approx(1.0 / static_cast<double>(d)));
      sum += (*b)[i].adjoint() * (*b)[i];
      for (std::size_t j = i + 1; j < std::min<std::size_t>(ref.size(), i + 6); ++j) {
        CHECK(std::abs(hs_inner((*b)[i], (*b)[j])) <= 1e-10);
      }
    }
    CHECK(max_norm(sum - eye(d)) <= 1e-10);
  }
  CHECK_THROWS_AS(build_scaled_pauli_basis(0), InvariantError);
  CHECK(basis_from_id("scaled-pauli-2") == build_scaled_pauli_basis(2));
}

TEST_CASE("operator basis rejects invalid element sets") {
  auto ref = oracle::pauli_basis(1);
  std::vector<ComplexMatrix> swapped = {ref[1], ref[0], ref[2], ref[3]};
  CHECK_THROWS_AS(OperatorBasis("x", swapped), InvariantError);
  std::vector<ComplexMatrix> unscaled = {oracle::pauli(0), oracle::pauli(1), oracle::pauli(2), oracle::pauli(3)};
  CHECK_THROWS_AS(OperatorBasis("x", unscaled), InvariantError);
  std::vector<ComplexMatrix> skew = ref;
  skew[2] = (ref[1] + ref[2]) / std::sqrt(2.0);
  CHECK_THROWS_AS(OperatorBasis("x", skew), InvariantError);
  CHECK_THROWS_AS(OperatorBasis("x", {ref[0], ref[1]}), InvariantError);
}

TEST_CASE("kraus to chi on closed-form channels") {
  const BasisPtr b = build_scaled_pauli_basis(1);
  ComplexMatrix expect = ComplexMatrix::Zero(4, 4);
  expect(0, 0) = 4;
  CHECK(approx_equal(kraus_to_chi(identity_channel(2), b).chi().matrix(), expect, 1e-12));
  expect.setZero();
  expect(1, 1) = 4;
  CHECK(approx_equal(kraus_to_chi(KrausSet({oracle::pauli(1)}, true), b).chi().matrix(), expect, 1e-12));
  CHECK(approx_equal(kraus_to_chi(depolarizing(1.0), b).chi().matrix(), eye(4), 1e-12));
}

TEST_CASE("map application") {
  const BasisPtr b = build_scaled_pauli_basis(1);
  const DensityMatrix rho0(ket0());
  ComplexMatrix unit = ComplexMatrix::Zero(4, 4);
  unit(0, 0) = 4;
  CHECK(approx_equal(apply_map(ProcessMatrix(b, HermitianMatrix(unit)), rho0).matrix(), ket0(), 1e-12));
  const ProcessMatrix depol(b, HermitianMatrix(eye(4)));
  CHECK(approx_equal(apply_map(depol, rho0).matrix(), eye(2) / 2.0, 1e-12));

  std::mt19937 gen(21);
  const ProcessMatrix id = kraus_to_chi(identity_channel(2), b);
  const ComplexMatrix rho = testing::random_state(2, 2, gen);
  CHECK(approx_equal(apply_map(id, DensityMatrix(rho)).matrix(), rho, 1e-10));
  CHECK_THROWS_AS(apply_map(id, DensityMatrix(ComplexMatrix(eye(4) / 4.0))), DimensionError);
}

TEST_CASE("operator-sum and chi forms agree on random channels") {
  std::mt19937 gen(23);
  int channels = 0;
  for (int n : {1, 2}) {
    const Index d = Index{1} << n;
    const BasisPtr b = build_scaled_pauli_basis(n);
    for (std::size_t r = 1; r <= static_cast<std::size_t>(d * d); r += (n == 1 ? 1 : 3)) {
      for (int rep = 0; rep < (n == 1 ? 5 : 2); ++rep) {
        const KrausSet k = random_channel(d, r, {std::uint64_t(1000 * n + 10 * r + rep)});
        const ProcessMatrix chi = kraus_to_chi(k, b);
        ++channels;
        // Independent expansion through the oracle basis.
        CHECK(approx_equal(chi.chi().matrix(), oracle::chi_from_kraus(k.operators(), oracle::pauli_basis(n)), 1e-10));
        CHECK(chi.chi().trace() == doctest::Approx(static_cast<double>(d * d)).epsilon(1e-10));
        CHECK(chi_rank(chi) == r);
        CHECK(static_cast<std::size_t>(oracle::span_rank(k.operators())) == r);
        CHECK(check_trace_preserving(chi).is_tp);
        for (int s = 0; s < 10; ++s) {
          const ComplexMatrix rho = testing::random_state(d, 1 + s % d, gen);
          const ComplexMatrix expect = oracle::kraus_apply(k.operators(), rho);
          CHECK(max_norm(apply_map(chi, DensityMatrix(rho)).matrix() - expect) <= 1e-9);
          CHECK(max_norm(oracle::chi_apply(chi.chi().matrix(), b->elements(), rho) - expect) <= 1e-9);
        }
        const ComplexMatrix rho2 = testing::random_state(d * d, 2, gen);
        CHECK(max_norm(map_output_extended(chi, HermitianMatrix(rho2)).matrix() -
                       oracle::kraus_apply_extended(k.operators(), rho2, d)) <= 1e-9);
      }
    }
  }
  CHECK(channels >= 20);
}

TEST_CASE("choi states") {
  const BasisPtr b = build_scaled_pauli_basis(1);
  Eigen::VectorXcd phi = Eigen::VectorXcd::Zero(4);
  phi(0) = phi(3) = 1.0 / std::sqrt(2.0);
  CHECK(approx_equal(chi_to_choi(kraus_to_chi(identity_channel(2), b)).matrix(), phi * phi.adjoint(), 1e-12));
  CHECK(approx_equal(chi_to_choi(ProcessMatrix(b, HermitianMatrix(eye(4)))).matrix(), eye(4) / 4.0, 1e-12));
  for (std::size_t r = 1; r <= 4; ++r) {
    const KrausSet k = random_channel(2, r, {77 + r});
    const DensityMatrix c = chi_to_choi(kraus_to_chi(k, b));
    CHECK(c.trace() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(approx_equal(c.matrix(), oracle::choi(k.operators(), 2), 1e-10));
    CHECK(hermitian_eig(c.rho()).eigenvalues(0) >= -1e-10);
  }
}

TEST_CASE("process fidelity") {
  const BasisPtr b = build_scaled_pauli_basis(1);
  const ProcessMatrix id = kraus_to_chi(identity_channel(2), b);
  const ProcessMatrix depol(b, HermitianMatrix(eye(4)));
  const ProcessMatrix flip = kraus_to_chi(KrausSet({oracle::pauli(1)}, true), b);
  CHECK(process_fidelity(id, id) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(process_fidelity(id, depol) == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(process_fidelity(id, flip) <= 1e-9);

  std::mt19937 gen(29);
  for (int n : {1, 2}) {
    const Index d = Index{1} << n;
    const BasisPtr bn = build_scaled_pauli_basis(n);
    for (int t = 0; t < 6; ++t) {
      const KrausSet ka = random_channel(d, 1 + t % 3, {std::uint64_t(500 + t)});
      const KrausSet kb = random_channel(d, 1 + (t + 1) % 4, {std::uint64_t(600 + t)});
      const ProcessMatrix a = kraus_to_chi(ka, bn), c = kraus_to_chi(kb, bn);
      const double fab = process_fidelity(a, c), fba = process_fidelity(c, a);
      CHECK(std::abs(fab - fba) <= 1e-9);
      CHECK(fab >= 0.0);
      CHECK(fab <= 1.0 + 1e-9);
      CHECK(std::abs(fab - oracle::state_fidelity(oracle::choi(ka.operators(), d), oracle::choi(kb.operators(), d))) <= 1e-8);
      CHECK(process_fidelity(a, a) == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
  CHECK_THROWS_AS(process_fidelity(id, ProcessMatrix(b, HermitianMatrix::zero(4))), InvariantError);
}

TEST_CASE("trace preservation check and rank") {
  const BasisPtr b = build_scaled_pauli_basis(1);
  const ProcessMatrix id = kraus_to_chi(identity_channel(2), b);
  auto tc = check_trace_preserving(id);
  CHECK(tc.is_tp);
  CHECK(tc.defect <= 1e-12);
  tc = check_trace_preserving(id.scaled(0.5));
  CHECK_FALSE(tc.is_tp);
  CHECK(tc.defect == doctest::Approx(0.5));
  CHECK(chi_rank(id) == 1);
  CHECK(chi_rank(ProcessMatrix(b, HermitianMatrix(eye(4)))) == 4);
}

TEST_CASE("kraus sets validate completeness") {
  CHECK_THROWS_AS(KrausSet({2.0 * eye(2)}, true), InvariantError);
  CHECK_THROWS_AS(KrausSet({2.0 * eye(2)}, false), InvariantError);
  CHECK_NOTHROW(KrausSet({0.5 * eye(2)}, false));
  CHECK_THROWS_AS(KrausSet({0.5 * eye(2)}, true), InvariantError);
  CHECK_THROWS_AS(ProcessMatrix(build_scaled_pauli_basis(1), HermitianMatrix(-1.0 * eye(4))), InvariantError);
}

TEST_CASE("json round trips") {
  const BasisPtr b = build_scaled_pauli_basis(2);
  const KrausSet k = random_channel(4, 3, {9});
  const ProcessMatrix chi = kraus_to_chi(k, b);
  const ProcessMatrix back = process_matrix_from_json(nlohmann::json::parse(to_json(chi).dump()));
  CHECK(back.basis() == b);
  CHECK(max_norm(back.chi().matrix() - chi.chi().matrix()) <= 1e-12);
  const KrausSet kb = kraus_set_from_json(nlohmann::json::parse(to_json(k).dump()));
  REQUIRE(kb.rank() == k.rank());
  for (std::size_t i = 0; i < k.rank(); ++i) CHECK(max_norm(kb.operators()[i] - k.operators()[i]) <= 1e-12);
}

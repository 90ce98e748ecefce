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
#include <sstream>

#include "oracles.hpp"
#include "qpt/error.hpp"
#include "qpt/probes.hpp"
#include "qpt/random.hpp"

using namespace qpt;

namespace {

ComplexMatrix eye(Index d) { return ComplexMatrix::Identity(d, d); }

std::vector<ComplexMatrix> as_matrices(const std::vector<HermitianMatrix>& hs) {
  std::vector<ComplexMatrix> out;
  for (const auto& h : hs) out.push_back(h.matrix());
  return out;
}

}  // namespace

TEST_CASE("seeded generator streams") {
  Rng a({42}), b({42}), c({43});
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    differs = differs || x != c.uniform();
  }
  CHECK(differs);
  CHECK_THROWS_AS(Rng({1, "other-generator"}), InvariantError);
  CHECK(derive_seed(7, {1, 2}) == derive_seed(7, {1, 2}));
  CHECK(derive_seed(7, {1, 2}) != derive_seed(7, {2, 1}));
  CHECK(derive_seed(7, {1}) != derive_seed(8, {1}));

  Rng r({5});
  double mean = 0, var = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    mean += z;
    var += z * z;
  }
  mean /= n;
  var = var / n - mean * mean;
  CHECK(std::abs(mean) < 0.05);
  CHECK(std::abs(var - 1.0) < 0.05);
  CHECK(r.binomial(100, 0.0) == 0);
  CHECK(r.binomial(100, 1.0) == 100);
}

TEST_CASE("random channels") {
  for (Index d : {2, 4}) {
    for (std::size_t rank = 1; rank <= static_cast<std::size_t>(d * d); ++rank) {
      const KrausSet k = random_channel(d, rank, {std::uint64_t(31 * rank + d)});
      CHECK(k.rank() == rank);
      CHECK(k.trace_preserving());
      ComplexMatrix sum = ComplexMatrix::Zero(d, d);
      for (const auto& a : k.operators()) sum += a.adjoint() * a;
      CHECK(max_norm(sum - eye(d)) <= 1e-10);
      CHECK(static_cast<std::size_t>(oracle::span_rank(k.operators())) == rank);
    }
  }
  const KrausSet a = random_channel(2, 3, {99}), b = random_channel(2, 3, {99});
  for (std::size_t i = 0; i < 3; ++i) CHECK((a.operators()[i].array() == b.operators()[i].array()).all());
  CHECK_THROWS_AS(random_channel(2, 0, {1}), InvariantError);
  CHECK_THROWS_AS(random_channel(2, 5, {1}), InvariantError);

  // Haar average of full-rank qubit channels is the fully depolarizing chi.
  const BasisPtr basis = build_scaled_pauli_basis(1);
  ComplexMatrix mean = ComplexMatrix::Zero(4, 4);
  for (std::uint64_t s = 0; s < 200; ++s) {
    const KrausSet k = random_channel(2, 4, {derive_seed(2024, {s})});
    CHECK(chi_rank(kraus_to_chi(k, basis)) == 4);
    mean += oracle::chi_from_kraus(k.operators(), oracle::pauli_basis(1));
  }
  mean /= 200.0;
  CHECK(max_norm(mean - eye(4)) <= 0.15);
}

TEST_CASE("sqpt probe states") {
  const ProbeSet p1 = sqpt_probe_states(1);
  REQUIRE(p1.states.size() == 4);
  CHECK(p1.scheme == Scheme::kSqpt);
  ComplexMatrix plus(2, 2), plus_i(2, 2), zero = ComplexMatrix::Zero(2, 2), one = ComplexMatrix::Zero(2, 2);
  zero(0, 0) = 1;
  one(1, 1) = 1;
  plus << 0.5, 0.5, 0.5, 0.5;
  plus_i << 0.5, Complex(0, -0.5), Complex(0, 0.5), 0.5;
  CHECK(approx_equal(p1.states[0].matrix(), zero, 1e-15));
  CHECK(approx_equal(p1.states[1].matrix(), one, 1e-15));
  CHECK(approx_equal(p1.states[2].matrix(), plus, 1e-15));
  CHECK(approx_equal(p1.states[3].matrix(), plus_i, 1e-15));
  const ProbeSet p2 = sqpt_probe_states(2);
  REQUIRE(p2.states.size() == 16);
  std::vector<ComplexMatrix> ms;
  for (const auto& s : p2.states) {
    ms.push_back(s.matrix());
    CHECK(s.trace() == doctest::Approx(1.0));
  }
  CHECK(oracle::span_rank(ms) == 16);
  CHECK(approx_equal(p2.states[6].matrix(), oracle::naive_kron(one, plus), 1e-15));
}

TEST_CASE("aapt probe state") {
  const ProbeSet p = aapt_probe_state(1);
  REQUIRE(p.states.size() == 1);
  CHECK(p.state_dim() == 4);
  const ComplexMatrix& rho = p.states[0].matrix();
  CHECK(rho.trace().real() == doctest::Approx(1.0));
  // Partial trace over the ancilla (first factor).
  const ComplexMatrix reduced = rho.block(0, 0, 2, 2) + rho.block(2, 2, 2, 2);
  CHECK(approx_equal(reduced, eye(2) / 2.0, 1e-15));
  CHECK(operator_schmidt_rank(p.states[0].rho(), 2) == 4);
  CHECK(operator_schmidt_rank(HermitianMatrix(ComplexMatrix(eye(4) / 4.0)), 2) == 1);
}

TEST_CASE("pauli projector effects") {
  for (int n : {1, 2}) {
    const Index d = Index{1} << n;
    const EffectSet e = pauli_projector_effects(n);
    CHECK(e.size() == static_cast<std::size_t>(std::pow(6, n)));
    ComplexMatrix sum = ComplexMatrix::Zero(d, d);
    for (const auto& m : e.effects()) {
      sum += m.matrix();
      CHECK(hermitian_eig(m).eigenvalues(0) >= -1e-10);
    }
    CHECK(max_norm(sum - eye(d)) <= 1e-9);
    CHECK(oracle::span_rank(as_matrices(e.effects())) == d * d);
  }
  const EffectSet e1 = pauli_projector_effects(1);
  CHECK(approx_equal(e1[4].matrix(), (eye(2) + oracle::pauli(3)) / 6.0, 1e-15));
  CHECK(e1.labels()[4] == "+z");
  CHECK(pauli_projector_effects(2).labels()[1] == "+x-x");
  CHECK(effects_for_scheme(Scheme::kAapt, 1).dim() == 4);
}

TEST_CASE("exact measurement simulation") {
  const BasisPtr basis = build_scaled_pauli_basis(1);
  const ProcessMatrix id = kraus_to_chi(KrausSet({eye(2)}, true), basis);
  const ProbeSet probes = sqpt_probe_states(1);
  const EffectSet effects = pauli_projector_effects(1);
  const auto recs = simulate_measurements(id, probes, effects, {{4, 5}}, 0, {1});
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].p == doctest::Approx(1.0 / 3.0));
  CHECK(recs[1].p == doctest::Approx(0.0));

  for (Scheme scheme : {Scheme::kSqpt, Scheme::kAapt}) {
    for (int n : {1, 2}) {
      const Index d = Index{1} << n;
      const KrausSet k = random_channel(d, 2, {std::uint64_t(n)});
      const ProcessMatrix chi = kraus_to_chi(k, build_scaled_pauli_basis(n));
      const ProbeSet ps = probes_for_scheme(scheme, n);
      const EffectSet es = effects_for_scheme(scheme, n);
      const auto all = simulate_measurements(chi, ps, es, all_effects(ps, es), 0, {1});
      CHECK(all.size() == ps.states.size() * es.size());
      std::vector<double> per_probe(ps.states.size(), 0.0);
      for (const auto& r : all) {
        const ComplexMatrix out = scheme == Scheme::kSqpt
                                      ? oracle::kraus_apply(k.operators(), ps.states[r.probe].matrix())
                                      : oracle::kraus_apply_extended(k.operators(), ps.states[r.probe].matrix(), d);
        CHECK(std::abs(r.p - oracle::trace_of(es[r.effect].matrix() * out).real()) <= 1e-12);
        per_probe[r.probe] += r.p;
      }
      for (double t : per_probe) CHECK(t == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("binomial shot noise") {
  const BasisPtr basis = build_scaled_pauli_basis(2);
  const ProcessMatrix chi = kraus_to_chi(random_channel(4, 3, {8}), basis);
  const ProbeSet ps = sqpt_probe_states(2);
  const EffectSet es = pauli_projector_effects(2);
  const auto exact = simulate_measurements(chi, ps, es, all_effects(ps, es), 0, {1});
  const auto noisy = simulate_measurements(chi, ps, es, all_effects(ps, es), 10000, {77});
  const auto again = simulate_measurements(chi, ps, es, all_effects(ps, es), 10000, {77});
  CHECK(noisy == again);
  std::size_t inside = 0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    const double p = exact[i].p;
    CHECK(noisy[i].shots == 10000);
    if (std::abs(noisy[i].p - p) <= 5.0 * std::sqrt(p * (1 - p) / 1e4) + 1e-12) ++inside;
  }
  CHECK(static_cast<double>(inside) >= 0.99 * static_cast<double>(exact.size()));
}

TEST_CASE("unknown subspace hamiltonian") {
  const EffectSet e = pauli_projector_effects(1);
  CHECK(max_norm(unknown_subspace_hamiltonian(e, {0, 1, 2, 3, 4, 5}).matrix()) <= 1e-12);
  CHECK(approx_equal(unknown_subspace_hamiltonian(e, {}).matrix(), eye(2), 1e-12));
  const HermitianMatrix h = unknown_subspace_hamiltonian(e, {4});
  // Brute-force sum of the unmeasured effects.
  ComplexMatrix brute = ComplexMatrix::Zero(2, 2);
  for (std::size_t i = 0; i < e.size(); ++i) if (i != 4) brute += e[i].matrix();
  CHECK(approx_equal(h.matrix(), brute, 1e-12));
  const auto w = hermitian_eig(h).eigenvalues;
  CHECK(w(0) == doctest::Approx(2.0 / 3.0));
  CHECK(w(1) == doctest::Approx(1.0));
  CHECK_THROWS_AS(unknown_subspace_hamiltonian(e, {1, 1}), InvariantError);
  CHECK_THROWS_AS(unknown_subspace_hamiltonian(e, {6}), InvariantError);

  const EffectSet e2 = pauli_projector_effects(2);
  for (std::size_t m = 0; m < e2.size(); m += 5) {
    std::vector<std::size_t> measured;
    for (std::size_t i = 0; i < m; ++i) measured.push_back((7 * i) % e2.size());
    std::sort(measured.begin(), measured.end());
    measured.erase(std::unique(measured.begin(), measured.end()), measured.end());
    CHECK(hermitian_eig(unknown_subspace_hamiltonian(e2, measured)).eigenvalues(0) >= -1e-9);
  }
}

TEST_CASE("record serialization") {
  std::vector<MeasurementRecord> recs = {{0, 3, 0.1, 0}, {2, 5, 1.0 / 3.0, 1000}, {1, 0, 0.0, 7}};
  std::stringstream ss;
  write_records_csv(ss, recs);
  CHECK(ss.str().rfind("k,lambda,p,shots\n", 0) == 0);
  CHECK(read_records_csv(ss) == recs);
  CHECK(record_from_json(nlohmann::json::parse(to_json(recs[1]).dump())) == recs[1]);
  CHECK(format_double(0.1) == "0.1");
  std::stringstream bad("k,lambda,p,shots\n1,2\n");
  CHECK_THROWS(read_records_csv(bad));
}

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

#include "qpt/probes.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <Eigen/QR>

#include "qpt/error.hpp"

namespace qpt {

namespace {

constexpr double kProbabilitySlop = 1e-10;

std::vector<ComplexMatrix> tensor_powers(const std::vector<ComplexMatrix>& single, int n) {
  std::vector<ComplexMatrix> out{ComplexMatrix::Identity(1, 1)};
  for (int q = 0; q < n; ++q) {
    std::vector<ComplexMatrix> next;
    next.reserve(out.size() * single.size());
    for (const auto& a : out) {
      for (const auto& b : single) next.push_back(kron(a, b));
    }
    out = std::move(next);
  }
  return out;
}

Index qubit_dim(int n_qubits) {
  if (n_qubits < 1) throw InvariantError("n_qubits must be >= 1");
  if (n_qubits > 6) throw InvariantError("n_qubits must be <= 6");
  return Index{1} << n_qubits;
}

}  // namespace

std::string to_string(Scheme s) { return s == Scheme::kSqpt ? "sqpt" : "aapt"; }

Scheme scheme_from_string(const std::string& s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "sqpt") return Scheme::kSqpt;
  if (lower == "aapt") return Scheme::kAapt;
  throw InvariantError("unknown scheme '" + s + "' (expected sqpt or aapt)");
}

EffectSet::EffectSet(std::vector<HermitianMatrix> effects, std::vector<std::string> labels)
    : effects_(std::move(effects)), labels_(std::move(labels)) {
  if (effects_.empty()) throw InvariantError("EffectSet: no effects");
  if (labels_.size() != effects_.size()) throw InvariantError("EffectSet: label count mismatch");
  dim_ = effects_.front().dim();
  ComplexMatrix sum = ComplexMatrix::Zero(dim_, dim_);
  for (std::size_t i = 0; i < effects_.size(); ++i) {
    if (effects_[i].dim() != dim_) throw DimensionError("EffectSet: effect dimension mismatch");
    if (hermitian_eig(effects_[i]).eigenvalues(0) < -kProbabilitySlop) {
      throw InvariantError("EffectSet: effect " + labels_[i] + " is not PSD");
    }
    sum += effects_[i].matrix();
  }
  const double defect = max_norm(sum - ComplexMatrix::Identity(dim_, dim_));
  if (defect > tol::kEffects) {
    throw InvariantError("EffectSet: effects sum to I only within " + std::to_string(defect));
  }
}

ComplexMatrix haar_unitary(Index n, Rng& rng) {
  ComplexMatrix g(n, n);
  const double s = 1.0 / std::sqrt(2.0);
  // Column-major fill order is part of the reproducibility contract.
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      const double re = rng.normal();
      const double im = rng.normal();
      g(i, j) = Complex(re * s, im * s);
    }
  }
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix& r = qr.matrixQR();
  for (Index j = 0; j < n; ++j) {
    const double mag = std::abs(r(j, j));
    if (mag > 0.0) q.col(j) *= r(j, j) / mag;
  }
  return q;
}

ComplexMatrix haar_isometry(Index n, Index cols, Rng& rng) {
  return haar_unitary(n, rng).leftCols(cols);
}

KrausSet random_channel(Index d, std::size_t rank, const RngSeed& seed) {
  if (d < 1) throw InvariantError("random_channel: d must be >= 1");
  if (rank < 1 || static_cast<Index>(rank) > d * d) {
    throw InvariantError("random_channel: rank " + std::to_string(rank) + " outside [1, " +
                         std::to_string(d * d) + "]");
  }
  Rng rng(seed);
  const auto r = static_cast<Index>(rank);
  const ComplexMatrix v = haar_isometry(r * d, d, rng);
  std::vector<ComplexMatrix> ops;
  ops.reserve(rank);
  for (Index k = 0; k < r; ++k) ops.push_back(v.middleRows(k * d, d));
  return {std::move(ops), true};
}

ProbeSet sqpt_probe_states(int n_qubits) {
  const Index d = qubit_dim(n_qubits);
  const double h = 0.5;
  const Complex i(0.0, 1.0);
  ComplexMatrix zero(2, 2), one(2, 2), plus(2, 2), plus_i(2, 2);
  zero << 1.0, 0.0, 0.0, 0.0;
  one << 0.0, 0.0, 0.0, 1.0;
  plus << h, h, h, h;
  plus_i << h, -i * h, i * h, h;
  const auto products = tensor_powers({zero, one, plus, plus_i}, n_qubits);

  if (hs_rank(products) != d * d) {
    throw NumericalError("sqpt_probe_states: probe states do not span the operator space");
  }
  ProbeSet probes{d, {}, Scheme::kSqpt};
  probes.states.reserve(products.size());
  for (const auto& p : products) probes.states.emplace_back(p);
  return probes;
}

ProbeSet aapt_probe_state(int n_qubits) {
  const Index d = qubit_dim(n_qubits);
  Eigen::VectorXcd phi = Eigen::VectorXcd::Zero(d * d);
  for (Index j = 0; j < d; ++j) phi(j * d + j) = 1.0;
  ProbeSet probes{d, {}, Scheme::kAapt};
  probes.states.push_back(DensityMatrix::pure(phi));
  return probes;
}

EffectSet pauli_projector_effects(int n_qubits) {
  qubit_dim(n_qubits);
  const Complex i(0.0, 1.0);
  const double h = 0.5;
  ComplexMatrix xp(2, 2), xm(2, 2), yp(2, 2), ym(2, 2), zp(2, 2), zm(2, 2);
  xp << h, h, h, h;
  xm << h, -h, -h, h;
  yp << h, -i * h, i * h, h;
  ym << h, i * h, -i * h, h;
  zp << 1.0, 0.0, 0.0, 0.0;
  zm << 0.0, 0.0, 0.0, 1.0;
  const std::array<const char*, 6> names{"+x", "-x", "+y", "-y", "+z", "-z"};

  auto products = tensor_powers({xp, xm, yp, ym, zp, zm}, n_qubits);
  const double scale = std::pow(3.0, -n_qubits);

  std::vector<std::string> labels{""};
  for (int q = 0; q < n_qubits; ++q) {
    std::vector<std::string> next;
    for (const auto& l : labels) {
      for (const char* n : names) next.push_back(l + n);
    }
    labels = std::move(next);
  }

  std::vector<HermitianMatrix> effects;
  effects.reserve(products.size());
  for (auto& p : products) effects.emplace_back(p * scale);
  return {std::move(effects), std::move(labels)};
}

EffectSet effects_for_scheme(Scheme scheme, int n_qubits) {
  return pauli_projector_effects(scheme == Scheme::kSqpt ? n_qubits : 2 * n_qubits);
}

ProbeSet probes_for_scheme(Scheme scheme, int n_qubits) {
  return scheme == Scheme::kSqpt ? sqpt_probe_states(n_qubits) : aapt_probe_state(n_qubits);
}

DensityMatrix probe_output(const ProcessMatrix& chi, const ProbeSet& probes, std::size_t k) {
  if (probes.d != chi.d()) throw DimensionError("probe_output: probe and channel dimensions differ");
  if (k >= probes.states.size()) throw InvariantError("probe_output: probe index out of range");
  return probes.scheme == Scheme::kSqpt ? apply_map(chi, probes.states[k])
                                        : apply_map_extended(chi, probes.states[k]);
}

std::vector<std::vector<std::size_t>> all_effects(const ProbeSet& probes,
                                                  const EffectSet& effects) {
  std::vector<std::size_t> every(effects.size());
  for (std::size_t i = 0; i < every.size(); ++i) every[i] = i;
  return std::vector<std::vector<std::size_t>>(probes.states.size(), every);
}

std::vector<MeasurementRecord> simulate_measurements(
    const ProcessMatrix& chi, const ProbeSet& probes, const EffectSet& effects,
    const std::vector<std::vector<std::size_t>>& selected, std::uint64_t shots,
    const RngSeed& seed) {
  if (effects.dim() != probes.state_dim()) {
    throw DimensionError("simulate_measurements: effects act on dimension " +
                         std::to_string(effects.dim()) + ", probe outputs on " +
                         std::to_string(probes.state_dim()));
  }
  if (selected.size() > probes.states.size()) {
    throw InvariantError("simulate_measurements: more selection lists than probes");
  }
  Rng rng(seed);
  std::vector<MeasurementRecord> records;
  for (std::size_t k = 0; k < selected.size(); ++k) {
    if (selected[k].empty()) continue;
    const DensityMatrix out = probe_output(chi, probes, k);
    for (std::size_t lambda : selected[k]) {
      if (lambda >= effects.size()) {
        throw InvariantError("simulate_measurements: effect index " + std::to_string(lambda) +
                             " out of range");
      }
      double p = hs_inner(effects[lambda].matrix(), out.matrix()).real();
      if (p < -kProbabilitySlop || p > 1.0 + kProbabilitySlop) {
        throw InvariantError("simulate_measurements: probability " + std::to_string(p) +
                             " outside [0, 1]; channel or effect is invalid");
      }
      p = std::clamp(p, 0.0, 1.0);
      if (shots > 0) p = static_cast<double>(rng.binomial(shots, p)) / static_cast<double>(shots);
      records.push_back({k, lambda, p, shots});
    }
  }
  return records;
}

HermitianMatrix unknown_subspace_hamiltonian(const EffectSet& effects,
                                             const std::vector<std::size_t>& measured) {
  std::vector<bool> seen(effects.size(), false);
  ComplexMatrix h = ComplexMatrix::Identity(effects.dim(), effects.dim());
  for (std::size_t lambda : measured) {
    if (lambda >= effects.size()) {
      throw InvariantError("unknown_subspace_hamiltonian: effect index out of range");
    }
    if (seen[lambda]) {
      throw InvariantError("unknown_subspace_hamiltonian: duplicate effect index " +
                           std::to_string(lambda));
    }
    seen[lambda] = true;
    h -= effects[lambda].matrix();
  }
  return HermitianMatrix(h);
}

std::string format_double(double x) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return {buf.data(), res.ptr};
}

void write_records_csv(std::ostream& os, const std::vector<MeasurementRecord>& records) {
  os << "k,lambda,p,shots\n";
  for (const auto& r : records) {
    os << r.probe << ',' << r.effect << ',' << format_double(r.p) << ',' << r.shots << '\n';
  }
}

std::vector<MeasurementRecord> read_records_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("k,lambda,p,shots", 0) != 0) {
    throw InvariantError("records CSV: missing header 'k,lambda,p,shots'");
  }
  std::vector<MeasurementRecord> out;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string k, lambda, p, shots;
    if (!std::getline(ss, k, ',') || !std::getline(ss, lambda, ',') || !std::getline(ss, p, ',') ||
        !std::getline(ss, shots)) {
      throw InvariantError("records CSV line " + std::to_string(line_no) + ": expected 4 fields");
    }
    try {
      out.push_back({std::stoull(k), std::stoull(lambda), std::stod(p), std::stoull(shots)});
    } catch (const std::logic_error&) {
      throw InvariantError("records CSV line " + std::to_string(line_no) + ": malformed number");
    }
  }
  return out;
}

nlohmann::json to_json(const MeasurementRecord& r) {
  return {{"k", r.probe}, {"lambda", r.effect}, {"p", r.p}, {"shots", r.shots}};
}

MeasurementRecord record_from_json(const nlohmann::json& j) {
  return {j.at("k").get<std::size_t>(), j.at("lambda").get<std::size_t>(), j.at("p").get<double>(),
          j.value("shots", std::uint64_t{0})};
}

}  // namespace qpt

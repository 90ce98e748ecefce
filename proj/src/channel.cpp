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

#include "qpt/channel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>

#include <Eigen/SVD>

#include "qpt/error.hpp"

namespace qpt {

namespace {

std::array<ComplexMatrix, 4> single_qubit_paulis() {
  const Complex i(0.0, 1.0);
  ComplexMatrix id = ComplexMatrix::Identity(2, 2);
  ComplexMatrix x(2, 2), y(2, 2), z(2, 2);
  x << 0.0, 1.0, 1.0, 0.0;
  y << 0.0, -i, i, 0.0;
  z << 1.0, 0.0, 0.0, -1.0;
  return {id, x, y, z};
}

// Square root keeping only eigenvalues above a relative noise floor, so
// that exactly rank-deficient states do not pick up sqrt(1e-16) garbage.
ComplexMatrix truncated_sqrt(const HermitianMatrix& m) {
  const auto eig = hermitian_eig(m);
  const double top = std::max(eig.eigenvalues.maxCoeff(), 0.0);
  const double floor = 1e-14 * std::max(top, 1.0);
  RealVector roots(eig.eigenvalues.size());
  for (Index i = 0; i < roots.size(); ++i) {
    roots(i) = eig.eigenvalues(i) > floor ? std::sqrt(eig.eigenvalues(i)) : 0.0;
  }
  return eig.eigenvectors * roots.cast<Complex>().asDiagonal() * eig.eigenvectors.adjoint();
}

// sum_ij chi_ij F_i rho F_j^dagger for an arbitrary operator list F.
ComplexMatrix conjugate_sum(const ComplexMatrix& chi, const std::vector<ComplexMatrix>& ops,
                            const ComplexMatrix& rho) {
  const std::size_t n = ops.size();
  std::vector<ComplexMatrix> left(n);
  for (std::size_t i = 0; i < n; ++i) left[i] = ops[i] * rho;
  ComplexMatrix out = ComplexMatrix::Zero(rho.rows(), rho.cols());
  ComplexMatrix acc(rho.rows(), rho.cols());
  for (std::size_t j = 0; j < n; ++j) {
    acc.setZero();
    for (std::size_t i = 0; i < n; ++i) {
      const Complex c = chi(static_cast<Index>(i), static_cast<Index>(j));
      if (c != Complex(0.0, 0.0)) acc += c * left[i];
    }
    out += acc * ops[j].adjoint();
  }
  return out;
}

}  // namespace

OperatorBasis::OperatorBasis(std::string id, std::vector<ComplexMatrix> elements)
    : id_(std::move(id)), elements_(std::move(elements)) {
  if (elements_.empty()) throw InvariantError("OperatorBasis: no elements");
  d_ = elements_.front().rows();
  if (static_cast<Index>(elements_.size()) != d_ * d_) {
    throw InvariantError("OperatorBasis: expected d^2 = " + std::to_string(d_ * d_) +
                         " elements, got " + std::to_string(elements_.size()));
  }
  for (const auto& e : elements_) {
    if (e.rows() != d_ || e.cols() != d_) throw DimensionError("OperatorBasis: element shape");
  }

  const std::size_t n = elements_.size();
  gram_diag_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const Complex g = hs_inner(elements_[i], elements_[j]);
      if (i == j) {
        if (std::abs(g.imag()) > tol::kBasis || g.real() <= tol::kBasis) {
          throw InvariantError("OperatorBasis: element " + std::to_string(i) + " has zero norm");
        }
        gram_diag_[i] = g.real();
      } else if (std::abs(g) > tol::kBasis) {
        throw InvariantError("OperatorBasis: elements " + std::to_string(i) + " and " +
                             std::to_string(j) + " are not orthogonal");
      }
    }
  }

  const ComplexMatrix& e0 = elements_.front();
  const Complex scale = e0.trace() / static_cast<double>(d_);
  if (max_norm(e0 - scale * ComplexMatrix::Identity(d_, d_)) > tol::kBasis) {
    throw InvariantError("OperatorBasis: element 0 is not proportional to the identity");
  }

  ComplexMatrix completeness = ComplexMatrix::Zero(d_, d_);
  for (const auto& e : elements_) completeness += e.adjoint() * e;
  const double defect = max_norm(completeness - ComplexMatrix::Identity(d_, d_));
  if (defect > tol::kBasis) {
    throw InvariantError("OperatorBasis: sum E_i^dagger E_i differs from I by " +
                         std::to_string(defect));
  }
}

BasisPtr build_scaled_pauli_basis(int n_qubits) {
  if (n_qubits < 1) throw InvariantError("build_scaled_pauli_basis: n_qubits must be >= 1");
  if (n_qubits > 6) throw InvariantError("build_scaled_pauli_basis: n_qubits must be <= 6");

  static std::mutex mu;
  static std::map<int, BasisPtr> cache;
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find(n_qubits); it != cache.end()) return it->second;

  const auto paulis = single_qubit_paulis();
  std::vector<ComplexMatrix> strings{ComplexMatrix::Identity(1, 1)};
  for (int q = 0; q < n_qubits; ++q) {
    std::vector<ComplexMatrix> next;
    next.reserve(strings.size() * 4);
    for (const auto& s : strings) {
      for (const auto& p : paulis) next.push_back(kron(s, p));
    }
    strings = std::move(next);
  }
  const double d = std::ldexp(1.0, n_qubits);
  for (auto& s : strings) s /= d;

  auto basis = std::make_shared<const OperatorBasis>("scaled-pauli-" + std::to_string(n_qubits),
                                                     std::move(strings));
  cache.emplace(n_qubits, basis);
  return basis;
}

BasisPtr basis_from_id(const std::string& id) {
  const std::string prefix = "scaled-pauli-";
  if (id.rfind(prefix, 0) == 0) {
    try {
      return build_scaled_pauli_basis(std::stoi(id.substr(prefix.size())));
    } catch (const std::logic_error&) {
    }
  }
  throw InvariantError("unknown basis id '" + id + "'");
}

DensityMatrix::DensityMatrix(HermitianMatrix rho) : rho_(std::move(rho)) {
  const auto eig = hermitian_eig(rho_);
  if (eig.eigenvalues.size() > 0 && eig.eigenvalues(0) < -tol::kPsdClamp) {
    throw InvariantError("DensityMatrix: negative eigenvalue " + std::to_string(eig.eigenvalues(0)));
  }
  if (rho_.trace() > 1.0 + tol::kPsdClamp) {
    throw InvariantError("DensityMatrix: trace " + std::to_string(rho_.trace()) + " exceeds 1");
  }
}

DensityMatrix DensityMatrix::pure(const Eigen::VectorXcd& psi) {
  const Eigen::VectorXcd v = psi.normalized();
  return DensityMatrix(ComplexMatrix(v * v.adjoint()));
}

KrausSet::KrausSet(std::vector<ComplexMatrix> operators, bool trace_preserving)
    : ops_(std::move(operators)), trace_preserving_(trace_preserving) {
  if (ops_.empty()) throw InvariantError("KrausSet: no operators");
  d_ = ops_.front().rows();
  ComplexMatrix sum = ComplexMatrix::Zero(d_, d_);
  for (const auto& a : ops_) {
    if (a.rows() != d_ || a.cols() != d_) throw DimensionError("KrausSet: operator shape");
    sum += a.adjoint() * a;
  }
  const HermitianMatrix gap(ComplexMatrix::Identity(d_, d_) - sum);
  if (trace_preserving_) {
    if (max_norm(gap.matrix()) > tol::kKraus) {
      throw InvariantError("KrausSet: sum A^dagger A differs from I by " +
                           std::to_string(max_norm(gap.matrix())));
    }
  } else if (hermitian_eig(gap).eigenvalues(0) < -tol::kKraus) {
    throw InvariantError("KrausSet: sum A^dagger A exceeds I");
  }
}

ComplexMatrix KrausSet::apply(const ComplexMatrix& rho) const {
  ComplexMatrix out = ComplexMatrix::Zero(d_, d_);
  for (const auto& a : ops_) out += a * rho * a.adjoint();
  return out;
}

ProcessMatrix::ProcessMatrix(BasisPtr basis, HermitianMatrix chi)
    : basis_(std::move(basis)), chi_(std::move(chi)) {
  if (!basis_) throw InvariantError("ProcessMatrix: null basis");
  if (chi_.dim() != static_cast<Index>(basis_->size())) {
    throw DimensionError("ProcessMatrix: chi side " + std::to_string(chi_.dim()) +
                         " does not match basis size " + std::to_string(basis_->size()));
  }
  const double lowest = hermitian_eig(chi_).eigenvalues(0);
  if (lowest < -tol::kProcess) {
    throw InvariantError("ProcessMatrix: chi is not PSD (eigenvalue " + std::to_string(lowest) +
                         ")");
  }
}

HermitianMatrix map_output(const ProcessMatrix& chi, const HermitianMatrix& rho) {
  if (rho.dim() != chi.d()) {
    throw DimensionError("apply_map: state dimension " + std::to_string(rho.dim()) +
                         " does not match channel dimension " + std::to_string(chi.d()));
  }
  return HermitianMatrix(conjugate_sum(chi.chi().matrix(), chi.basis()->elements(), rho.matrix()));
}

DensityMatrix apply_map(const ProcessMatrix& chi, const DensityMatrix& rho) {
  // chi is PSD only within kProcess; clamp the resulting rounding.
  return DensityMatrix(psd_project(map_output(chi, rho.rho())));
}

HermitianMatrix map_output_extended(const ProcessMatrix& chi, const HermitianMatrix& rho) {
  const Index d = chi.d();
  if (rho.dim() != d * d) {
    throw DimensionError("apply_map_extended: state dimension " + std::to_string(rho.dim()) +
                         " is not d^2 = " + std::to_string(d * d));
  }
  std::vector<ComplexMatrix> lifted;
  lifted.reserve(chi.basis()->size());
  const ComplexMatrix id = ComplexMatrix::Identity(d, d);
  for (const auto& e : chi.basis()->elements()) lifted.push_back(kron(id, e));
  return HermitianMatrix(conjugate_sum(chi.chi().matrix(), lifted, rho.matrix()));
}

Index operator_schmidt_rank(const HermitianMatrix& rho, Index d, double rel_tol) {
  if (rho.dim() != d * d) throw DimensionError("operator_schmidt_rank: state is not on d^2");
  ComplexMatrix realigned(d * d, d * d);
  for (Index a = 0; a < d; ++a) {
    for (Index ap = 0; ap < d; ++ap) {
      for (Index s = 0; s < d; ++s) {
        for (Index sp = 0; sp < d; ++sp) realigned(a * d + ap, s * d + sp) = rho(a * d + s, ap * d + sp);
      }
    }
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(realigned);
  const RealVector sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= 0.0) return 0;
  return static_cast<Index>((sv.array() > rel_tol * sv(0)).count());
}

DensityMatrix apply_map_extended(const ProcessMatrix& chi, const DensityMatrix& rho) {
  return DensityMatrix(psd_project(map_output_extended(chi, rho.rho())));
}

ProcessMatrix kraus_to_chi(const KrausSet& kraus, const BasisPtr& basis) {
  if (kraus.d() != basis->d()) throw DimensionError("kraus_to_chi: dimension mismatch");
  const Index n = static_cast<Index>(basis->size());
  ComplexMatrix chi = ComplexMatrix::Zero(n, n);
  Eigen::VectorXcd a(n);
  for (const auto& op : kraus.operators()) {
    for (Index i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      a(i) = hs_inner((*basis)[ui], op) / basis->gram_diag()[ui];
    }
    chi += a * a.adjoint();
  }
  return {basis, HermitianMatrix(chi)};
}

HermitianMatrix choi_matrix(const ProcessMatrix& chi) {
  const Index d = chi.d();
  Eigen::VectorXcd phi = Eigen::VectorXcd::Zero(d * d);
  for (Index j = 0; j < d; ++j) phi(j * d + j) = 1.0 / std::sqrt(static_cast<double>(d));
  return map_output_extended(chi, HermitianMatrix(ComplexMatrix(phi * phi.adjoint())));
}

DensityMatrix chi_to_choi(const ProcessMatrix& chi) {
  return DensityMatrix(psd_project(choi_matrix(chi)));
}

double state_fidelity(const HermitianMatrix& rho, const HermitianMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw DimensionError("state_fidelity: dimension mismatch");
  // (Tr |sqrt(rho) sqrt(sigma)|)^2, symmetric in its arguments.
  const ComplexMatrix product = truncated_sqrt(rho) * truncated_sqrt(sigma);
  Eigen::JacobiSVD<ComplexMatrix> svd(product);
  const double nuclear = svd.singularValues().sum();
  return nuclear * nuclear;
}

double process_fidelity(const ProcessMatrix& a, const ProcessMatrix& b) {
  if (a.d() != b.d() || a.basis()->id() != b.basis()->id()) {
    throw DimensionError("process_fidelity: channels use different dimensions or bases");
  }
  const HermitianMatrix ca = psd_project(choi_matrix(a));
  const HermitianMatrix cb = psd_project(choi_matrix(b));
  constexpr double kMinTrace = 1e-12;
  if (ca.trace() <= kMinTrace || cb.trace() <= kMinTrace) {
    throw InvariantError("process_fidelity: channel with zero-trace Choi state");
  }
  return state_fidelity(ca * (1.0 / ca.trace()), cb * (1.0 / cb.trace()));
}

TraceCheck check_trace_preserving(const ProcessMatrix& chi) {
  const auto& basis = *chi.basis();
  const Index d = chi.d();
  ComplexMatrix sum = ComplexMatrix::Zero(d, d);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    for (std::size_t j = 0; j < basis.size(); ++j) {
      const Complex c = chi.chi()(static_cast<Index>(i), static_cast<Index>(j));
      if (c != Complex(0.0, 0.0)) sum += c * basis[j].adjoint() * basis[i];
    }
  }
  const double defect = max_norm(sum - ComplexMatrix::Identity(d, d));
  return {defect <= tol::kProcess, defect};
}

std::size_t chi_rank(const ProcessMatrix& chi, double rel_tol) {
  const RealVector w = hermitian_eig(chi.chi()).eigenvalues;
  const double top = w.maxCoeff();
  if (top <= 0.0) return 0;
  return static_cast<std::size_t>((w.array() > rel_tol * top).count());
}

nlohmann::json matrix_to_json(const ComplexMatrix& m) {
  auto out = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out.push_back({m(i, j).real(), m(i, j).imag()});
  }
  return out;
}

ComplexMatrix matrix_from_json(const nlohmann::json& j, Index rows, Index cols) {
  if (!j.is_array() || static_cast<Index>(j.size()) != rows * cols) {
    throw DimensionError("matrix_from_json: expected " + std::to_string(rows * cols) +
                         " [re, im] entries");
  }
  ComplexMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index k = 0; k < cols; ++k) {
      const auto& e = j.at(static_cast<std::size_t>(i * cols + k));
      m(i, k) = Complex(e.at(0).get<double>(), e.at(1).get<double>());
    }
  }
  return m;
}

nlohmann::json to_json(const ProcessMatrix& chi) {
  return {{"d", chi.d()}, {"basis_id", chi.basis()->id()}, {"chi", matrix_to_json(chi.chi().matrix())}};
}

ProcessMatrix process_matrix_from_json(const nlohmann::json& j) {
  const auto basis = basis_from_id(j.at("basis_id").get<std::string>());
  if (j.at("d").get<Index>() != basis->d()) {
    throw DimensionError("process matrix JSON: d does not match basis");
  }
  const auto n = static_cast<Index>(basis->size());
  return {basis, HermitianMatrix(matrix_from_json(j.at("chi"), n, n))};
}

nlohmann::json to_json(const KrausSet& kraus) {
  auto ops = nlohmann::json::array();
  for (const auto& a : kraus.operators()) ops.push_back(matrix_to_json(a));
  return {{"d", kraus.d()}, {"trace_preserving", kraus.trace_preserving()}, {"operators", ops}};
}

KrausSet kraus_set_from_json(const nlohmann::json& j) {
  const auto d = j.at("d").get<Index>();
  std::vector<ComplexMatrix> ops;
  for (const auto& op : j.at("operators")) ops.push_back(matrix_from_json(op, d, d));
  return {std::move(ops), j.at("trace_preserving").get<bool>()};
}

}  // namespace qpt

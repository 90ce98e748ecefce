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

/// \file channel.hpp
/// \brief Quantum-channel representations: operator bases, process (chi)
/// matrices, Kraus sets, Choi states and the process fidelity.
///
/// A channel acts as E(rho) = sum_ij chi_ij E_i rho E_j^dagger in a fixed
/// operator basis {E_i} with sum_i E_i^dagger E_i = I. The shipped basis is
/// the Pauli strings divided by d, for which every trace-preserving chi has
/// Tr(chi) = d^2.

#ifndef QPT_CHANNEL_HPP_
#define QPT_CHANNEL_HPP_

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "qpt/matcore.hpp"
#include "qpt/tolerances.hpp"

namespace qpt {

/// d^2 operators spanning the d x d matrices, pairwise Hilbert-Schmidt
/// orthogonal, with element 0 proportional to I and sum E_i^dagger E_i = I.
class OperatorBasis {
 public:
  /// Validates every invariant; throws InvariantError on violation.
  OperatorBasis(std::string id, std::vector<ComplexMatrix> elements);

  const std::string& id() const { return id_; }
  Index d() const { return d_; }
  std::size_t size() const { return elements_.size(); }
  const std::vector<ComplexMatrix>& elements() const { return elements_; }
  const ComplexMatrix& operator[](std::size_t i) const { return elements_[i]; }
  /// Tr(E_i^dagger E_i).
  const std::vector<double>& gram_diag() const { return gram_diag_; }

 private:
  std::string id_;
  Index d_ = 0;
  std::vector<ComplexMatrix> elements_;
  std::vector<double> gram_diag_;
};

using BasisPtr = std::shared_ptr<const OperatorBasis>;

/// Pauli strings over n qubits divided by 2^n. Order: I..I first, then
/// lexicographic in the letters (I, X, Y, Z) with qubit 0 most significant.
/// Id is "scaled-pauli-<n>".
BasisPtr build_scaled_pauli_basis(int n_qubits);

/// Looks up a shipped basis by id (used when deserializing).
BasisPtr basis_from_id(const std::string& id);

/// Density operator. Trace may be below 1 for outputs of trace-decreasing maps.
class DensityMatrix {
 public:
  explicit DensityMatrix(HermitianMatrix rho);
  explicit DensityMatrix(const ComplexMatrix& rho) : DensityMatrix(HermitianMatrix(rho)) {}

  /// |psi><psi| for a state vector; the vector is normalized first.
  static DensityMatrix pure(const Eigen::VectorXcd& psi);

  Index dim() const { return rho_.dim(); }
  const HermitianMatrix& rho() const { return rho_; }
  const ComplexMatrix& matrix() const { return rho_.matrix(); }
  double trace() const { return rho_.trace(); }

 private:
  HermitianMatrix rho_;
};

/// Operator-sum representation {A_k}.
class KrausSet {
 public:
  /// Checks sum A_k^dagger A_k = I (trace-preserving) or <= I otherwise.
  KrausSet(std::vector<ComplexMatrix> operators, bool trace_preserving);

  Index d() const { return d_; }
  std::size_t rank() const { return ops_.size(); }
  const std::vector<ComplexMatrix>& operators() const { return ops_; }
  bool trace_preserving() const { return trace_preserving_; }

  /// sum_k A_k rho A_k^dagger.
  ComplexMatrix apply(const ComplexMatrix& rho) const;

 private:
  Index d_ = 0;
  std::vector<ComplexMatrix> ops_;
  bool trace_preserving_ = true;
};

/// chi in a given operator basis. Positive semidefinite within kProcess.
class ProcessMatrix {
 public:
  ProcessMatrix(BasisPtr basis, HermitianMatrix chi);

  Index d() const { return basis_->d(); }
  const BasisPtr& basis() const { return basis_; }
  const HermitianMatrix& chi() const { return chi_; }

  ProcessMatrix scaled(double s) const { return {basis_, chi_ * s}; }

 private:
  BasisPtr basis_;
  HermitianMatrix chi_;
};

/// sum_ij chi_ij E_i rho E_j^dagger.
DensityMatrix apply_map(const ProcessMatrix& chi, const DensityMatrix& rho);

/// Same as apply_map without the density-matrix checks on the output, for
/// reconstructed channels whose output trace may exceed 1 by solver noise.
HermitianMatrix map_output(const ProcessMatrix& chi, const HermitianMatrix& rho);

/// (I (x) E)(rho) for rho on ancilla (x) system, ancilla first, both of dim d.
DensityMatrix apply_map_extended(const ProcessMatrix& chi, const DensityMatrix& rho);

/// Unvalidated counterpart of apply_map_extended.
HermitianMatrix map_output_extended(const ProcessMatrix& chi, const HermitianMatrix& rho);

/// Rank of the realigned matrix R_(a a'),(s s') = rho_(a s),(a' s') of a
/// state on ancilla (x) system, both of dimension d. Equals d^2 exactly when
/// (I (x) E)(rho) determines E.
Index operator_schmidt_rank(const HermitianMatrix& rho, Index d, double rel_tol = 1e-9);

/// Expansion chi = sum_k a_k a_k^dagger with a_ki = Tr(E_i^dagger A_k) / gram_i.
ProcessMatrix kraus_to_chi(const KrausSet& kraus, const BasisPtr& basis);

/// (I (x) E)(|phi+><phi+|) with |phi+> = sum_j |jj> / sqrt(d).
DensityMatrix chi_to_choi(const ProcessMatrix& chi);

/// Unvalidated Choi matrix; see map_output.
HermitianMatrix choi_matrix(const ProcessMatrix& chi);

/// Uhlmann fidelity of the trace-normalized Choi states. Throws
/// InvariantError when either channel has a zero-trace Choi state.
double process_fidelity(const ProcessMatrix& a, const ProcessMatrix& b);

/// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 of two states.
double state_fidelity(const HermitianMatrix& rho, const HermitianMatrix& sigma);

struct TraceCheck {
  bool is_tp = false;
  /// || sum_ij chi_ij E_j^dagger E_i - I ||_max
  double defect = 0.0;
};
TraceCheck check_trace_preserving(const ProcessMatrix& chi);

/// Number of eigenvalues above rel_tol times the largest one.
std::size_t chi_rank(const ProcessMatrix& chi, double rel_tol = tol::kRankRelative);

// JSON.
//
// ProcessMatrix: {"d": int, "basis_id": str, "chi": [[re, im], ...]}
//   chi holds (d^2)^2 entries in row-major order.
// KrausSet: {"d": int, "trace_preserving": bool,
//            "operators": [[[re, im], ...], ...]}  each operator row-major.
nlohmann::json matrix_to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const nlohmann::json& j, Index rows, Index cols);

nlohmann::json to_json(const ProcessMatrix& chi);
ProcessMatrix process_matrix_from_json(const nlohmann::json& j);
nlohmann::json to_json(const KrausSet& kraus);
KrausSet kraus_set_from_json(const nlohmann::json& j);

}  // namespace qpt

#endif  // QPT_CHANNEL_HPP_

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

/// \file sdp.hpp
/// \brief Conic programs with one Hermitian PSD block and a vector of
/// nonnegative scalars, and an operator-splitting solver for them.
///
/// Variable vector x = [vec_hermitian(X) ; s], X Hermitian psd_dim x psd_dim,
/// s >= 0 of length n_slack. The program is
///
///   minimize    <c, x>
///   subject to  lower_i <= <a_i, x> <= upper_i     (inequalities)
///               <b_j, x> = value_j                 (equalities)
///               X PSD, s >= 0.
///
/// Every linear functional is a LinearForm: a dense part over the n^2 real
/// coordinates of X and a sparse part over the scalars.

#ifndef QPT_SDP_HPP_
#define QPT_SDP_HPP_

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "qpt/channel.hpp"
#include "qpt/matcore.hpp"

namespace qpt {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct LinearForm {
  RealVector chi;                                  // psd_dim^2 coordinates
  std::vector<std::pair<std::size_t, double>> slack;  // (slack index, coefficient)

  /// <form, [chi_coords ; slacks]>.
  double evaluate(const RealVector& chi_coords, const std::vector<double>& slacks) const;
};

struct Inequality {
  LinearForm row;
  double lower = -kInf;
  double upper = kInf;
};

struct Equality {
  LinearForm row;
  double value = 0.0;
};

struct SdpProblem {
  Index psd_dim = 0;
  std::size_t n_slack = 0;
  LinearForm objective;
  std::vector<Inequality> inequalities;
  std::vector<Equality> equalities;

  SdpProblem() = default;
  SdpProblem(Index psd_dim, std::size_t n_slack);

  std::size_t n_chi() const { return static_cast<std::size_t>(psd_dim * psd_dim); }
  /// Appends a fresh scalar variable; returns its index.
  std::size_t add_slack();
  /// Zero form of the right chi length.
  LinearForm zero_form() const;

  /// Throws InvariantError on wrong lengths, bad slack indices, NaNs or
  /// lower > upper.
  void validate() const;
};

enum class SolveStatus { kOptimal, kMaxIter, kInfeasible };
std::string to_string(SolveStatus s);

struct SdpSolution {
  HermitianMatrix chi_block;
  std::vector<double> slacks;
  double objective_value = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  std::size_t iterations = 0;
  SolveStatus status = SolveStatus::kMaxIter;
  std::string diagnostics;
};

struct SolverOptions {
  double tol = 1e-7;
  std::size_t max_iter = 200000;
  double relaxation = 1.6;
  double rho = 0.1;
  double sigma = 1e-6;
  /// Equality rows use rho * equality_rho_scale.
  double equality_rho_scale = 1e3;
  /// rho is doubled / halved when the residual ratio leaves [1/r, r].
  double adapt_ratio = 10.0;
  std::size_t adapt_every = 50;
  std::size_t check_every = 10;
  /// Relative tolerance of the primal infeasibility certificate test.
  double infeasibility_tol = 1e-6;
  /// Optional trace sink; one line "iter primal dual rho" per trace_every.
  std::ostream* trace = nullptr;
  std::size_t trace_every = 100;
};

/// Operator-splitting (ADMM) solve. Residuals are Euclidean norms in the
/// row-equilibrated problem, normalized by max(1, |Ax|, |z|) (primal) and
/// max(1, |c|, |A'y|) (dual).
SdpSolution solve(const SdpProblem& problem, const SolverOptions& options);
SdpSolution solve(const SdpProblem& problem, double tol, std::size_t max_iter);

// Problem assembly for process tomography.

/// Hermitian W with Re Tr(W^dagger chi) = Tr(effect * sum_ij chi_ij F_i rho F_j^dagger)
/// for every Hermitian chi, where F_i = E_i (ancilla = false) or I (x) E_i
/// (ancilla = true, rho and effect on dimension d^2).
HermitianMatrix expectation_coefficients(const HermitianMatrix& rho, const HermitianMatrix& effect,
                                         const OperatorBasis& basis, bool ancilla);

/// vec_hermitian of expectation_coefficients.
RealVector assemble_expectation_row(const HermitianMatrix& rho, const HermitianMatrix& effect,
                                    const OperatorBasis& basis, bool ancilla);

struct ObjectiveTerm {
  HermitianMatrix chi_weight;
  std::vector<std::pair<std::size_t, double>> slack_weights;
};

/// Sum of the terms as a LinearForm over chi of side psd_dim.
LinearForm assemble_objective(const std::vector<ObjectiveTerm>& terms, Index psd_dim);

struct EnvelopeOptions {
  /// Below this the multiplicative envelope degenerates; the additive form
  /// |<row, chi> - p| <= scale * slack is used instead.
  double p_min = 1e-6;
  /// Additive scale is 1 / shots when shots > 0, else additive_scale.
  std::uint64_t shots = 0;
  double additive_scale = 1e-3;
  /// Optional upper bound on the slack (kInf = unbounded).
  double max_slack = kInf;
};

/// Installs (1 - s) p <= <row, chi> <= (1 + s) p for slack s, as two
/// one-sided rows linear in (chi, s). Returns the number of rows added.
std::size_t add_noise_envelope(SdpProblem& problem, const RealVector& row, double p,
                               std::size_t slack_index, const EnvelopeOptions& options = {});

// JSON.
//
// {"psd_dim": n, "n_slack": m,
//  "objective": form,
//  "inequalities": [{"row": form, "lower": x|null, "upper": x|null}, ...],
//  "equalities": [{"row": form, "value": x}, ...]}
// form = {"chi": [n^2 reals], "slack": [[index, coeff], ...]}
// A null bound is infinite.
nlohmann::json to_json(const SdpProblem& p);
SdpProblem sdp_problem_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SdpSolution& s);

}  // namespace qpt

#endif  // QPT_SDP_HPP_

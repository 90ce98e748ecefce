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

#include <cmath>

#include "qpt/error.hpp"
#include "qpt/sdp.hpp"

namespace qpt {

namespace {

nlohmann::json form_to_json(const LinearForm& f) {
  auto slack = nlohmann::json::array();
  for (const auto& [j, v] : f.slack) slack.push_back({j, v});
  return {{"chi", std::vector<double>(f.chi.data(), f.chi.data() + f.chi.size())},
          {"slack", slack}};
}

LinearForm form_from_json(const nlohmann::json& j) {
  LinearForm f;
  const auto chi = j.at("chi").get<std::vector<double>>();
  f.chi = Eigen::Map<const RealVector>(chi.data(), static_cast<Index>(chi.size()));
  for (const auto& e : j.value("slack", nlohmann::json::array())) {
    f.slack.emplace_back(e.at(0).get<std::size_t>(), e.at(1).get<double>());
  }
  return f;
}

nlohmann::json bound_to_json(double x) {
  return std::isinf(x) ? nlohmann::json(nullptr) : nlohmann::json(x);
}

double bound_from_json(const nlohmann::json& j, double if_null) {
  return j.is_null() ? if_null : j.get<double>();
}

}  // namespace

double LinearForm::evaluate(const RealVector& chi_coords, const std::vector<double>& slacks) const {
  if (chi_coords.size() != chi.size()) throw DimensionError("LinearForm: chi length mismatch");
  double v = chi.dot(chi_coords);
  for (const auto& [j, c] : slack) {
    if (j >= slacks.size()) throw DimensionError("LinearForm: slack index out of range");
    v += c * slacks[j];
  }
  return v;
}

SdpProblem::SdpProblem(Index psd_dim_, std::size_t n_slack_) : psd_dim(psd_dim_), n_slack(n_slack_) {
  if (psd_dim < 0) throw InvariantError("SdpProblem: negative psd_dim");
  objective = zero_form();
}

std::size_t SdpProblem::add_slack() { return n_slack++; }

LinearForm SdpProblem::zero_form() const {
  return {RealVector::Zero(static_cast<Index>(n_chi())), {}};
}

void SdpProblem::validate() const {
  auto check_form = [&](const LinearForm& f, const std::string& what) {
    if (static_cast<std::size_t>(f.chi.size()) != n_chi()) {
      throw InvariantError("SdpProblem: " + what + " has " + std::to_string(f.chi.size()) +
                           " chi coefficients, expected " + std::to_string(n_chi()));
    }
    if (!f.chi.allFinite()) throw InvariantError("SdpProblem: " + what + " is not finite");
    for (const auto& [j, v] : f.slack) {
      if (j >= n_slack) throw InvariantError("SdpProblem: " + what + " references slack " +
                                             std::to_string(j) + " of " + std::to_string(n_slack));
      if (!std::isfinite(v)) throw InvariantError("SdpProblem: " + what + " is not finite");
    }
  };
  check_form(objective, "objective");
  for (std::size_t i = 0; i < inequalities.size(); ++i) {
    const auto& q = inequalities[i];
    check_form(q.row, "inequality " + std::to_string(i));
    if (std::isnan(q.lower) || std::isnan(q.upper) || q.lower > q.upper) {
      throw InvariantError("SdpProblem: inequality " + std::to_string(i) + " has lower > upper");
    }
  }
  for (std::size_t i = 0; i < equalities.size(); ++i) {
    check_form(equalities[i].row, "equality " + std::to_string(i));
    if (!std::isfinite(equalities[i].value)) {
      throw InvariantError("SdpProblem: equality " + std::to_string(i) + " value is not finite");
    }
  }
}

HermitianMatrix expectation_coefficients(const HermitianMatrix& rho, const HermitianMatrix& effect,
                                         const OperatorBasis& basis, bool ancilla) {
  const Index d = basis.d();
  const Index dim = ancilla ? d * d : d;
  if (rho.dim() != dim || effect.dim() != dim) {
    throw DimensionError("expectation_coefficients: state/effect dimension " +
                         std::to_string(rho.dim()) + "/" + std::to_string(effect.dim()) +
                         ", expected " + std::to_string(dim));
  }
  const auto n = static_cast<Index>(basis.size());
  const Index len = dim * dim;
  // Q_ij = Tr(effect F_i rho F_j^dagger) = vec(F_i rho) . vec((F_j^dagger effect)^T)
  ComplexMatrix left(n, len), right(n, len);
  const ComplexMatrix id = ComplexMatrix::Identity(d, d);
  for (Index i = 0; i < n; ++i) {
    const auto& e = basis[static_cast<std::size_t>(i)];
    const ComplexMatrix f = ancilla ? kron(id, e) : e;
    const ComplexMatrix b = f * rho.matrix();
    const ComplexMatrix a = (f.adjoint() * effect.matrix()).transpose();
    left.row(i) = Eigen::Map<const Eigen::RowVectorXcd>(b.data(), len);
    right.row(i) = Eigen::Map<const Eigen::RowVectorXcd>(a.data(), len);
  }
  const ComplexMatrix q = left * right.transpose();
  return HermitianMatrix(ComplexMatrix(q.conjugate()));
}

RealVector assemble_expectation_row(const HermitianMatrix& rho, const HermitianMatrix& effect,
                                    const OperatorBasis& basis, bool ancilla) {
  return vec_hermitian(expectation_coefficients(rho, effect, basis, ancilla)).coords;
}

LinearForm assemble_objective(const std::vector<ObjectiveTerm>& terms, Index psd_dim) {
  ComplexMatrix w = ComplexMatrix::Zero(psd_dim, psd_dim);
  LinearForm out;
  for (const auto& t : terms) {
    if (t.chi_weight.dim() != psd_dim) {
      throw DimensionError("assemble_objective: weight of side " +
                           std::to_string(t.chi_weight.dim()) + ", expected " +
                           std::to_string(psd_dim));
    }
    w += t.chi_weight.matrix();
    out.slack.insert(out.slack.end(), t.slack_weights.begin(), t.slack_weights.end());
  }
  out.chi = vec_hermitian(HermitianMatrix(w)).coords;
  return out;
}

std::size_t add_noise_envelope(SdpProblem& problem, const RealVector& row, double p,
                               std::size_t slack_index, const EnvelopeOptions& options) {
  if (!(p >= 0.0)) throw InvariantError("add_noise_envelope: negative probability");
  if (slack_index >= problem.n_slack) {
    throw InvariantError("add_noise_envelope: slack index " + std::to_string(slack_index) +
                         " not allocated");
  }
  if (static_cast<std::size_t>(row.size()) != problem.n_chi()) {
    throw DimensionError("add_noise_envelope: row length mismatch");
  }
  double scale = p;
  if (p < options.p_min) {
    scale = options.shots > 0 ? 1.0 / static_cast<double>(options.shots) : options.additive_scale;
  }
  // <row, chi> - scale * s <= p   and   <row, chi> + scale * s >= p.
  problem.inequalities.push_back({{row, {{slack_index, -scale}}}, -kInf, p});
  problem.inequalities.push_back({{row, {{slack_index, scale}}}, p, kInf});
  std::size_t added = 2;
  if (std::isfinite(options.max_slack)) {
    problem.inequalities.push_back(
        {{problem.zero_form().chi, {{slack_index, 1.0}}}, -kInf, options.max_slack});
    ++added;
  }
  return added;
}

nlohmann::json to_json(const SdpProblem& p) {
  auto ineq = nlohmann::json::array();
  for (const auto& q : p.inequalities) {
    ineq.push_back(
        {{"row", form_to_json(q.row)}, {"lower", bound_to_json(q.lower)}, {"upper", bound_to_json(q.upper)}});
  }
  auto eq = nlohmann::json::array();
  for (const auto& e : p.equalities) eq.push_back({{"row", form_to_json(e.row)}, {"value", e.value}});
  return {{"psd_dim", p.psd_dim},
          {"n_slack", p.n_slack},
          {"objective", form_to_json(p.objective)},
          {"inequalities", ineq},
          {"equalities", eq}};
}

SdpProblem sdp_problem_from_json(const nlohmann::json& j) {
  SdpProblem p(j.at("psd_dim").get<Index>(), j.value("n_slack", std::size_t{0}));
  if (j.contains("objective")) p.objective = form_from_json(j.at("objective"));
  for (const auto& q : j.value("inequalities", nlohmann::json::array())) {
    p.inequalities.push_back({form_from_json(q.at("row")), bound_from_json(q.value("lower", nlohmann::json()), -kInf),
                              bound_from_json(q.value("upper", nlohmann::json()), kInf)});
  }
  for (const auto& e : j.value("equalities", nlohmann::json::array())) {
    p.equalities.push_back({form_from_json(e.at("row")), e.at("value").get<double>()});
  }
  p.validate();
  return p;
}

nlohmann::json to_json(const SdpSolution& s) {
  return {{"status", to_string(s.status)},
          {"objective_value", s.objective_value},
          {"primal_residual", s.primal_residual},
          {"dual_residual", s.dual_residual},
          {"iterations", s.iterations},
          {"slacks", s.slacks},
          {"chi_block", matrix_to_json(s.chi_block.matrix())},
          {"diagnostics", s.diagnostics}};
}

}  // namespace qpt

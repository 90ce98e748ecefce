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

#include "qpt/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qpt/error.hpp"

namespace qpt {

namespace {

constexpr double kEnvelopeTolerance = 1e-7;

int qubits_of(Index d) {
  int n = 0;
  while ((Index{1} << n) < d) ++n;
  if ((Index{1} << n) != d || n < 1) {
    throw InvariantError("dimension " + std::to_string(d) + " is not a power of two >= 2");
  }
  return n;
}

std::vector<std::vector<std::size_t>> measured_per_probe(const TomographyDataset& data) {
  std::vector<std::vector<std::size_t>> measured(data.k_t());
  std::vector<std::vector<bool>> seen(data.k_t(), std::vector<bool>(data.effects.size(), false));
  for (const auto& r : data.records) {
    if (!seen[r.probe][r.effect]) {
      seen[r.probe][r.effect] = true;
      measured[r.probe].push_back(r.effect);
    }
  }
  return measured;
}

double envelope_scale(const MeasurementRecord& r, const EnvelopeOptions& env) {
  if (r.p >= env.p_min) return r.p;
  return r.shots > 0 ? 1.0 / static_cast<double>(r.shots) : env.additive_scale;
}

SdpProblem build_program(const TomographyDataset& data, const ReconstructOptions& options,
                         bool ancilla) {
  data.validate();
  if (data.records.empty()) {
    throw InvariantError("tomography program: no measurement records to fit");
  }
  const OperatorBasis& basis = *data.basis;
  const auto n = static_cast<Index>(basis.size());
  SdpProblem problem(n, data.records.size());
  const Index out_dim = data.probes.state_dim();
  const HermitianMatrix identity = HermitianMatrix::identity(out_dim);

  // sum_k Tr(out_k H_k) + sum_i slack_i
  const auto measured = measured_per_probe(data);
  std::vector<ObjectiveTerm> terms;
  for (std::size_t k = 0; k < data.k_t(); ++k) {
    const HermitianMatrix h = unknown_subspace_hamiltonian(data.effects, measured[k]);
    terms.push_back({expectation_coefficients(data.probes.states[k].rho(), h, basis, ancilla), {}});
  }
  ObjectiveTerm slack_term{HermitianMatrix::zero(n), {}};
  for (std::size_t i = 0; i < data.records.size(); ++i) slack_term.slack_weights.emplace_back(i, 1.0);
  terms.push_back(std::move(slack_term));
  problem.objective = assemble_objective(terms, n);

  // Tr(out_k) <= 1
  for (std::size_t k = 0; k < data.k_t(); ++k) {
    problem.inequalities.push_back(
        {{assemble_expectation_row(data.probes.states[k].rho(), identity, basis, ancilla), {}},
         -kInf,
         1.0});
  }

  for (std::size_t i = 0; i < data.records.size(); ++i) {
    const auto& r = data.records[i];
    EnvelopeOptions env = options.envelope;
    env.shots = r.shots;
    const RealVector row = assemble_expectation_row(data.probes.states[r.probe].rho(),
                                                    data.effects[r.effect], basis, ancilla);
    add_noise_envelope(problem, row, r.p, i, env);
  }

  // sum_ij chi_ij E_j^dagger E_i = I, one real equation per coordinate of
  // the Hermitian d x d left-hand side: Re Tr(B_c^dagger T(chi)) equals
  // Tr(sum_ij chi_ij E_i B_c E_j^dagger) for the coordinate matrix B_c.
  if (options.tp_constraint) {
    const Index d = basis.d();
    const RealVector target = vec_hermitian(HermitianMatrix::identity(d)).coords;
    const HermitianMatrix sys_identity = HermitianMatrix::identity(d);
    for (Index c = 0; c < d * d; ++c) {
      RealVectorization unit{d, RealVector::Zero(d * d)};
      unit.coords(c) = 1.0;
      const RealVector row =
          assemble_expectation_row(mat_hermitian(unit), sys_identity, basis, false);
      problem.equalities.push_back({{row, {}}, target(c)});
    }
  }
  return problem;
}

HermitianMatrix output_for(const ProcessMatrix& chi, const TomographyDataset& data, std::size_t k) {
  const auto& rho = data.probes.states[k].rho();
  return data.scheme == Scheme::kSqpt ? map_output(chi, rho) : map_output_extended(chi, rho);
}

}  // namespace

std::vector<std::size_t> TomographyDataset::n_k() const {
  std::vector<std::size_t> counts(k_t(), 0);
  for (const auto& r : records) {
    if (r.probe < counts.size()) ++counts[r.probe];
  }
  return counts;
}

void TomographyDataset::validate() const {
  if (!basis) throw InvariantError("dataset: missing operator basis");
  if (probes.d != basis->d()) throw DimensionError("dataset: probe and basis dimensions differ");
  if (probes.scheme != scheme) throw InvariantError("dataset: probe set built for another scheme");
  if (effects.dim() != probes.state_dim()) {
    throw DimensionError("dataset: effects act on dimension " + std::to_string(effects.dim()) +
                         ", outputs have dimension " + std::to_string(probes.state_dim()));
  }
  const auto d = static_cast<std::size_t>(basis->d());
  if (scheme == Scheme::kSqpt && k_t() != d * d) {
    throw InvariantError("dataset: SQPT needs d^2 = " + std::to_string(d * d) + " probes");
  }
  if (scheme == Scheme::kAapt && k_t() != 1) throw InvariantError("dataset: AAPT needs one probe");
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.probe >= k_t() || r.effect >= effects.size()) {
      throw InvariantError("dataset: record " + std::to_string(i) + " references probe " +
                           std::to_string(r.probe) + " / effect " + std::to_string(r.effect) +
                           " which do not exist");
    }
    if (!(r.p >= 0.0 && r.p <= 1.0)) {
      throw InvariantError("dataset: record " + std::to_string(i) + " has p outside [0, 1]");
    }
  }
}

TomographyDataset make_dataset(Scheme scheme, int n_qubits, std::vector<MeasurementRecord> records) {
  TomographyDataset data{scheme, build_scaled_pauli_basis(n_qubits),
                         probes_for_scheme(scheme, n_qubits), effects_for_scheme(scheme, n_qubits),
                         std::move(records)};
  data.validate();
  return data;
}

SdpProblem build_sqpt_program(const TomographyDataset& data, const ReconstructOptions& options) {
  if (data.scheme != Scheme::kSqpt) throw InvariantError("build_sqpt_program: dataset is not SQPT");
  return build_program(data, options, false);
}

SdpProblem build_aapt_program(const TomographyDataset& data, const ReconstructOptions& options) {
  if (data.scheme != Scheme::kAapt) throw InvariantError("build_aapt_program: dataset is not AAPT");
  return build_program(data, options, true);
}

ReconstructionResult reconstruct(const TomographyDataset& data, const ReconstructOptions& options) {
  ReconstructionResult result;
  if (data.scheme == Scheme::kAapt) {
    const Index d = data.d();
    if (operator_schmidt_rank(data.probes.states[0].rho(), d) < d * d) {
      result.warnings.push_back(
          "AAPT probe is not of full Schmidt rank; the reconstruction is not unique");
    }
  }
  const SdpProblem problem = data.scheme == Scheme::kSqpt ? build_sqpt_program(data, options)
                                                          : build_aapt_program(data, options);
  SolverOptions so = options.solver;
  so.tol = options.tol;
  so.max_iter = options.max_iter;
  result.solver = solve(problem, so);

  const ProcessMatrix candidate(data.basis, psd_project(result.solver.chi_block));
  std::vector<HermitianMatrix> outputs;
  outputs.reserve(data.k_t());
  for (std::size_t k = 0; k < data.k_t(); ++k) outputs.push_back(output_for(candidate, data, k));

  // Post-hoc envelope check through the channel action.
  const bool have_slacks = result.solver.slacks.size() == data.records.size();
  std::vector<double> violation(data.records.size(), 0.0);
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    const auto& r = data.records[i];
    const double v = hs_inner(data.effects[r.effect].matrix(), outputs[r.probe].matrix()).real();
    const double slack = have_slacks ? result.solver.slacks[i] : 0.0;
    const double width = envelope_scale(r, options.envelope) * slack;
    violation[i] = std::max({0.0, (r.p - width) - v, v - (r.p + width)});
  }
  result.max_envelope_violation =
      violation.empty() ? 0.0 : *std::max_element(violation.begin(), violation.end());

  if (result.solver.status != SolveStatus::kOptimal) {
    // Rank records by how far the best iterate is from their measured value.
    std::vector<double> miss(data.records.size());
    for (std::size_t i = 0; i < data.records.size(); ++i) {
      const auto& r = data.records[i];
      const double v = hs_inner(data.effects[r.effect].matrix(), outputs[r.probe].matrix()).real();
      miss[i] = std::abs(v - r.p) / envelope_scale(r, options.envelope);
    }
    result.worst_records.resize(data.records.size());
    std::iota(result.worst_records.begin(), result.worst_records.end(), 0);
    std::stable_sort(result.worst_records.begin(), result.worst_records.end(),
                     [&](std::size_t a, std::size_t b) { return miss[a] > miss[b]; });
    result.worst_records.resize(std::min<std::size_t>(result.worst_records.size(), 8));
  }

  if (result.solver.status == SolveStatus::kInfeasible) {
    result.warnings.push_back("solver certified the program infeasible: " +
                              result.solver.diagnostics);
    return result;
  }
  if (result.solver.status == SolveStatus::kMaxIter) {
    result.warnings.push_back("solver hit the iteration limit; residuals " +
                              std::to_string(result.solver.primal_residual) + " / " +
                              std::to_string(result.solver.dual_residual));
  }
  if (result.max_envelope_violation > kEnvelopeTolerance) {
    result.warnings.push_back("noise envelope violated by " +
                              std::to_string(result.max_envelope_violation));
  }

  result.chi_hat = candidate;
  for (const auto& out : outputs) result.per_probe_trace.push_back(out.trace());
  for (double s : result.solver.slacks) result.slack_sum += s;
  return result;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw InvariantError("quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

SweepResult minimal_elements_sweep(const KrausSet& channel, Scheme scheme, double fidelity_threshold,
                                   std::size_t trials, const RngSeed& seed,
                                   const SweepOptions& options) {
  if (!(fidelity_threshold >= 0.0 && fidelity_threshold < 1.0)) {
    throw InvariantError("minimal_elements_sweep: threshold must lie in [0, 1)");
  }
  if (trials < 1) throw InvariantError("minimal_elements_sweep: need at least one trial");

  const int n_qubits = qubits_of(channel.d());
  const BasisPtr basis = build_scaled_pauli_basis(n_qubits);
  const ProcessMatrix truth = kraus_to_chi(channel, basis);
  const ProbeSet probes = probes_for_scheme(scheme, n_qubits);
  const EffectSet effects = effects_for_scheme(scheme, n_qubits);
  const auto d = static_cast<std::size_t>(channel.d());

  SweepResult result;
  result.complete_count = d * d * d * d;
  std::vector<double> minima;

  for (std::size_t trial = 0; trial < trials; ++trial) {
    const std::uint64_t trial_seed = derive_seed(seed.seed, {trial});
    const auto complete = simulate_measurements(truth, probes, effects, all_effects(probes, effects),
                                                options.shots,
                                                {derive_seed(trial_seed, {1}), seed.generator_id});
    std::vector<std::size_t> order(complete.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng({derive_seed(trial_seed, {2}), seed.generator_id});
    rng.shuffle(order);

    // Prefix lengths at which the independent count first reaches each value.
    struct Step {
      std::size_t length;
      std::size_t count;
    };
    std::vector<Step> steps;
    std::vector<SpanTracker> trackers(probes.states.size());
    std::size_t count = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
      const auto& r = complete[order[i]];
      if (trackers[r.probe].add(effects[r.effect].matrix())) {
        ++count;
        steps.push_back({i + 1, count});
      }
    }

    auto evaluate = [&](std::size_t length, std::size_t independent) {
      std::vector<MeasurementRecord> subset;
      subset.reserve(length);
      for (std::size_t i = 0; i < length; ++i) subset.push_back(complete[order[i]]);
      TomographyDataset data{scheme, basis, probes, effects, std::move(subset)};
      const ReconstructionResult rec = reconstruct(data, options.reconstruct);
      result.solver_iterations += rec.solver.iterations;
      double f = 0.0;
      if (rec.chi_hat) {
        try {
          f = process_fidelity(*rec.chi_hat, truth);
        } catch (const InvariantError&) {
          f = 0.0;  // zero-trace reconstruction
        }
      }
      result.trace.push_back({trial, independent, length, f});
      if (length == complete.size() && trial == 0) {
        result.final_fidelity = f;
        result.final_reconstruction = rec.chi_hat;
      }
      return f;
    };

    std::size_t minimal = result.complete_count;
    bool found = false;
    if (options.search == SweepSearch::kLinear) {
      std::size_t last_length = 0;
      for (const auto& s : steps) {
        const double f = evaluate(s.length, s.count);
        last_length = s.length;
        if (f >= fidelity_threshold && !found) {
          found = true;
          minimal = s.count;
          if (options.stop_at_threshold) break;
        }
      }
      if (last_length != complete.size() && (options.include_complete || !found)) {
        const double f = evaluate(complete.size(), count);
        if (!found && f >= fidelity_threshold) {
          found = true;
          minimal = count;
        }
      }
    } else {
      const double f_complete = evaluate(complete.size(), count);
      if (f_complete >= fidelity_threshold) {
        found = true;
        // Smallest step index whose prefix reaches the threshold; index
        // steps.size() stands for the complete set.
        std::size_t lo = 0, hi = steps.size();
        while (lo < hi) {
          const std::size_t mid = lo + (hi - lo) / 2;
          if (steps[mid].length == complete.size()) {
            hi = mid;
            continue;
          }
          if (evaluate(steps[mid].length, steps[mid].count) >= fidelity_threshold) hi = mid;
          else lo = mid + 1;
        }
        minimal = hi < steps.size() ? steps[hi].count : count;
      }
    }
    if (!found) result.saturated = true;
    result.per_trial_minimal.push_back(minimal);
    minima.push_back(static_cast<double>(minimal));
  }
  result.minimal_independent_count = median(minima);
  return result;
}

nlohmann::json to_json(const ReconstructionResult& r) {
  nlohmann::json j = {{"status", to_string(r.solver.status)},
                      {"slack_sum", r.slack_sum},
                      {"per_probe_trace", r.per_probe_trace},
                      {"max_envelope_violation", r.max_envelope_violation},
                      {"iterations", r.solver.iterations},
                      {"primal_residual", r.solver.primal_residual},
                      {"dual_residual", r.solver.dual_residual},
                      {"objective_value", r.solver.objective_value},
                      {"worst_records", r.worst_records},
                      {"warnings", r.warnings}};
  j["chi_hat"] = r.chi_hat ? to_json(*r.chi_hat) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json dataset_to_json(const TomographyDataset& data, int n_qubits,
                               const std::optional<ProcessMatrix>& ground_truth) {
  auto records = nlohmann::json::array();
  for (const auto& r : data.records) records.push_back(to_json(r));
  nlohmann::json j = {{"scheme", to_string(data.scheme)}, {"n_qubits", n_qubits}, {"records", records}};
  if (ground_truth) j["ground_truth"] = to_json(*ground_truth);
  return j;
}

TomographyDataset dataset_from_json(const nlohmann::json& j) {
  std::vector<MeasurementRecord> records;
  for (const auto& r : j.at("records")) records.push_back(record_from_json(r));
  return make_dataset(scheme_from_string(j.at("scheme").get<std::string>()), j.at("n_qubits").get<int>(),
                      std::move(records));
}

}  // namespace qpt

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

/// \file tomography.hpp
/// \brief Variational process tomography from incomplete, noisy data.
///
/// Both estimators solve
///
///   minimize   sum_k Tr(out_k H_k) + sum_records slack
///   subject to chi PSD, Tr(out_k) <= 1, slack >= 0,
///              (1 - slack) p <= Tr(E out_k) <= (1 + slack) p  per record,
///
/// where out_k is the channel output for probe k and H_k is the sum of the
/// effects not measured on probe k. SQPT feeds d^2 product states through
/// the channel; AAPT feeds one maximally entangled system-ancilla state.

#ifndef QPT_TOMOGRAPHY_HPP_
#define QPT_TOMOGRAPHY_HPP_

#include <optional>
#include <string>
#include <vector>

#include "qpt/channel.hpp"
#include "qpt/probes.hpp"
#include "qpt/sdp.hpp"

namespace qpt {

struct TomographyDataset {
  Scheme scheme = Scheme::kSqpt;
  BasisPtr basis;
  ProbeSet probes;
  EffectSet effects;
  std::vector<MeasurementRecord> records;

  Index d() const { return basis->d(); }
  std::size_t k_t() const { return probes.states.size(); }
  /// Records per probe.
  std::vector<std::size_t> n_k() const;

  /// Throws InvariantError when a record references a missing probe or
  /// effect, dimensions disagree, or k_t does not match the scheme.
  void validate() const;
};

/// Dataset over the shipped basis, probes and effects for n qubits.
TomographyDataset make_dataset(Scheme scheme, int n_qubits, std::vector<MeasurementRecord> records);

struct ReconstructOptions {
  bool tp_constraint = false;
  double tol = 1e-7;
  std::size_t max_iter = 200000;
  /// p_min, additive scale and slack cap; shots are taken per record.
  EnvelopeOptions envelope;
  /// Solver knobs other than tol / max_iter.
  SolverOptions solver;
};

/// Variables: chi (side d^2) and one slack per record, slack i <-> record i.
SdpProblem build_sqpt_program(const TomographyDataset& data, const ReconstructOptions& options = {});
SdpProblem build_aapt_program(const TomographyDataset& data, const ReconstructOptions& options = {});

struct ReconstructionResult {
  /// Empty when the solver certified infeasibility.
  std::optional<ProcessMatrix> chi_hat;
  double slack_sum = 0.0;
  std::vector<double> per_probe_trace;
  SdpSolution solver;
  /// Largest violation of any installed noise envelope, re-evaluated from
  /// chi_hat through the channel action (not through the program rows).
  double max_envelope_violation = 0.0;
  /// Records ordered by decreasing envelope violation (filled when the
  /// solve is not Optimal).
  std::vector<std::size_t> worst_records;
  std::vector<std::string> warnings;

  bool ok() const { return solver.status == SolveStatus::kOptimal && chi_hat.has_value(); }
};

ReconstructionResult reconstruct(const TomographyDataset& data, const ReconstructOptions& options = {});

enum class SweepSearch {
  /// Reconstruct after every element that raises the independent count.
  kLinear,
  /// Binary search over the independent counts, assuming fidelity grows
  /// with information. Far fewer solves; exact when fidelity is monotone.
  kBisect,
};

struct SweepOptions {
  std::uint64_t shots = 0;
  SweepSearch search = SweepSearch::kLinear;
  /// Linear search stops at the first count reaching the threshold.
  bool stop_at_threshold = true;
  /// Always reconstruct from the complete record set as the last point.
  bool include_complete = true;
  ReconstructOptions reconstruct;
};

struct SweepPoint {
  std::size_t trial = 0;
  std::size_t independent_count = 0;
  std::size_t n_records = 0;
  double fidelity = 0.0;
};

struct SweepResult {
  /// Median over trials of the smallest independent count reaching the
  /// threshold.
  double minimal_independent_count = 0.0;
  std::vector<std::size_t> per_trial_minimal;
  std::vector<SweepPoint> trace;
  /// Some trial did not reach the threshold even with complete data.
  bool saturated = false;
  /// Independent count of the complete record set (d^4).
  std::size_t complete_count = 0;
  /// Fidelity of the complete-data reconstruction of the first trial.
  double final_fidelity = 0.0;
  std::size_t solver_iterations = 0;
  std::optional<ProcessMatrix> final_reconstruction;
};

/// Adds randomly ordered (probe, effect) records one at a time and reports
/// the number of independent elements needed to reach the fidelity
/// threshold. The independent count is the sum over probes of the
/// Hilbert-Schmidt rank of the effects measured on that probe.
SweepResult minimal_elements_sweep(const KrausSet& channel, Scheme scheme, double fidelity_threshold,
                                   std::size_t trials, const RngSeed& seed,
                                   const SweepOptions& options = {});

/// Median with linear interpolation between the two middle elements.
double median(std::vector<double> v);
/// Quantile (type 7: linear interpolation between order statistics).
double quantile(std::vector<double> v, double q);

nlohmann::json to_json(const ReconstructionResult& r);

/// Dataset file: {"scheme": "sqpt"|"aapt", "n_qubits": n,
///                "records": [{"k", "lambda", "p", "shots"}, ...],
///                "ground_truth": <process matrix JSON>  (optional)}
nlohmann::json dataset_to_json(const TomographyDataset& data, int n_qubits,
                               const std::optional<ProcessMatrix>& ground_truth);
TomographyDataset dataset_from_json(const nlohmann::json& j);

}  // namespace qpt

#endif  // QPT_TOMOGRAPHY_HPP_

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

/// \file probes.hpp
/// \brief Synthetic tomography data: random channels, probe states,
/// measurement effects and simulated outcome probabilities.

#ifndef QPT_PROBES_HPP_
#define QPT_PROBES_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qpt/channel.hpp"
#include "qpt/random.hpp"

namespace qpt {

enum class Scheme { kSqpt, kAapt };

std::string to_string(Scheme s);
/// Accepts "sqpt" / "aapt" (case-insensitive).
Scheme scheme_from_string(const std::string& s);

/// Input states fed to the unknown channel.
///
/// SQPT: d^2 linearly independent states on the system.
/// AAPT: a single state on ancilla (x) system (dimension d^2) with full
/// Schmidt rank; the channel acts on the second factor.
struct ProbeSet {
  Index d = 0;  // system dimension
  std::vector<DensityMatrix> states;
  Scheme scheme = Scheme::kSqpt;

  Index state_dim() const { return scheme == Scheme::kSqpt ? d : d * d; }
};

/// PSD effects summing to the identity.
class EffectSet {
 public:
  /// Throws InvariantError if an effect is not PSD or the sum is not I.
  EffectSet(std::vector<HermitianMatrix> effects, std::vector<std::string> labels);

  Index dim() const { return dim_; }
  std::size_t size() const { return effects_.size(); }
  const HermitianMatrix& operator[](std::size_t i) const { return effects_[i]; }
  const std::vector<HermitianMatrix>& effects() const { return effects_; }
  const std::vector<std::string>& labels() const { return labels_; }

 private:
  Index dim_ = 0;
  std::vector<HermitianMatrix> effects_;
  std::vector<std::string> labels_;
};

/// One observed probability p = Tr(E_lambda rho_out^k).
struct MeasurementRecord {
  std::size_t probe = 0;   // k
  std::size_t effect = 0;  // lambda
  double p = 0.0;
  std::uint64_t shots = 0;  // 0 = exact

  bool operator==(const MeasurementRecord&) const = default;
};

/// Trace-preserving channel with exactly `rank` Kraus operators, cut from a
/// Haar-random isometry d -> rank * d (environment index first).
KrausSet random_channel(Index d, std::size_t rank, const RngSeed& seed);

/// Haar-random unitary via QR of a complex Ginibre matrix with phase-fixed R.
ComplexMatrix haar_unitary(Index n, Rng& rng);
/// First `cols` columns of a Haar-random n x n unitary.
ComplexMatrix haar_isometry(Index n, Index cols, Rng& rng);

/// Products of {|0><0|, |1><1|, |+><+|, |+i><+i|}, qubit 0 most significant.
ProbeSet sqpt_probe_states(int n_qubits);

/// |phi+><phi+| on ancilla (x) system, |phi+> = sum_j |jj> / sqrt(d).
ProbeSet aapt_probe_state(int n_qubits);

/// 6^n effects: products over qubits of (I + s sigma_a)/2, a in {x,y,z},
/// s = +-1, divided by 3^n. Per-qubit order +x, -x, +y, -y, +z, -z; labels
/// such as "+x-z".
EffectSet pauli_projector_effects(int n_qubits);

/// Effects for a scheme: pauli_projector_effects(n) for SQPT, (2n) for AAPT.
EffectSet effects_for_scheme(Scheme scheme, int n_qubits);
ProbeSet probes_for_scheme(Scheme scheme, int n_qubits);

/// Channel output for probe k (apply_map for SQPT, (I (x) E) for AAPT).
DensityMatrix probe_output(const ProcessMatrix& chi, const ProbeSet& probes, std::size_t k);

/// Simulates p = Tr(E_lambda output_k) for each selected (k, lambda). With
/// shots > 0 each p becomes a binomial frequency. selected[k] lists the
/// effect indices measured on probe k; missing trailing probes are empty.
std::vector<MeasurementRecord> simulate_measurements(
    const ProcessMatrix& chi, const ProbeSet& probes, const EffectSet& effects,
    const std::vector<std::vector<std::size_t>>& selected, std::uint64_t shots,
    const RngSeed& seed);

/// Every effect on every probe.
std::vector<std::vector<std::size_t>> all_effects(const ProbeSet& probes,
                                                  const EffectSet& effects);

/// I - sum of the measured effects, i.e. the sum of the unmeasured ones.
/// Throws InvariantError on duplicate or out-of-range indices.
HermitianMatrix unknown_subspace_hamiltonian(const EffectSet& effects,
                                             const std::vector<std::size_t>& measured);

/// CSV with header "k,lambda,p,shots"; p printed in shortest round-trip form.
void write_records_csv(std::ostream& os, const std::vector<MeasurementRecord>& records);
std::vector<MeasurementRecord> read_records_csv(std::istream& is);

nlohmann::json to_json(const MeasurementRecord& r);
MeasurementRecord record_from_json(const nlohmann::json& j);

/// Shortest decimal that round-trips the double.
std::string format_double(double x);

}  // namespace qpt

#endif  // QPT_PROBES_HPP_

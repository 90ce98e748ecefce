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

/// \file harness.hpp
/// \brief Seeded batch runs of the minimal-elements sweep over random
/// channels of every requested rank, and the run bundle they produce.

#ifndef QPT_HARNESS_HPP_
#define QPT_HARNESS_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qpt/error.hpp"
#include "qpt/tomography.hpp"

namespace qpt {

/// Malformed or invalid experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct ExperimentConfig {
  int n_qubits = 2;
  Scheme scheme = Scheme::kSqpt;
  /// Empty means every rank 1..d^2.
  std::vector<std::size_t> ranks;
  std::size_t channels_per_rank = 20;
  std::uint64_t shots = 0;
  double fidelity_threshold = 0.99;
  std::size_t sweep_trials = 5;
  SweepSearch search = SweepSearch::kLinear;
  bool tp_constraint = false;
  double tol = 1e-7;
  std::size_t max_iter = 200000;
  RngSeed master_seed{20260101};
  std::string output_dir = "runs/latest";
  /// 0 = hardware concurrency.
  std::size_t workers = 0;

  /// Ranks with the empty default expanded.
  std::vector<std::size_t> effective_ranks() const;
  /// Throws ConfigError.
  void validate() const;
};

/// Parses a JSON config. Syntax errors are reported with line and column;
/// unknown keys, wrong types and out-of-range values throw ConfigError.
ExperimentConfig parse_config(const std::string& text);

/// Reads and parses a config file. QPT_OUTPUT_DIR, when set, overrides
/// output_dir.
ExperimentConfig load_config(const std::filesystem::path& path, std::string* text_out = nullptr);

nlohmann::json to_json(const ExperimentConfig& cfg);

struct ChannelOutcome {
  std::size_t rank = 0;
  std::size_t channel = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  double minimal_independent_count = 0.0;
  std::vector<std::size_t> per_trial_minimal;
  bool saturated = false;
  double final_fidelity = 0.0;
  std::size_t solver_iterations = 0;
  double wall_seconds = 0.0;
  std::optional<KrausSet> kraus;
  std::optional<ProcessMatrix> reconstruction;
};

struct RankSummary {
  std::size_t rank = 0;
  std::size_t n_channels = 0;
  std::size_t n_failed = 0;
  /// Empty when every channel of the rank failed.
  std::optional<double> median;
  std::optional<double> q1;
  std::optional<double> q3;

  bool operator==(const RankSummary&) const = default;
};

struct ExperimentResult {
  ExperimentConfig config;
  /// Ordered by (rank, channel) regardless of completion order.
  std::vector<ChannelOutcome> outcomes;
  std::vector<std::string> log;
  double wall_seconds = 0.0;

  std::vector<RankSummary> summaries() const;
};

/// Seed of channel c at rank r: derive_seed(master, {r, c}).
std::uint64_t channel_seed(const ExperimentConfig& cfg, std::size_t rank, std::size_t channel);

/// Work for one (rank, channel) pair.
using ChannelTask = std::function<ChannelOutcome(const ExperimentConfig&, std::size_t rank, std::size_t channel)>;

/// The default task: draw the seeded channel and run minimal_elements_sweep.
ChannelOutcome sweep_channel(const ExperimentConfig& cfg, std::size_t rank, std::size_t channel);

/// Runs every (rank, channel) task on a worker pool. A task that throws is
/// recorded as failed with its seed; the batch continues.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const ChannelTask& task = sweep_channel);

/// fig1.csv (rank,median_min_elements,q1,q3,n_channels,n_failed) and fig1.json.
void emit_plot_data(const ExperimentResult& result, const std::filesystem::path& dir);
void write_plot_csv(std::ostream& os, const std::vector<RankSummary>& rows);
std::vector<RankSummary> read_plot_csv(std::istream& is);

/// Runs the experiment and writes the bundle at cfg.output_dir. The bundle
/// is assembled in a sibling temporary directory and renamed into place, so
/// the target either holds a complete bundle or is untouched. config_text is
/// copied verbatim to config.json.
ExperimentResult run_to_bundle(const ExperimentConfig& cfg, const std::string& config_text,
                               const ChannelTask& task = sweep_channel);

}  // namespace qpt

#endif  // QPT_HARNESS_HPP_

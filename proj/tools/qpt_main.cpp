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

// qpt: command-line front end.
//
//   qpt run --config cfg.json
//   qpt reconstruct --dataset data.json [--tp] [--tol 1e-7] [--max-iter N]
//   qpt gen-channel --qubits 1 --rank 2 --seed 7 [--out ch.json]
//   qpt simulate --channel ch.json --scheme sqpt [--shots N] [--seed S] [--out data.json]
//   qpt solve-sdp --problem sdp.json
//
// Exit status: 0 success, 1 usage or configuration error, 2 runtime failure.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qpt/harness.hpp"

namespace {

constexpr int kUsage = 1;
constexpr int kFailure = 2;

nlohmann::json read_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw qpt::ConfigError("cannot open " + path);
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw qpt::ConfigError(path + ": " + e.what());
  }
}

void emit(const std::string& out, const nlohmann::json& j) {
  if (out.empty() || out == "-") {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream os(out);
  os << j.dump(2) << "\n";
  if (!os) throw qpt::Error("cannot write " + out);
}

int cmd_run(const std::string& config_path, bool json) {
  std::string text;
  const qpt::ExperimentConfig cfg = qpt::load_config(config_path, &text);
  const qpt::ExperimentResult result = qpt::run_to_bundle(cfg, text);
  std::size_t failed = 0;
  for (const auto& o : result.outcomes) failed += o.failed ? 1 : 0;
  if (json) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& s : result.summaries()) {
      rows.push_back({{"rank", s.rank},
                      {"median_min_elements", s.median ? nlohmann::json(*s.median) : nlohmann::json()},
                      {"n_channels", s.n_channels},
                      {"n_failed", s.n_failed}});
    }
    std::cout << nlohmann::json{{"output_dir", cfg.output_dir}, {"failed_tasks", failed}, {"ranks", rows}}.dump(2)
              << "\n";
  } else {
    std::cout << "output_dir=" << cfg.output_dir << "\nfailed_tasks=" << failed << "\n";
    qpt::write_plot_csv(std::cout, result.summaries());
  }
  return 0;
}

int cmd_reconstruct(const std::string& path, bool tp, double tol, std::size_t max_iter, bool json) {
  const nlohmann::json j = read_json(path);
  const qpt::TomographyDataset data = [&] {
    try {
      return qpt::dataset_from_json(j);
    } catch (const nlohmann::json::exception& e) {
      throw qpt::ConfigError(path + ": " + e.what());
    }
  }();
  qpt::ReconstructOptions opts;
  opts.tp_constraint = tp;
  opts.tol = tol;
  opts.max_iter = max_iter;
  const qpt::ReconstructionResult r = qpt::reconstruct(data, opts);
  std::optional<double> fidelity;
  if (j.contains("ground_truth") && r.chi_hat) {
    fidelity = qpt::process_fidelity(*r.chi_hat, qpt::process_matrix_from_json(j.at("ground_truth")));
  }
  if (json) {
    nlohmann::json out = qpt::to_json(r);
    out["fidelity"] = fidelity ? nlohmann::json(*fidelity) : nlohmann::json();
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "status=" << qpt::to_string(r.solver.status) << "\n"
              << "iterations=" << r.solver.iterations << "\n"
              << "slack_sum=" << qpt::format_double(r.slack_sum) << "\n";
    if (fidelity) std::cout << "fidelity=" << qpt::format_double(*fidelity) << "\n";
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  }
  return r.chi_hat ? 0 : kFailure;
}

int cmd_gen_channel(int qubits, std::size_t rank, std::uint64_t seed, const std::string& out) {
  if (qubits < 1 || qubits > 6) throw qpt::ConfigError("--qubits must be in [1, 6]");
  const qpt::Index d = qpt::Index{1} << qubits;
  const qpt::KrausSet kraus = qpt::random_channel(d, rank, {seed});
  const qpt::ProcessMatrix chi = qpt::kraus_to_chi(kraus, qpt::build_scaled_pauli_basis(qubits));
  emit(out, {{"n_qubits", qubits},
             {"rank", rank},
             {"seed", seed},
             {"generator_id", qpt::kGeneratorId},
             {"kraus", qpt::to_json(kraus)},
             {"chi", qpt::to_json(chi)}});
  return 0;
}

int cmd_simulate(const std::string& channel_path, const std::string& scheme_name, std::uint64_t shots,
                 std::uint64_t seed, const std::string& out) {
  const nlohmann::json ch = read_json(channel_path);
  const qpt::Scheme scheme = qpt::scheme_from_string(scheme_name);
  const qpt::ProcessMatrix chi = qpt::process_matrix_from_json(ch.at("chi"));
  int n_qubits = 0;
  while ((qpt::Index{1} << n_qubits) < chi.d()) ++n_qubits;
  const qpt::ProbeSet probes = qpt::probes_for_scheme(scheme, n_qubits);
  const qpt::EffectSet effects = qpt::effects_for_scheme(scheme, n_qubits);
  auto records = qpt::simulate_measurements(chi, probes, effects, qpt::all_effects(probes, effects), shots, {seed});
  const qpt::TomographyDataset data = qpt::make_dataset(scheme, n_qubits, std::move(records));
  emit(out, qpt::dataset_to_json(data, n_qubits, chi));
  return 0;
}

int cmd_solve_sdp(const std::string& path, double tol, std::size_t max_iter, bool json) {
  const nlohmann::json j = read_json(path);
  qpt::SdpProblem problem;
  try {
    problem = qpt::sdp_problem_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw qpt::ConfigError(path + ": " + e.what());
  }
  const qpt::SdpSolution s = qpt::solve(problem, tol, max_iter);
  if (json) {
    std::cout << qpt::to_json(s).dump(2) << "\n";
  } else {
    std::cout << "status=" << qpt::to_string(s.status) << "\n"
              << "objective=" << qpt::format_double(s.objective_value) << "\n"
              << "iterations=" << s.iterations << "\n"
              << "primal_residual=" << qpt::format_double(s.primal_residual) << "\n"
              << "dual_residual=" << qpt::format_double(s.dual_residual) << "\n";
  }
  return s.status == qpt::SolveStatus::kInfeasible ? kFailure : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variational quantum process tomography"};
  app.require_subcommand(1);
  bool json = false;
  app.add_flag("--json", json, "Machine-readable JSON output");

  std::string config;
  auto* run = app.add_subcommand("run", "Run a rank sweep experiment and write its bundle");
  run->add_option("--config", config, "Experiment config (JSON)")->required();

  std::string dataset;
  bool tp = false;
  double tol = 1e-7;
  std::size_t max_iter = 200000;
  auto* rec = app.add_subcommand("reconstruct", "Reconstruct chi from a dataset file");
  rec->add_option("--dataset", dataset, "Dataset (JSON)")->required();
  rec->add_flag("--tp", tp, "Impose trace preservation");
  rec->add_option("--tol", tol, "Solver tolerance")->check(CLI::PositiveNumber);
  rec->add_option("--max-iter", max_iter, "Solver iteration limit")->check(CLI::PositiveNumber);

  int qubits = 1;
  std::size_t rank = 1;
  std::uint64_t seed = 0;
  std::string out;
  auto* gen = app.add_subcommand("gen-channel", "Emit a seeded Haar-random channel");
  gen->add_option("--qubits", qubits, "Number of qubits")->required();
  gen->add_option("--rank", rank, "Kraus rank")->required();
  gen->add_option("--seed", seed, "Seed")->required();
  gen->add_option("--out", out, "Output file (default stdout)");

  std::string channel;
  std::string scheme = "sqpt";
  std::uint64_t shots = 0;
  auto* sim = app.add_subcommand("simulate", "Simulate complete measurement data for a channel");
  sim->add_option("--channel", channel, "Channel file from gen-channel")->required();
  sim->add_option("--scheme", scheme, "sqpt or aapt")->check(CLI::IsMember({"sqpt", "aapt"}));
  sim->add_option("--shots", shots, "Shots per effect (0 = exact)");
  sim->add_option("--seed", seed, "Sampling seed");
  sim->add_option("--out", out, "Output file (default stdout)");

  std::string problem;
  auto* sdp = app.add_subcommand("solve-sdp", "Solve an SDP problem file");
  sdp->add_option("--problem", problem, "Problem (JSON)")->required();
  sdp->add_option("--tol", tol, "Solver tolerance")->check(CLI::PositiveNumber);
  sdp->add_option("--max-iter", max_iter, "Solver iteration limit")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    if (*run) return cmd_run(config, json);
    if (*rec) return cmd_reconstruct(dataset, tp, tol, max_iter, json);
    if (*gen) return cmd_gen_channel(qubits, rank, seed, out);
    if (*sim) return cmd_simulate(channel, scheme, shots, seed, out);
    if (*sdp) return cmd_solve_sdp(problem, tol, max_iter, json);
  } catch (const qpt::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

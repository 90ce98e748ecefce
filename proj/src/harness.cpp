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

#include "qpt/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>

namespace qpt {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kConfigKeys = {
    "n_qubits", "scheme",        "ranks",       "channels_per_rank", "shots",
    "fidelity_threshold",        "sweep_trials", "search",           "tp_constraint",
    "solver",   "master_seed",   "output_dir",  "workers"};

std::string line_col(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

// Location of the first occurrence of "key" in the source, for messages.
std::string where(const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  return pos == std::string::npos ? std::string("config") : line_col(text, pos);
}

template <typename T>
void read_field(const nlohmann::json& j, const std::string& text, const std::string& key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(where(text, key) + ": field '" + key + "' has the wrong type (" + e.what() + ")");
  }
}

SweepSearch search_from_string(const std::string& s) {
  if (s == "linear") return SweepSearch::kLinear;
  if (s == "bisect") return SweepSearch::kBisect;
  throw ConfigError("search must be \"linear\" or \"bisect\", got \"" + s + "\"");
}

std::string to_string(SweepSearch s) { return s == SweepSearch::kLinear ? "linear" : "bisect"; }

std::string task_name(std::size_t rank, std::size_t channel) {
  std::ostringstream os;
  os << "r" << std::setw(2) << std::setfill('0') << rank << "_c" << std::setw(3) << channel;
  return os.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  os << content;
  os.close();
  if (!os) throw Error("cannot write " + path.string());
}

std::string optional_field(const std::optional<double>& x) { return x ? format_double(*x) : ""; }

}  // namespace

ChannelOutcome sweep_channel(const ExperimentConfig& cfg, std::size_t rank, std::size_t channel) {
  ChannelOutcome out;
  out.rank = rank;
  out.channel = channel;
  out.seed = channel_seed(cfg, rank, channel);
  const auto start = std::chrono::steady_clock::now();
  const Index d = Index{1} << cfg.n_qubits;
  KrausSet kraus = random_channel(d, rank, {derive_seed(out.seed, {0}), cfg.master_seed.generator_id});
  SweepOptions so;
  so.shots = cfg.shots;
  so.search = cfg.search;
  so.reconstruct.tp_constraint = cfg.tp_constraint;
  so.reconstruct.tol = cfg.tol;
  so.reconstruct.max_iter = cfg.max_iter;
  const SweepResult sweep =
      minimal_elements_sweep(kraus, cfg.scheme, cfg.fidelity_threshold, cfg.sweep_trials,
                             {derive_seed(out.seed, {1}), cfg.master_seed.generator_id}, so);
  out.minimal_independent_count = sweep.minimal_independent_count;
  out.per_trial_minimal = sweep.per_trial_minimal;
  out.saturated = sweep.saturated;
  out.final_fidelity = sweep.final_fidelity;
  out.solver_iterations = sweep.solver_iterations;
  out.reconstruction = sweep.final_reconstruction;
  out.kraus = std::move(kraus);
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

namespace {

std::string results_csv(const ExperimentResult& r) {
  std::ostringstream os;
  os << "rank,channel,seed,status,minimal_independent_count,per_trial_minimal,saturated,"
        "final_fidelity,solver_iterations\n";
  for (const auto& o : r.outcomes) {
    os << o.rank << ',' << o.channel << ',' << o.seed << ',' << (o.failed ? "failed" : "ok") << ',';
    if (!o.failed) {
      os << format_double(o.minimal_independent_count) << ',';
      for (std::size_t i = 0; i < o.per_trial_minimal.size(); ++i) {
        os << (i ? ";" : "") << o.per_trial_minimal[i];
      }
      os << ',' << (o.saturated ? 1 : 0) << ',' << format_double(o.final_fidelity) << ','
         << o.solver_iterations;
    } else {
      os << ",,,,";
    }
    os << '\n';
  }
  return os.str();
}

nlohmann::json summaries_json(const std::vector<RankSummary>& rows) {
  auto arr = nlohmann::json::array();
  for (const auto& s : rows) {
    auto opt = [](const std::optional<double>& x) { return x ? nlohmann::json(*x) : nlohmann::json(nullptr); };
    arr.push_back({{"rank", s.rank},
                   {"median_min_elements", opt(s.median)},
                   {"q1", opt(s.q1)},
                   {"q3", opt(s.q3)},
                   {"n_channels", s.n_channels},
                   {"n_failed", s.n_failed}});
  }
  return arr;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::vector<std::size_t> ExperimentConfig::effective_ranks() const {
  if (!ranks.empty()) return ranks;
  std::vector<std::size_t> all;
  const std::size_t d = std::size_t{1} << n_qubits;
  for (std::size_t r = 1; r <= d * d; ++r) all.push_back(r);
  return all;
}

void ExperimentConfig::validate() const {
  if (n_qubits < 1 || n_qubits > 3) throw ConfigError("n_qubits must be 1, 2 or 3");
  const std::size_t d = std::size_t{1} << n_qubits;
  std::set<std::size_t> seen;
  for (std::size_t r : ranks) {
    if (r < 1 || r > d * d) {
      throw ConfigError("rank " + std::to_string(r) + " outside [1, " + std::to_string(d * d) + "]");
    }
    if (!seen.insert(r).second) throw ConfigError("rank " + std::to_string(r) + " listed twice");
  }
  if (channels_per_rank < 1) throw ConfigError("channels_per_rank must be >= 1");
  if (sweep_trials < 1) throw ConfigError("sweep_trials must be >= 1");
  if (!(fidelity_threshold >= 0.0 && fidelity_threshold < 1.0)) {
    throw ConfigError("fidelity_threshold must lie in [0, 1)");
  }
  if (!(tol > 0.0)) throw ConfigError("solver.tol must be positive");
  if (max_iter < 1) throw ConfigError("solver.max_iter must be >= 1");
  if (master_seed.generator_id != kGeneratorId) {
    throw ConfigError("unknown generator_id \"" + master_seed.generator_id + "\"");
  }
  if (output_dir.empty()) throw ConfigError("output_dir is empty");
}

ExperimentConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(line_col(text, e.byte > 0 ? e.byte - 1 : 0) + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("line 1, column 1: config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!kConfigKeys.count(key)) throw ConfigError(where(text, key) + ": unknown field '" + key + "'");
  }
  ExperimentConfig cfg;
  read_field(j, text, "n_qubits", cfg.n_qubits);
  std::string scheme = to_string(cfg.scheme);
  read_field(j, text, "scheme", scheme);
  try {
    cfg.scheme = scheme_from_string(scheme);
  } catch (const Error& e) {
    throw ConfigError(where(text, "scheme") + ": " + e.what());
  }
  read_field(j, text, "ranks", cfg.ranks);
  read_field(j, text, "channels_per_rank", cfg.channels_per_rank);
  read_field(j, text, "shots", cfg.shots);
  read_field(j, text, "fidelity_threshold", cfg.fidelity_threshold);
  read_field(j, text, "sweep_trials", cfg.sweep_trials);
  std::string search = to_string(cfg.search);
  read_field(j, text, "search", search);
  try {
    cfg.search = search_from_string(search);
  } catch (const ConfigError& e) {
    throw ConfigError(where(text, "search") + ": " + e.what());
  }
  read_field(j, text, "tp_constraint", cfg.tp_constraint);
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    if (!s.is_object()) throw ConfigError(where(text, "solver") + ": solver must be an object");
    read_field(s, text, "tol", cfg.tol);
    read_field(s, text, "max_iter", cfg.max_iter);
  }
  if (j.contains("master_seed")) {
    const auto& s = j.at("master_seed");
    if (s.is_object()) {
      read_field(s, text, "seed", cfg.master_seed.seed);
      read_field(s, text, "generator_id", cfg.master_seed.generator_id);
    } else {
      read_field(j, text, "master_seed", cfg.master_seed.seed);
    }
  }
  read_field(j, text, "output_dir", cfg.output_dir);
  read_field(j, text, "workers", cfg.workers);
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError("config: " + std::string(e.what()));
  }
  return cfg;
}

ExperimentConfig load_config(const fs::path& path, std::string* text_out) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open config " + path.string());
  std::stringstream buf;
  buf << is.rdbuf();
  const std::string text = buf.str();
  ExperimentConfig cfg = parse_config(text);
  if (const char* dir = std::getenv("QPT_OUTPUT_DIR"); dir && *dir) cfg.output_dir = dir;
  if (text_out) *text_out = text;
  return cfg;
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  return {{"n_qubits", cfg.n_qubits},
          {"scheme", to_string(cfg.scheme)},
          {"ranks", cfg.effective_ranks()},
          {"channels_per_rank", cfg.channels_per_rank},
          {"shots", cfg.shots},
          {"fidelity_threshold", cfg.fidelity_threshold},
          {"sweep_trials", cfg.sweep_trials},
          {"search", to_string(cfg.search)},
          {"tp_constraint", cfg.tp_constraint},
          {"solver", {{"tol", cfg.tol}, {"max_iter", cfg.max_iter}}},
          {"master_seed", {{"seed", cfg.master_seed.seed}, {"generator_id", cfg.master_seed.generator_id}}},
          {"output_dir", cfg.output_dir},
          {"workers", cfg.workers}};
}

std::uint64_t channel_seed(const ExperimentConfig& cfg, std::size_t rank, std::size_t channel) {
  return derive_seed(cfg.master_seed.seed, {rank, channel});
}

std::vector<RankSummary> ExperimentResult::summaries() const {
  std::vector<RankSummary> rows;
  for (std::size_t rank : config.effective_ranks()) {
    RankSummary s;
    s.rank = rank;
    std::vector<double> counts;
    for (const auto& o : outcomes) {
      if (o.rank != rank) continue;
      ++s.n_channels;
      if (o.failed) ++s.n_failed;
      else counts.push_back(o.minimal_independent_count);
    }
    if (!counts.empty()) {
      s.median = median(counts);
      s.q1 = quantile(counts, 0.25);
      s.q3 = quantile(counts, 0.75);
    }
    rows.push_back(s);
  }
  return rows;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const ChannelTask& task) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult result;
  result.config = cfg;
  for (std::size_t rank : cfg.effective_ranks()) {
    for (std::size_t c = 0; c < cfg.channels_per_rank; ++c) {
      ChannelOutcome o;
      o.rank = rank;
      o.channel = c;
      o.seed = channel_seed(cfg, rank, c);
      result.outcomes.push_back(std::move(o));
    }
  }

  std::size_t workers = cfg.workers ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, result.outcomes.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < result.outcomes.size(); i = next++) {
      ChannelOutcome& slot = result.outcomes[i];
      try {
        ChannelOutcome done = task(cfg, slot.rank, slot.channel);
        done.rank = slot.rank;
        done.channel = slot.channel;
        done.seed = slot.seed;
        slot = std::move(done);
      } catch (const std::exception& e) {
        slot.failed = true;
        slot.error = e.what();
      } catch (...) {
        slot.failed = true;
        slot.error = "unknown exception";
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (const auto& o : result.outcomes) {
    std::ostringstream line;
    line << task_name(o.rank, o.channel) << " seed=" << o.seed;
    if (o.failed) {
      line << " FAILED: " << o.error;
    } else {
      line << " minimal=" << format_double(o.minimal_independent_count)
           << " final_fidelity=" << format_double(o.final_fidelity)
           << " iterations=" << o.solver_iterations << (o.saturated ? " saturated" : "");
    }
    result.log.push_back(line.str());
  }
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

void write_plot_csv(std::ostream& os, const std::vector<RankSummary>& rows) {
  os << "rank,median_min_elements,q1,q3,n_channels,n_failed\n";
  for (const auto& s : rows) {
    os << s.rank << ',' << optional_field(s.median) << ',' << optional_field(s.q1) << ','
       << optional_field(s.q3) << ',' << s.n_channels << ',' << s.n_failed << '\n';
  }
}

std::vector<RankSummary> read_plot_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "rank,median_min_elements,q1,q3,n_channels,n_failed") {
    throw InvariantError("plot csv: unexpected header");
  }
  std::vector<RankSummary> rows;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 6) throw InvariantError("plot csv line " + std::to_string(line_no) + ": expected 6 fields");
    auto opt = [](const std::string& s) { return s.empty() ? std::optional<double>() : std::stod(s); };
    try {
      rows.push_back({std::stoul(f[0]), std::stoul(f[4]), std::stoul(f[5]), opt(f[1]), opt(f[2]), opt(f[3])});
    } catch (const std::logic_error&) {
      throw InvariantError("plot csv line " + std::to_string(line_no) + ": malformed number");
    }
  }
  return rows;
}

void emit_plot_data(const ExperimentResult& result, const fs::path& dir) {
  if (result.outcomes.empty()) throw InvariantError("emit_plot_data: empty result");
  const auto rows = result.summaries();
  std::ostringstream csv;
  write_plot_csv(csv, rows);
  write_file(dir / "fig1.csv", csv.str());
  write_file(dir / "fig1.json", summaries_json(rows).dump(2) + "\n");
}

ExperimentResult run_to_bundle(const ExperimentConfig& cfg, const std::string& config_text,
                               const ChannelTask& task) {
  const fs::path target = fs::absolute(cfg.output_dir);
  const fs::path staging = target.parent_path() / (target.filename().string() + ".partial");
  // Fail on an unwritable location before doing any work.
  std::error_code ec;
  fs::create_directories(target.parent_path(), ec);
  fs::remove_all(staging, ec);
  if (!fs::create_directories(staging / "channels", ec) ||
      !fs::create_directories(staging / "reconstructions", ec)) {
    throw Error("cannot create output directory " + staging.string() +
                (ec ? ": " + ec.message() : std::string()));
  }
  const std::string started = utc_timestamp();

  ExperimentResult result = run_experiment(cfg, task);

  write_file(staging / "config.json", config_text);
  write_file(staging / "results.csv", results_csv(result));
  emit_plot_data(result, staging);
  std::string log;
  for (const auto& l : result.log) log += l + "\n";
  write_file(staging / "log.txt", log);
  auto timings = nlohmann::json::array();
  for (const auto& o : result.outcomes) {
    const std::string name = task_name(o.rank, o.channel);
    timings.push_back({{"task", name}, {"wall_seconds", o.wall_seconds}});
    nlohmann::json ch = {{"rank", o.rank}, {"channel", o.channel}, {"seed", o.seed},
                         {"generator_id", cfg.master_seed.generator_id}};
    ch["kraus"] = o.kraus ? to_json(*o.kraus) : nlohmann::json(nullptr);
    if (o.failed) ch["error"] = o.error;
    write_file(staging / "channels" / (name + ".json"), ch.dump(2) + "\n");
    nlohmann::json rec = {{"rank", o.rank}, {"channel", o.channel}};
    rec["chi_hat"] = o.reconstruction ? to_json(*o.reconstruction) : nlohmann::json(nullptr);
    rec["final_fidelity"] = o.final_fidelity;
    write_file(staging / "reconstructions" / (name + ".json"), rec.dump(2) + "\n");
  }
  const nlohmann::json meta = {{"started_at", started},
                               {"finished_at", utc_timestamp()},
                               {"wall_seconds", result.wall_seconds},
                               {"task_wall_seconds", timings},
                               {"resolved_config", to_json(cfg)}};
  write_file(staging / "metadata.json", meta.dump(2) + "\n");

  const fs::path old = target.parent_path() / (target.filename().string() + ".old");
  fs::remove_all(old, ec);
  if (fs::exists(target)) fs::rename(target, old);
  fs::rename(staging, target);
  fs::remove_all(old, ec);
  return result;
}

}  // namespace qpt

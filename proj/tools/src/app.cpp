/*
 * Copyright 2026 The mgcp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#include "mgcp_cli/app.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "mgcp/bench.hpp"
#include "mgcp/csv.hpp"
#include "mgcp/dame.hpp"
#include "mgcp/errors.hpp"
#include "mgcp/train.hpp"
#include "mgcp_cli/config.hpp"

namespace mgcp::cli {

namespace fs = std::filesystem;

namespace {

constexpr int kManifestVersion = 1;
constexpr const char *kToolVersion = "0.1.0";

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

// Artifacts are collected in memory and written once the run has finished.
class ArtifactSet {
 public:
  void add(std::string name, std::string content) {
    files_.emplace_back(std::move(name), std::move(content));
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto &f : files_) out.push_back(f.first);
    return out;
  }

  void write(const fs::path &dir) const {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());
    for (const auto &[name, content] : files_) {
      std::ofstream out(dir / name, std::ios::binary);
      if (!out) throw DataError("cannot write " + (dir / name).string());
      out << content;
      if (!out) throw DataError("write failed for " + (dir / name).string());
    }
  }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

struct Manifest {
  std::string command;
  std::vector<std::string> argv;
  std::string config_path;
  Json config;
  std::uint64_t seed = 0;
  std::string started_at;
};

std::string manifest_text(const Manifest &m, const std::vector<std::string> &artifacts) {
  Json j;
  j["manifest_version"] = kManifestVersion;
  j["tool_version"] = kToolVersion;
  j["command"] = m.command;
  j["argv"] = m.argv;
  j["config_path"] = m.config_path;
  j["seed"] = m.seed;
  j["started_at"] = m.started_at;
  j["finished_at"] = utc_now();
  std::vector<std::string> all = artifacts;
  all.emplace_back("manifest.json");
  j["artifacts"] = all;
  j["config"] = m.config;
  return j.dump(2) + "\n";
}

void finish(const fs::path &out_dir, const Manifest &m, ArtifactSet &artifacts, std::ostream &out) {
  artifacts.add("manifest.json", manifest_text(m, artifacts.names()));
  artifacts.write(out_dir);
  out << "wrote " << artifacts.names().size() << " files to " << out_dir.string() << "\n";
}

std::string vector_field(const std::vector<double> &v) {
  std::vector<std::string> parts;
  for (double x : v) parts.push_back(csv::format_double(x));
  return csv::join(parts, ';');
}

struct PreparedData {
  TransferData data;
  std::vector<std::pair<std::string, OutputData>> adapted;  // DAME pseudo sources by name
};

PreparedData prepare(const FitJob &job) {
  PreparedData p;
  p.data.target = csv::read_output(job.target_path.string(), OutputRole::kTarget, job.target_name);
  for (std::size_t i = 0; i < job.sources.size(); ++i) {
    const SourceEntry &s = job.sources[i];
    OutputData src = csv::read_output(s.path.string(), OutputRole::kSource, s.name);
    if (s.domain) {
      try {
        s.domain->validate(src.dim(), p.data.target.dim());
        src = adapt_source(src, *s.domain, s.dame, p.data.target);
      } catch (const DomainSpecError &e) {
        throw DomainSpecError("sources[" + std::to_string(i) + "].domain: " + e.what());
      }
      src.name = s.name;
      p.adapted.emplace_back(s.name, src);
    }
    p.data.sources.push_back(std::move(src));
  }
  p.data.validate();
  return p;
}

Json load_optional(const std::string &config_path) {
  return config_path.empty() ? Json() : load_config_file(config_path);
}

fs::path config_dir(const std::string &config_path) {
  return fs::absolute(fs::path(config_path)).parent_path();
}

std::string gamma_table_csv(const GammaSelection &sel) {
  std::ostringstream os;
  os << "gamma,cv_mae,fold_mae\n";
  for (const auto &row : sel.cv_table) {
    os << csv::format_double(row.gamma) << ',' << csv::format_double(row.cv_mae) << ','
       << vector_field(row.fold_mae) << '\n';
  }
  return os.str();
}

int cmd_fit(const std::string &config_path, std::optional<std::uint64_t> seed, const fs::path &out_dir,
            Manifest m, std::ostream &out) {
  Json cfg = load_config_file(config_path);
  if (seed) cfg["seed"] = *seed;
  FitJob job = parse_fit_job(cfg, config_dir(config_path));
  const PreparedData prepared = prepare(job);
  const TransferData &data = prepared.data;

  ArtifactSet artifacts;
  std::optional<GammaSelection> selection;
  if (!job.gamma_given) {
    TrainConfig cv = job.train;
    if (cv.gamma_grid.empty()) cv.gamma_grid = default_gamma_grid();
    selection = select_gamma(data, cv);
    job.train.gamma = selection->gamma_best;
    artifacts.add("gamma_selection.csv", gamma_table_csv(*selection));
  }
  const FitResult result = fit(data, job.train);

  Json hp;
  hp["gamma"] = job.train.gamma;
  hp["objective"] = result.objective;
  hp["best_restart"] = result.best_restart;
  hp["units"] = "standardized";
  hp["theta"] = to_json(result.theta_hat);
  hp["target_scaler"] = {{"mean", result.target_scaler.mean}, {"scale", result.target_scaler.scale}};
  hp["source_scalers"] = Json::array();
  for (const auto &s : result.source_scalers) {
    hp["source_scalers"].push_back({{"mean", s.mean}, {"scale", s.scale}});
  }
  hp["restarts"] = Json::array();
  for (const auto &d : result.diagnostics) {
    Json r;
    r["succeeded"] = d.succeeded;
    r["objective"] = d.succeeded ? Json(d.objective) : Json();
    r["iterations"] = d.iterations;
    r["gradient_max_norm"] = d.gradient_max_norm;
    r["message"] = d.message;
    hp["restarts"].push_back(r);
  }
  artifacts.add("hyperparameters.json", hp.dump(2) + "\n");

  const std::vector<double> alphas = result.abs_transfer_alphas();
  std::ostringstream sel;
  sel << "source,name,abs_alpha,selected\n";
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const bool kept = std::find(result.selected_sources.begin(), result.selected_sources.end(),
                                static_cast<int>(i)) != result.selected_sources.end();
    sel << i + 1 << ',' << data.sources[i].name << ',' << csv::format_double(alphas[i]) << ','
        << (kept ? "true" : "false") << '\n';
  }
  artifacts.add("selection.csv", sel.str());

  if (job.query_path) {
    const csv::Table q = csv::read_numeric(job.query_path->string());
    if (q.values.cols() != data.dim()) {
      throw DataError(job.query_path->string() + ": expected " + std::to_string(data.dim()) +
                      " feature columns, got " + std::to_string(q.values.cols()));
    }
    const PredictiveDistribution pred = predict_target(result, data, q.values);
    std::ostringstream os;
    os << csv::join(q.header) << ",mean,variance\n";
    for (Eigen::Index r = 0; r < q.values.rows(); ++r) {
      for (Eigen::Index c = 0; c < q.values.cols(); ++c) os << csv::format_double(q.values(r, c)) << ',';
      os << csv::format_double(pred.mean[r]) << ',' << csv::format_double(pred.variance[r]) << '\n';
    }
    artifacts.add("predictions.csv", os.str());
  }
  for (const auto &[name, src] : prepared.adapted) artifacts.add("adapted_" + name + ".csv", csv::format_output(src));

  m.config = to_json(job);
  m.seed = job.seed;
  finish(out_dir, m, artifacts, out);
  out << "selected sources:";
  for (int s : result.selected_sources) out << ' ' << data.sources[static_cast<std::size_t>(s)].name;
  out << "\n";
  return kExitOk;
}

int cmd_sweep(const std::string &config_path, const std::string &grid, std::optional<std::uint64_t> seed,
              const fs::path &out_dir, Manifest m, std::ostream &out) {
  Json cfg = load_config_file(config_path);
  if (seed) cfg["seed"] = *seed;
  FitJob job = parse_fit_job(cfg, config_dir(config_path));
  if (!grid.empty()) job.train.gamma_grid = parse_grid(grid);
  if (job.train.gamma_grid.empty()) job.train.gamma_grid = default_gamma_grid();
  const PreparedData prepared = prepare(job);
  const std::vector<GammaPathRow> rows = sweep_gamma(prepared.data, job.train);

  std::ostringstream os;
  os << "gamma,cv_mae,selected_count,alpha_path\n";
  for (const auto &r : rows) {
    os << csv::format_double(r.gamma) << ',' << csv::format_double(r.cv_mae) << ',' << r.selected_count
       << ',' << vector_field(r.abs_transfer_alphas) << '\n';
  }
  ArtifactSet artifacts;
  artifacts.add("gamma_path.csv", os.str());
  m.config = to_json(job);
  m.seed = job.seed;
  finish(out_dir, m, artifacts, out);
  return kExitOk;
}

struct SimFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> replications;
  std::string methods;
  std::optional<int> n_e;
  bool timing = false;
};

int cmd_sim(CaseId id, const SimFlags &flags, const fs::path &out_dir, Manifest m, std::ostream &out) {
  SimJob job = parse_sim_job(load_optional(flags.config), id);
  if (flags.seed) job.scenario.seed = *flags.seed;
  if (flags.replications) job.bench.replications = *flags.replications;
  if (!flags.methods.empty()) job.bench.methods = parse_method_list(flags.methods);
  if (flags.n_e) job.scenario.n_e = *flags.n_e;

  const BenchResult result = run_benchmark(job.scenario, job.bench);
  ArtifactSet artifacts;
  artifacts.add("replications.csv", replications_csv(result, flags.timing));
  artifacts.add("summary.csv", summary_csv(result, flags.timing));
  m.config = to_json(job);
  m.seed = job.scenario.seed;
  finish(out_dir, m, artifacts, out);
  for (const auto &s : result.summary) {
    out << method_name(s.method) << ": median MAE " << csv::format_double(s.median_mae) << " ("
        << s.succeeded << " ok, " << s.failed << " failed" << (s.flagged ? ", FLAGGED" : "") << ")\n";
  }
  return kExitOk;
}

}  // namespace

int exit_code_for(const std::exception &e) {
  if (dynamic_cast<const ConfigError *>(&e) || dynamic_cast<const DomainSpecError *>(&e)) {
    return kExitConfig;
  }
  if (dynamic_cast<const DataError *>(&e) || dynamic_cast<const BandwidthError *>(&e)) return kExitData;
  if (dynamic_cast<const OptimizationFailed *>(&e) || dynamic_cast<const IndefiniteCovariance *>(&e) ||
      dynamic_cast<const CombinationError *>(&e)) {
    return kExitOptimization;
  }
  return kExitInternal;
}

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Regularized multi-output Gaussian process transfer learning", "mgcp"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::string out_dir;
  std::string config_path;
  std::string grid;
  std::optional<std::uint64_t> seed;
  SimFlags sim_flags;

  auto *fit_cmd = app.add_subcommand("fit", "Fit the regularized model to CSV data described by a JSON config");
  fit_cmd->add_option("--config", config_path, "JSON config file")->required();
  fit_cmd->add_option("--out", out_dir, "Output directory")->required();
  fit_cmd->add_option("--seed", seed, "Override the root seed");

  auto *sweep_cmd = app.add_subcommand("sweep-gamma", "Cross-validated selection path over a penalty grid");
  sweep_cmd->add_option("--config", config_path, "JSON config file")->required();
  sweep_cmd->add_option("--out", out_dir, "Output directory")->required();
  sweep_cmd->add_option("--grid", grid, "Comma-separated penalty weights");
  sweep_cmd->add_option("--seed", seed, "Override the root seed");

  std::map<CLI::App *, CaseId> sims;
  for (CaseId id : {CaseId::kSim1, CaseId::kSim2, CaseId::kSim3Setting1, CaseId::kSim3Setting2}) {
    auto *cmd = app.add_subcommand(std::string(case_name(id)), "Run the simulation benchmark " +
                                                                   std::string(case_name(id)));
    cmd->add_option("--out", out_dir, "Output directory")->required();
    cmd->add_option("--config", sim_flags.config, "JSON benchmark config (or a previous manifest)");
    cmd->add_option("--seed", sim_flags.seed, "Root seed; replication r uses seed + r");
    cmd->add_option("--replications", sim_flags.replications, "Number of replications")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--methods", sim_flags.methods, "Comma-separated methods, e.g. MGCP-R,GCP");
    cmd->add_option("--ne", sim_flags.n_e, "Sources per function family (sim3 cases)")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--timing", sim_flags.timing, "Include wall-clock columns (not reproducible)");
    sims[cmd] = id;
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  Manifest m;
  m.argv = args;
  m.started_at = utc_now();
  try {
    if (fit_cmd->parsed()) {
      m.command = "fit";
      m.config_path = fs::absolute(config_path).string();
      return cmd_fit(config_path, seed, out_dir, m, out);
    }
    if (sweep_cmd->parsed()) {
      m.command = "sweep-gamma";
      m.config_path = fs::absolute(config_path).string();
      return cmd_sweep(config_path, grid, seed, out_dir, m, out);
    }
    for (const auto &[cmd, id] : sims) {
      if (!cmd->parsed()) continue;
      m.command = std::string(case_name(id));
      if (!sim_flags.config.empty()) m.config_path = fs::absolute(sim_flags.config).string();
      return cmd_sim(id, sim_flags, out_dir, m, out);
    }
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kExitInternal;
}

}  // namespace mgcp::cli

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

#include "mgcp_cli/config.hpp"

#include <fstream>
#include <sstream>

#include "mgcp/errors.hpp"
#include "mgcp/seed.hpp"

namespace mgcp::cli {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void fail(const std::string &field, const std::string &what) {
  throw ConfigError(field + ": " + what);
}

void check_keys(const Json &j, const std::string &where, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) fail(where.empty() ? "config" : where, "expected an object");
  for (const auto &item : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || item.key() == a;
    if (!known) fail(where.empty() ? item.key() : where + "." + item.key(), "unknown field");
  }
}

std::string join_path(const std::string &where, const std::string &key) {
  return where.empty() ? key : where + "." + key;
}

double get_double(const Json &j, const std::string &where, const std::string &key, double fallback) {
  if (!j.contains(key)) return fallback;
  const Json &v = j.at(key);
  if (!v.is_number()) fail(join_path(where, key), "expected a number");
  return v.get<double>();
}

int get_int(const Json &j, const std::string &where, const std::string &key, int fallback) {
  if (!j.contains(key)) return fallback;
  const Json &v = j.at(key);
  if (!v.is_number_integer()) fail(join_path(where, key), "expected an integer");
  return v.get<int>();
}

std::uint64_t get_seed(const Json &j, const std::string &where, std::uint64_t fallback) {
  if (!j.contains("seed")) return fallback;
  const Json &v = j.at("seed");
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    fail(join_path(where, "seed"), "expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::string get_string(const Json &j, const std::string &where, const std::string &key,
                       const std::string &fallback) {
  if (!j.contains(key)) return fallback;
  const Json &v = j.at(key);
  if (!v.is_string()) fail(join_path(where, key), "expected a string");
  return v.get<std::string>();
}

template <typename T>
std::vector<T> get_array(const Json &j, const std::string &where, const std::string &key) {
  if (!j.contains(key)) return {};
  const Json &v = j.at(key);
  if (!v.is_array()) fail(join_path(where, key), "expected an array");
  std::vector<T> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Json &e = v[i];
    const std::string field = join_path(where, key) + "[" + std::to_string(i) + "]";
    if constexpr (std::is_integral_v<T>) {
      if (!e.is_number_integer()) fail(field, "expected an integer");
    } else {
      if (!e.is_number()) fail(field, "expected a number");
    }
    out.push_back(e.get<T>());
  }
  return out;
}

PenaltyMode parse_penalty(const std::string &s, const std::string &field) {
  if (s == "l1") return PenaltyMode::kL1Transfer;
  if (s == "group_l1") return PenaltyMode::kGroupL1Shared;
  if (s == "none") return PenaltyMode::kNone;
  fail(field, "expected one of l1, group_l1, none");
}

std::string penalty_name(PenaltyMode m) {
  switch (m) {
    case PenaltyMode::kL1Transfer: return "l1";
    case PenaltyMode::kGroupL1Shared: return "group_l1";
    case PenaltyMode::kNone: return "none";
  }
  return "";
}

CovarianceStructure parse_structure(const std::string &s, const std::string &field) {
  if (s == "independent") return CovarianceStructure::kIndependentSources;
  if (s == "shared_latent") return CovarianceStructure::kSharedLatent;
  fail(field, "expected independent or shared_latent");
}

std::string structure_name(CovarianceStructure c) {
  return c == CovarianceStructure::kSharedLatent ? "shared_latent" : "independent";
}

StandardizeMode parse_standardize(const std::string &s, const std::string &field) {
  if (s == "none") return StandardizeMode::kNone;
  if (s == "scale") return StandardizeMode::kScale;
  if (s == "center_scale") return StandardizeMode::kCenterScale;
  fail(field, "expected none, scale or center_scale");
}

std::string standardize_name(StandardizeMode m) {
  switch (m) {
    case StandardizeMode::kNone: return "none";
    case StandardizeMode::kScale: return "scale";
    case StandardizeMode::kCenterScale: return "center_scale";
  }
  return "";
}

TrainConfig parse_train(const Json &j, const std::string &where, bool &gamma_given) {
  TrainConfig t;
  gamma_given = false;
  if (j.is_null()) return t;
  check_keys(j, where,
             {"seed", "gamma", "eta", "restarts", "max_iterations", "convergence_tol", "function_tol", "penalty",
              "structure", "standardize", "cv_folds", "gamma_grid", "selection_threshold", "jitter"});
  gamma_given = j.contains("gamma");
  t.gamma = get_double(j, where, "gamma", t.gamma);
  t.eta = get_double(j, where, "eta", t.eta);
  t.restarts = get_int(j, where, "restarts", t.restarts);
  t.max_iterations = get_int(j, where, "max_iterations", t.max_iterations);
  t.convergence_tol = get_double(j, where, "convergence_tol", t.convergence_tol);
  t.function_tol = get_double(j, where, "function_tol", t.function_tol);
  t.penalty_mode = parse_penalty(get_string(j, where, "penalty", penalty_name(t.penalty_mode)),
                                 join_path(where, "penalty"));
  t.structure = parse_structure(get_string(j, where, "structure", structure_name(t.structure)),
                                join_path(where, "structure"));
  t.standardize = parse_standardize(
      get_string(j, where, "standardize", standardize_name(t.standardize)), join_path(where, "standardize"));
  t.cv_folds = get_int(j, where, "cv_folds", t.cv_folds);
  t.gamma_grid = get_array<double>(j, where, "gamma_grid");
  t.selection_threshold = get_double(j, where, "selection_threshold", t.selection_threshold);
  t.jitter = get_double(j, where, "jitter", t.jitter);
  return t;
}

DomainSpec parse_domain(const Json &j, const std::string &where) {
  check_keys(j, where,
             {"shared_features", "source_unique", "target_shared_columns", "target_unique_columns",
              "target_unique_bounds"});
  DomainSpec d;
  d.shared_features = get_array<int>(j, where, "shared_features");
  d.source_unique = get_array<int>(j, where, "source_unique");
  d.target_shared_columns = get_array<int>(j, where, "target_shared_columns");
  d.target_unique_columns = get_array<int>(j, where, "target_unique_columns");
  if (j.contains("target_unique_bounds")) {
    const Json &b = j.at("target_unique_bounds");
    const std::string field = join_path(where, "target_unique_bounds");
    if (!b.is_array()) fail(field, "expected an array of [lo, hi] pairs");
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (!b[i].is_array() || b[i].size() != 2 || !b[i][0].is_number() || !b[i][1].is_number()) {
        fail(field + "[" + std::to_string(i) + "]", "expected [lo, hi]");
      }
      d.target_unique_bounds.emplace_back(b[i][0].get<double>(), b[i][1].get<double>());
    }
  }
  return d;
}

DameConfig parse_dame(const Json &j, const std::string &where, std::uint64_t seed) {
  DameConfig c;
  c.seed = seed;
  if (j.is_null()) return c;
  check_keys(j, where,
             {"n_induced", "n_expand", "bandwidth", "bandwidth_grid", "folds", "expansion_noise_std",
              "design"});
  if (j.contains("n_induced")) c.n_induced = get_int(j, where, "n_induced", 0);
  if (j.contains("n_expand")) c.n_expand = get_array<int>(j, where, "n_expand");
  if (j.contains("bandwidth")) c.bandwidth = get_double(j, where, "bandwidth", 0.0);
  c.bandwidth_grid = get_array<double>(j, where, "bandwidth_grid");
  c.folds = get_int(j, where, "folds", c.folds);
  if (j.contains("expansion_noise_std")) {
    c.expansion_noise_std = get_double(j, where, "expansion_noise_std", 0.0);
  }
  const std::string design = get_string(j, where, "design", "grid");
  if (design == "grid") {
    c.design = ExpansionDesign::kGrid;
  } else if (design == "random") {
    c.design = ExpansionDesign::kRandom;
  } else {
    fail(join_path(where, "design"), "expected grid or random");
  }
  try {
    c.validate();
  } catch (const ConfigError &e) {
    fail(where, e.what());
  }
  return c;
}

fs::path resolve(const fs::path &base, const std::string &p) {
  const fs::path path(p);
  return path.is_absolute() ? path : fs::absolute(base / path).lexically_normal();
}

Json kernel_json(const KernelParams &k) {
  Json j;
  j["alpha"] = k.alpha;
  j["log_lambda"] = std::vector<double>(k.log_lambda.data(), k.log_lambda.data() + k.log_lambda.size());
  return j;
}

}  // namespace

std::vector<double> default_gamma_grid() { return {0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0}; }

FitJob parse_fit_job(const Json &j, const fs::path &base_dir) {
  check_keys(j, "", {"seed", "target", "sources", "query", "train"});
  FitJob job;
  job.seed = get_seed(j, "", 0);
  if (!j.contains("target")) fail("target", "required");
  const Json &t = j.at("target");
  if (t.is_string()) {
    job.target_path = resolve(base_dir, t.get<std::string>());
  } else {
    check_keys(t, "target", {"path", "name"});
    if (!t.contains("path")) fail("target.path", "required");
    job.target_path = resolve(base_dir, get_string(t, "target", "path", ""));
    job.target_name = get_string(t, "target", "name", job.target_name);
  }
  if (!j.contains("sources") || !j.at("sources").is_array()) fail("sources", "required array");
  const Json &srcs = j.at("sources");
  for (std::size_t i = 0; i < srcs.size(); ++i) {
    const std::string where = "sources[" + std::to_string(i) + "]";
    SourceEntry s;
    s.name = "source" + std::to_string(i + 1);
    const Json &e = srcs[i];
    if (e.is_string()) {
      s.path = resolve(base_dir, e.get<std::string>());
      s.dame.seed = derive_seed(job.seed, "dame", i);
    } else {
      check_keys(e, where, {"path", "name", "domain", "dame"});
      if (!e.contains("path")) fail(where + ".path", "required");
      s.path = resolve(base_dir, get_string(e, where, "path", ""));
      s.name = get_string(e, where, "name", s.name);
      if (e.contains("domain")) s.domain = parse_domain(e.at("domain"), where + ".domain");
      s.dame = parse_dame(e.contains("dame") ? e.at("dame") : Json(), where + ".dame",
                          derive_seed(job.seed, "dame", i));
    }
    job.sources.push_back(std::move(s));
  }
  if (j.contains("query")) job.query_path = resolve(base_dir, get_string(j, "", "query", ""));
  const Json train = j.contains("train") ? j.at("train") : Json();
  job.train = parse_train(train, "train", job.gamma_given);
  // An explicit training seed wins over the one derived from the root seed.
  job.train.seed = train.is_object() && train.contains("seed") ? get_seed(train, "train", 0)
                                                               : derive_seed(job.seed, "train");
  try {
    job.train.validate();
  } catch (const ConfigError &e) {
    fail("train", e.what());
  }
  return job;
}

SimJob parse_sim_job(const Json &j, CaseId id) {
  SimJob job;
  if (j.is_null()) {
    job.scenario = ScenarioSpec::defaults(id);
  } else {
    check_keys(j, "",
               {"case", "seed", "n_e", "n", "n_t", "n_test", "noise_std", "perturbations", "methods",
                "replications", "gamma", "restarts", "max_iterations"});
    if (j.contains("case") && get_string(j, "", "case", "") != case_name(id)) {
      fail("case", "config is for " + get_string(j, "", "case", "") + ", not " + std::string(case_name(id)));
    }
    job.scenario = ScenarioSpec::defaults(id, get_int(j, "", "n_e", 2));
    ScenarioSpec &s = job.scenario;
    s.seed = get_seed(j, "", 0);
    s.n = get_int(j, "", "n", s.n);
    s.n_t = get_int(j, "", "n_t", s.n_t);
    s.n_test = get_int(j, "", "n_test", s.n_test);
    s.noise_std = get_double(j, "", "noise_std", s.noise_std);
    if (j.contains("perturbations")) {
      const Json &p = j.at("perturbations");
      if (!p.is_array()) fail("perturbations", "expected an array of arrays");
      for (std::size_t f = 0; f < p.size(); ++f) {
        s.perturbations.push_back(get_array<double>(p, "perturbations", std::to_string(f)));
      }
    }
    BenchConfig &b = job.bench;
    if (j.contains("methods")) {
      const Json &m = j.at("methods");
      if (!m.is_array()) fail("methods", "expected an array of method names");
      for (const auto &e : m) {
        if (!e.is_string()) fail("methods", "expected method names");
        b.methods.push_back(parse_method(e.get<std::string>()));
      }
    }
    b.replications = get_int(j, "", "replications", 0);
    b.gamma = get_double(j, "", "gamma", b.gamma);
    b.restarts = get_int(j, "", "restarts", b.restarts);
    b.max_iterations = get_int(j, "", "max_iterations", b.max_iterations);
  }
  if (job.bench.replications == 0) {
    job.bench.replications = id == CaseId::kSim1 || id == CaseId::kSim2 ? 100 : 50;
  }
  if (job.bench.methods.empty()) {
    for (Method m : all_methods()) {
      if (m != Method::kMgcpT || id == CaseId::kSim1) job.bench.methods.push_back(m);
    }
  }
  return job;
}

Json to_json(const TrainConfig &t) {
  Json j;
  j["seed"] = t.seed;
  j["gamma"] = t.gamma;
  j["eta"] = t.eta;
  j["restarts"] = t.restarts;
  j["max_iterations"] = t.max_iterations;
  j["convergence_tol"] = t.convergence_tol;
  j["function_tol"] = t.function_tol;
  j["penalty"] = penalty_name(t.penalty_mode);
  j["structure"] = structure_name(t.structure);
  j["standardize"] = standardize_name(t.standardize);
  j["cv_folds"] = t.cv_folds;
  j["gamma_grid"] = t.gamma_grid;
  j["selection_threshold"] = t.selection_threshold;
  j["jitter"] = t.jitter;
  return j;
}

Json to_json(const FitJob &job) {
  Json j;
  j["seed"] = job.seed;
  j["target"] = {{"path", job.target_path.string()}, {"name", job.target_name}};
  j["sources"] = Json::array();
  for (const auto &s : job.sources) {
    Json e;
    e["path"] = s.path.string();
    e["name"] = s.name;
    if (s.domain) {
      const DomainSpec &d = *s.domain;
      e["domain"]["shared_features"] = d.shared_features;
      e["domain"]["source_unique"] = d.source_unique;
      e["domain"]["target_shared_columns"] = d.target_shared_columns;
      e["domain"]["target_unique_columns"] = d.target_unique_columns;
      Json bounds = Json::array();
      for (const auto &[lo, hi] : d.target_unique_bounds) bounds.push_back({lo, hi});
      e["domain"]["target_unique_bounds"] = bounds;
      Json &c = e["dame"];
      if (s.dame.n_induced) c["n_induced"] = *s.dame.n_induced;
      c["n_expand"] = s.dame.n_expand;
      if (s.dame.bandwidth) c["bandwidth"] = *s.dame.bandwidth;
      c["bandwidth_grid"] = s.dame.bandwidth_grid;
      c["folds"] = s.dame.folds;
      if (s.dame.expansion_noise_std) c["expansion_noise_std"] = *s.dame.expansion_noise_std;
      c["design"] = s.dame.design == ExpansionDesign::kGrid ? "grid" : "random";
    }
    j["sources"].push_back(e);
  }
  if (job.query_path) j["query"] = job.query_path->string();
  j["train"] = to_json(job.train);
  if (!job.gamma_given) j["train"].erase("gamma");
  return j;
}

Json to_json(const SimJob &job) {
  Json j;
  const ScenarioSpec &s = job.scenario;
  j["case"] = std::string(case_name(s.case_id));
  j["seed"] = s.seed;
  j["n_e"] = s.n_e;
  j["n"] = s.n;
  j["n_t"] = s.n_t;
  j["n_test"] = s.n_test;
  j["noise_std"] = s.noise_std;
  if (!s.perturbations.empty()) j["perturbations"] = s.perturbations;
  j["methods"] = Json::array();
  for (Method m : job.bench.methods) j["methods"].push_back(std::string(method_name(m)));
  j["replications"] = job.bench.replications;
  j["gamma"] = job.bench.gamma;
  j["restarts"] = job.bench.restarts;
  j["max_iterations"] = job.bench.max_iterations;
  return j;
}

Json to_json(const Hyperparameters &theta) {
  Json j;
  j["source_kernels"] = Json::array();
  for (const auto &k : theta.source_kernels) j["source_kernels"].push_back(kernel_json(k));
  j["transfer_kernels"] = Json::array();
  for (const auto &k : theta.transfer_kernels) j["transfer_kernels"].push_back(kernel_json(k));
  j["target_kernel"] = kernel_json(theta.target_kernel);
  j["log_sigma_sources"] = theta.log_sigma_sources;
  j["log_sigma_target"] = theta.log_sigma_target;
  if (theta.shared_kernels) {
    j["shared_kernels"] = Json::array();
    for (const auto &k : *theta.shared_kernels) j["shared_kernels"].push_back(kernel_json(k));
  }
  if (theta.shared_target_kernel) j["shared_target_kernel"] = kernel_json(*theta.shared_target_kernel);
  return j;
}

Json load_config_file(const fs::path &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error &e) {
    throw ConfigError("config: " + path.string() + " is not valid JSON (" + e.what() + ")");
  }
  if (j.is_object() && j.contains("manifest_version") && j.contains("config")) return j.at("config");
  return j;
}

std::vector<Method> parse_method_list(const std::string &csv) {
  std::vector<Method> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_method(item));
  }
  if (out.empty()) throw ConfigError("--methods: empty list");
  return out;
}

std::vector<double> parse_grid(const std::string &csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception &) {
      used = 0;
    }
    if (used != item.size()) throw ConfigError("--grid: '" + item + "' is not a number");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("--grid: empty grid");
  return out;
}

}  // namespace mgcp::cli

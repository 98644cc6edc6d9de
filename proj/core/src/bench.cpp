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

#include "mgcp/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "mgcp/csv.hpp"
#include "mgcp/dame.hpp"
#include "mgcp/errors.hpp"
#include "mgcp/seed.hpp"
#include "mgcp/train.hpp"

namespace mgcp {

namespace {

// Below this a sub-model variance is treated as round-off before combining.
constexpr double kVarianceFloor = 1e-12;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Eigen::VectorXd linspace(double lo, double hi, int n) {
  if (n == 1) return Eigen::VectorXd::Constant(1, lo);
  return Eigen::VectorXd::LinSpaced(n, lo, hi);
}

OutputData noisy_output_1d(const Eigen::VectorXd &x, const std::function<double(double)> &f,
                           double noise_std, std::mt19937_64 &rng, OutputRole role,
                           std::string name) {
  std::normal_distribution<double> noise(0.0, 1.0);
  OutputData out;
  out.role = role;
  out.name = std::move(name);
  out.inputs = x;
  out.responses.resize(x.size());
  for (Eigen::Index r = 0; r < x.size(); ++r) out.responses[r] = f(x[r]) + noise_std * noise(rng);
  return out;
}

OutputData noisy_output(const Eigen::MatrixXd &X, const std::function<double(const Eigen::VectorXd &)> &f,
                        double noise_std, std::mt19937_64 &rng, OutputRole role, std::string name) {
  std::normal_distribution<double> noise(0.0, 1.0);
  OutputData out;
  out.role = role;
  out.name = std::move(name);
  out.inputs = X;
  out.responses.resize(X.rows());
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    out.responses[r] = f(X.row(r).transpose()) + noise_std * noise(rng);
  }
  return out;
}

Eigen::MatrixXd standard_normal(Eigen::Index rows, Eigen::Index cols, std::mt19937_64 &rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Eigen::MatrixXd X(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) X(r, c) = n01(rng);
  }
  return X;
}

std::vector<std::vector<double>> draw_perturbations(const ScenarioSpec &spec, int families, int dims,
                                                    double lo, double hi) {
  if (!spec.perturbations.empty()) {
    if (static_cast<int>(spec.perturbations.size()) != families) {
      throw ConfigError("perturbations must have " + std::to_string(families) + " families");
    }
    for (const auto &fam : spec.perturbations) {
      if (static_cast<int>(fam.size()) != spec.n_e * dims) {
        throw ConfigError("each perturbation family needs n_e * " + std::to_string(dims) + " values");
      }
    }
    return spec.perturbations;
  }
  std::mt19937_64 rng(derive_seed(spec.seed, "perturbations"));
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<std::vector<double>> e(static_cast<std::size_t>(families));
  for (auto &fam : e) {
    for (int k = 0; k < spec.n_e * dims; ++k) fam.push_back(u(rng));
  }
  return e;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::vector<int> all_but(int q, const std::vector<int> &excluded) {
  std::vector<int> keep;
  for (int i = 0; i < q; ++i) {
    if (std::find(excluded.begin(), excluded.end(), i) == excluded.end()) keep.push_back(i);
  }
  return keep;
}

}  // namespace

std::string_view case_name(CaseId id) {
  switch (id) {
    case CaseId::kSim1: return "sim1";
    case CaseId::kSim2: return "sim2";
    case CaseId::kSim3Setting1: return "sim3-s1";
    case CaseId::kSim3Setting2: return "sim3-s2";
  }
  return "";
}

CaseId parse_case(std::string_view name) {
  for (CaseId id : {CaseId::kSim1, CaseId::kSim2, CaseId::kSim3Setting1, CaseId::kSim3Setting2}) {
    if (case_name(id) == name) return id;
  }
  throw ConfigError("unknown case '" + std::string(name) + "' (expected sim1, sim2, sim3-s1, sim3-s2)");
}

ScenarioSpec ScenarioSpec::defaults(CaseId id, int n_e) {
  ScenarioSpec s;
  s.case_id = id;
  s.n_e = n_e;
  switch (id) {
    case CaseId::kSim1:
    case CaseId::kSim3Setting1:
      s.n = 30;
      s.n_t = 10;
      s.n_test = 60;
      break;
    case CaseId::kSim2:
      s.n = 64;
      s.n_t = 24;
      s.n_test = 100;
      break;
    case CaseId::kSim3Setting2:
      s.n = 100;
      s.n_t = 50;
      s.n_test = 150;
      break;
  }
  return s;
}

void ScenarioSpec::validate() const {
  if (n < 2 || n_t < 2 || n_test < 1) throw ConfigError("scenario counts must be positive (n, n_t >= 2)");
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) throw ConfigError("noise_std must be >= 0");
  if (case_id == CaseId::kSim3Setting1 && n_e < 1) throw ConfigError("n_e must be >= 1");
  if (case_id == CaseId::kSim3Setting2 && (n_e < 1 || n_e > 2)) {
    throw ConfigError("setting 2 supports n_e in {1, 2}");
  }
}

namespace sim {

double case1_source(int i, double x) {
  switch (i) {
    case 0: return 0.3 * std::pow(x - 3.0, 3);
    case 1: return 0.3 * x * x + 2.0 * std::sin(2.0 * x);
    case 2: return (x - 2.0) * (x - 2.0);
    case 3: return (x - 1.0) * (x - 2.0) * (x - 4.0);
    default: throw ContractViolation("case1_source: index out of range");
  }
}

double case1_target(double x) {
  return 0.2 * std::pow(x - 3.0, 3) + 0.15 * x * x + std::sin(2.0 * x);
}

double case2_source(int i, double x1, double x2) {
  switch (i) {
    case 0: return 3.0 * std::sin(x1);
    case 1: return 4.0 * std::cos(2.0 * x1) + x2 * x2 + x2;
    case 2: return 2.0 * std::sin(2.0 * x1) + x2 * x2;
    default: throw ContractViolation("case2_source: index out of range");
  }
}

double case2_target(double x1, double x2) { return 2.0 * std::sin(x1) + x2 * x2 + x2; }

}  // namespace sim

Scenario generate_case1(const ScenarioSpec &spec) {
  if (spec.case_id != CaseId::kSim1) throw ConfigError("generate_case1 needs case sim1");
  spec.validate();
  std::mt19937_64 rng(derive_seed(spec.seed, "sim1"));
  Scenario sc;
  const Eigen::VectorXd xs = linspace(0.0, 5.0, spec.n);
  for (int i = 0; i < 4; ++i) {
    sc.data.sources.push_back(noisy_output_1d(
        xs, [i](double x) { return sim::case1_source(i, x); }, spec.noise_std, rng,
        OutputRole::kSource, "f" + std::to_string(i + 1)));
  }
  sc.data.target = noisy_output_1d(linspace(0.0, 3.0, spec.n_t), sim::case1_target, spec.noise_std,
                                   rng, OutputRole::kTarget, "ft");
  std::uniform_real_distribution<double> u(0.0, 5.0);
  sc.test_inputs.resize(spec.n_test, 1);
  sc.test_truth.resize(spec.n_test);
  for (int r = 0; r < spec.n_test; ++r) {
    sc.test_inputs(r, 0) = u(rng);
    sc.test_truth[r] = sim::case1_target(sc.test_inputs(r, 0));
  }
  sc.informative = {0, 1};
  return sc;
}

Scenario generate_case2(const ScenarioSpec &spec) {
  if (spec.case_id != CaseId::kSim2) throw ConfigError("generate_case2 needs case sim2");
  spec.validate();
  std::mt19937_64 rng(derive_seed(spec.seed, "sim2"));
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(spec.n))));
  if (side * side != spec.n) throw ConfigError("sim2 needs a square source count n");
  if (spec.n_t % 3 != 0) throw ConfigError("sim2 target grid is 3 x (n_t / 3); n_t must be a multiple of 3");
  const Eigen::VectorXd axis = linspace(-2.0, 2.0, side);

  Scenario sc;
  // Target: 3 x (n_t/3) grid on [0, 2] x [-2, 2].
  const Eigen::VectorXd t1 = linspace(0.0, 2.0, 3);
  const Eigen::VectorXd t2 = linspace(-2.0, 2.0, spec.n_t / 3);
  Eigen::MatrixXd Xt(spec.n_t, 2);
  for (int a = 0, r = 0; a < 3; ++a) {
    for (Eigen::Index b = 0; b < t2.size(); ++b, ++r) Xt.row(r) << t1[a], t2[b];
  }

  // The first source is already the marginal mean over x1; only expand it.
  DomainSpec dspec;
  dspec.shared_features = {0};
  dspec.target_shared_columns = {0};
  dspec.target_unique_columns = {1};
  dspec.target_unique_bounds = {{-2.0, 2.0}};
  DameConfig dcfg;
  dcfg.n_expand = {side};
  dcfg.expansion_noise_std = spec.noise_std;
  dcfg.seed = derive_seed(spec.seed, "sim2-dame");
  InducedSet induced;
  induced.inputs = axis;
  induced.responses = axis.unaryExpr([](double x) { return sim::case2_source(0, x, 0.0); });
  OutputData pseudo = expand(induced, dspec, dcfg, OutputData{});
  pseudo.name = "f1";
  sc.data.sources.push_back(std::move(pseudo));

  Eigen::MatrixXd Xs(spec.n, 2);
  for (int a = 0, r = 0; a < side; ++a) {
    for (int b = 0; b < side; ++b, ++r) Xs.row(r) << axis[a], axis[b];
  }
  for (int i = 1; i < 3; ++i) {
    sc.data.sources.push_back(noisy_output(
        Xs, [i](const Eigen::VectorXd &x) { return sim::case2_source(i, x[0], x[1]); },
        spec.noise_std, rng, OutputRole::kSource, "f" + std::to_string(i + 1)));
  }
  sc.data.target = noisy_output(
      Xt, [](const Eigen::VectorXd &x) { return sim::case2_target(x[0], x[1]); }, spec.noise_std,
      rng, OutputRole::kTarget, "ft");

  // Test points evenly spaced over [-2, 2]^2.
  const int tside = static_cast<int>(std::lround(std::sqrt(static_cast<double>(spec.n_test))));
  if (tside * tside != spec.n_test) throw ConfigError("sim2 needs a square n_test");
  const Eigen::VectorXd taxis = linspace(-2.0, 2.0, tside);
  sc.test_inputs.resize(spec.n_test, 2);
  sc.test_truth.resize(spec.n_test);
  for (int a = 0, r = 0; a < tside; ++a) {
    for (int b = 0; b < tside; ++b, ++r) {
      sc.test_inputs.row(r) << taxis[a], taxis[b];
      sc.test_truth[r] = sim::case2_target(taxis[a], taxis[b]);
    }
  }
  sc.informative = {0, 1};
  sc.adapted = {0};
  return sc;
}

namespace {

Scenario generate_case3_setting1(const ScenarioSpec &spec) {
  const auto e = draw_perturbations(spec, 4, 1, 0.0, 1.0);
  std::mt19937_64 rng(derive_seed(spec.seed, "sim3-s1"));
  const int ne = spec.n_e;
  const Eigen::VectorXd xs = linspace(0.0, 5.0, spec.n);
  Scenario sc;
  sc.perturbations = e;
  std::vector<std::function<double(double)>> fams;
  for (int k = 0; k < ne; ++k) {
    const double e1 = e[0][k];
    fams.emplace_back([e1](double x) { return 0.3 * std::pow(x - 2.5 - e1, 3); });
  }
  for (int k = 0; k < ne; ++k) {
    const double e2 = e[1][k];
    fams.emplace_back([e2](double x) { return 0.3 * x * x + 2.0 * std::sin(2.0 * x + e2); });
  }
  for (int k = 0; k < ne; ++k) {
    const double e3 = e[2][k];
    fams.emplace_back([e3](double x) { return (x - 1.5 - e3) * (x - 1.5 - e3); });
  }
  for (int k = 0; k < ne; ++k) {
    const double e4 = e[3][k];
    fams.emplace_back([e4](double x) { return (x - 1.0) * (x - 2.0) * (x - 3.5 - e4); });
  }
  for (std::size_t i = 0; i < fams.size(); ++i) {
    sc.data.sources.push_back(noisy_output_1d(xs, fams[i], spec.noise_std, rng, OutputRole::kSource,
                                              "f" + std::to_string(i + 1)));
  }
  const double e11 = e[0][0];
  const double e21 = e[1][0];
  const auto target = [e11, e21](double x) {
    return 0.2 * std::pow(x - 2.5 - e11, 3) + 0.15 * x * x + std::sin(2.0 * x + e21);
  };
  sc.data.target = noisy_output_1d(linspace(0.0, 3.0, spec.n_t), target, spec.noise_std, rng,
                                   OutputRole::kTarget, "ft");
  std::uniform_real_distribution<double> u(0.0, 5.0);
  sc.test_inputs.resize(spec.n_test, 1);
  sc.test_truth.resize(spec.n_test);
  for (int r = 0; r < spec.n_test; ++r) {
    sc.test_inputs(r, 0) = u(rng);
    sc.test_truth[r] = target(sc.test_inputs(r, 0));
  }
  sc.informative = {0, ne};
  return sc;
}

Scenario generate_case3_setting2(const ScenarioSpec &spec) {
  const auto e = draw_perturbations(spec, 3, 2, -0.25, 0.25);
  std::mt19937_64 rng(derive_seed(spec.seed, "sim3-s2"));
  const int ne = spec.n_e;
  constexpr int kDim = 5;
  Scenario sc;
  sc.perturbations = e;

  const auto fam1 = [&e](int k) {
    return [a = e[0][2 * k], b = e[0][2 * k + 1]](const Eigen::VectorXd &x) {
      return 3.0 * (std::sin(x[0] + a) + std::sin(x[1] + b));
    };
  };
  const auto fam2 = [&e](int k) {
    return [a = e[1][2 * k], b = e[1][2 * k + 1]](const Eigen::VectorXd &x) {
      return 4.0 * (std::cos(2.0 * x[0] + a) + std::cos(2.0 * x[1] + b)) + x[2] * x[2] + x[2] +
             2.0 * x[3] - x[4];
    };
  };
  const auto fam3 = [&e](int k) {
    // Both terms use x1, as written for this family.
    return [a = e[2][2 * k], b = e[2][2 * k + 1]](const Eigen::VectorXd &x) {
      return 2.0 * (std::sin(2.0 * (x[0] + a)) + std::sin(2.0 * (x[0] + b))) + x[2] * x[2] -
             x[3] + 2.0 * x[4];
    };
  };
  const double a1 = e[0][0];
  const double b1 = e[0][1];
  const auto target = [a1, b1](const Eigen::VectorXd &x) {
    return 2.0 * (std::sin(x[0] + a1) + std::sin(x[1] + b1)) + x[2] * x[2] + x[2] + 2.0 * x[3] - x[4];
  };

  // Target: keep the first n_t draws with x1 > 0 out of 3 n_t.
  Eigen::MatrixXd pool = standard_normal(3 * spec.n_t, kDim, rng);
  std::vector<Eigen::Index> rows;
  for (Eigen::Index r = 0; r < pool.rows() && static_cast<int>(rows.size()) < spec.n_t; ++r) {
    if (pool(r, 0) > 0.0) rows.push_back(r);
  }
  while (static_cast<int>(rows.size()) < spec.n_t) {
    const Eigen::MatrixXd extra = standard_normal(1, kDim, rng);
    if (extra(0, 0) > 0.0) {
      pool.conservativeResize(pool.rows() + 1, Eigen::NoChange);
      pool.row(pool.rows() - 1) = extra.row(0);
      rows.push_back(pool.rows() - 1);
    }
  }
  const Eigen::MatrixXd Xt = pool(rows, Eigen::all);

  // First family: marginal means over (x1, x2), expanded over (x3, x4, x5).
  DomainSpec dspec;
  dspec.shared_features = {0, 1};
  dspec.target_shared_columns = {0, 1};
  dspec.target_unique_columns = {2, 3, 4};
  const int n_induced = 10;
  const int per_point = spec.n / n_induced;
  std::vector<OutputData> sources;
  for (int k = 0; k < ne; ++k) {
    DameConfig dcfg;
    dcfg.design = ExpansionDesign::kRandom;
    dcfg.n_expand = {per_point, 1, 1};
    dcfg.expansion_noise_std = spec.noise_std;
    dcfg.seed = derive_seed(spec.seed, "sim3-s2-dame", static_cast<std::uint64_t>(k));
    InducedSet induced;
    induced.inputs = standard_normal(n_induced, 2, rng);
    induced.responses.resize(n_induced);
    const auto f = fam1(k);
    for (int a = 0; a < n_induced; ++a) {
      Eigen::VectorXd x = Eigen::VectorXd::Zero(kDim);
      x.head(2) = induced.inputs.row(a).transpose();
      induced.responses[a] = f(x);
    }
    OutputData target_stub;
    target_stub.inputs = Xt;
    target_stub.responses = Eigen::VectorXd::Zero(Xt.rows());
    OutputData pseudo = expand(induced, dspec, dcfg, target_stub);
    pseudo.name = "f" + std::to_string(k + 1);
    sources.push_back(std::move(pseudo));
  }
  for (int k = 0; k < ne; ++k) {
    sources.push_back(noisy_output(standard_normal(spec.n, kDim, rng), fam2(k), spec.noise_std, rng,
                                   OutputRole::kSource, "f" + std::to_string(ne + k + 1)));
  }
  for (int k = 0; k < ne; ++k) {
    sources.push_back(noisy_output(standard_normal(spec.n, kDim, rng), fam3(k), spec.noise_std, rng,
                                   OutputRole::kSource, "f" + std::to_string(2 * ne + k + 1)));
  }
  sc.data.sources = std::move(sources);
  sc.data.target = noisy_output(Xt, target, spec.noise_std, rng, OutputRole::kTarget, "ft");
  sc.test_inputs = standard_normal(spec.n_test, kDim, rng);
  sc.test_truth.resize(spec.n_test);
  for (int r = 0; r < spec.n_test; ++r) sc.test_truth[r] = target(sc.test_inputs.row(r).transpose());
  sc.informative = {0, ne};
  for (int k = 0; k < ne; ++k) sc.adapted.push_back(k);
  return sc;
}

}  // namespace

Scenario generate_case3(const ScenarioSpec &spec) {
  spec.validate();
  if (spec.case_id == CaseId::kSim3Setting1) return generate_case3_setting1(spec);
  if (spec.case_id == CaseId::kSim3Setting2) return generate_case3_setting2(spec);
  throw ConfigError("generate_case3 needs case sim3-s1 or sim3-s2");
}

Scenario generate(const ScenarioSpec &spec) {
  switch (spec.case_id) {
    case CaseId::kSim1: return generate_case1(spec);
    case CaseId::kSim2: return generate_case2(spec);
    default: return generate_case3(spec);
  }
}

PredictiveDistribution bgcp_combine(const std::vector<PredictiveDistribution> &submodels) {
  if (submodels.empty()) throw CombinationError("no sub-models to combine");
  const Eigen::Index m = submodels.front().mean.size();
  Eigen::ArrayXd precision = Eigen::ArrayXd::Zero(m);
  Eigen::ArrayXd weighted = Eigen::ArrayXd::Zero(m);
  for (const auto &s : submodels) {
    if (s.mean.size() != m || s.variance.size() != m) {
      throw CombinationError("sub-model predictions differ in length");
    }
    if (!(s.variance.array() > 0.0).all()) throw CombinationError("sub-model variance is not positive");
    precision += s.variance.array().inverse();
    weighted += s.mean.array() / s.variance.array();
  }
  PredictiveDistribution out;
  out.mean = (weighted / precision).matrix();
  out.variance = (static_cast<double>(submodels.size()) / precision).matrix();
  out.includes_noise = submodels.front().includes_noise;
  return out;
}

std::string_view method_name(Method m) {
  switch (m) {
    case Method::kMgcpR: return "MGCP-R";
    case Method::kMgcp: return "MGCP";
    case Method::kMgcpT: return "MGCP-T";
    case Method::kMgcpRF: return "MGCP-RF";
    case Method::kBgcpR: return "BGCP-R";
    case Method::kGcp: return "GCP";
  }
  return "";
}

Method parse_method(std::string_view name) {
  for (Method m : all_methods()) {
    if (method_name(m) == name) return m;
  }
  throw ConfigError("unknown method '" + std::string(name) +
                    "' (expected MGCP-R, MGCP, MGCP-T, MGCP-RF, BGCP-R, GCP)");
}

std::vector<Method> all_methods() {
  return {Method::kMgcpR, Method::kMgcp, Method::kMgcpT, Method::kMgcpRF, Method::kBgcpR, Method::kGcp};
}

void BenchConfig::validate(CaseId id) const {
  if (methods.empty()) throw ConfigError("methods must not be empty");
  if (replications < 1) throw ConfigError("replications must be >= 1");
  if (!(gamma >= 0.0)) throw ConfigError("gamma must be >= 0");
  if (restarts < 1) throw ConfigError("restarts must be >= 1");
  for (Method m : methods) {
    if (m == Method::kMgcpT && id != CaseId::kSim1) {
      throw ConfigError("MGCP-T is only defined for sim1 (it needs the known informative sources)");
    }
  }
}

const MethodSummary &BenchResult::summary_for(Method m) const {
  for (const auto &s : summary) {
    if (s.method == m) return s;
  }
  throw ContractViolation("no summary for method " + std::string(method_name(m)));
}

double mean_absolute_error(const Eigen::VectorXd &truth, const Eigen::VectorXd &prediction) {
  if (truth.size() != prediction.size() || truth.size() == 0) {
    throw ContractViolation("mean_absolute_error: length mismatch");
  }
  return (truth - prediction).cwiseAbs().mean();
}

std::uint64_t method_seed(std::uint64_t replication_seed, Method m) {
  return derive_seed(replication_seed, method_name(m));
}

ReplicationRecord run_method(const Scenario &scenario, CaseId id, Method m, const BenchConfig &config,
                             std::uint64_t replication_seed) {
  ReplicationRecord rec;
  rec.method = m;
  TrainConfig tc;
  tc.restarts = config.restarts;
  tc.max_iterations = config.max_iterations;
  tc.seed = method_seed(replication_seed, m);
  tc.gamma = config.gamma;

  const TransferData &full = scenario.data;
  const int q = full.num_sources();
  // Sources produced by domain adaptation are withheld from the plain
  // multi-output baselines in the inconsistent-domain case.
  const std::vector<int> plain =
      id == CaseId::kSim2 ? all_but(q, scenario.adapted) : all_but(q, {});

  try {
    PredictiveDistribution pred;
    auto t0 = Clock::now();
    switch (m) {
      case Method::kMgcpR:
      case Method::kMgcp:
      case Method::kMgcpT: {
        TransferData data = m == Method::kMgcpR   ? full
                            : m == Method::kMgcpT ? full.with_sources(scenario.informative)
                                                  : full.with_sources(plain);
        if (m != Method::kMgcpR) tc.gamma = 0.0;
        const FitResult fr = fit(data, tc);
        rec.fit_seconds = seconds_since(t0);
        t0 = Clock::now();
        pred = predict_target(fr, data, scenario.test_inputs);
        rec.predict_seconds = seconds_since(t0);
        rec.selected_sources = fr.selected_sources;
        rec.abs_transfer_alphas = fr.abs_transfer_alphas();
        if (m == Method::kMgcpT) {
          for (int &s : rec.selected_sources) s = scenario.informative[static_cast<std::size_t>(s)];
        } else if (m == Method::kMgcp) {
          for (int &s : rec.selected_sources) s = plain[static_cast<std::size_t>(s)];
        }
        break;
      }
      case Method::kMgcpRF: {
        tc.structure = CovarianceStructure::kSharedLatent;
        tc.penalty_mode = PenaltyMode::kGroupL1Shared;
        const FitResult fr = fit(full, tc);
        rec.fit_seconds = seconds_since(t0);
        t0 = Clock::now();
        pred = predict_target(fr, full, scenario.test_inputs);
        rec.predict_seconds = seconds_since(t0);
        rec.selected_sources = fr.selected_sources;
        rec.abs_transfer_alphas = fr.abs_transfer_alphas();
        break;
      }
      case Method::kBgcpR: {
        std::vector<FitResult> fits;
        std::vector<TransferData> pairs;
        for (int i : plain) {
          pairs.push_back(full.with_sources({i}));
          TrainConfig sub = tc;
          sub.seed = derive_seed(tc.seed, "pair", static_cast<std::uint64_t>(i));
          fits.push_back(fit(pairs.back(), sub));
          if (!fits.back().selected_sources.empty()) rec.selected_sources.push_back(i);
          rec.abs_transfer_alphas.push_back(fits.back().abs_transfer_alphas().front());
        }
        rec.fit_seconds = seconds_since(t0);
        t0 = Clock::now();
        std::vector<PredictiveDistribution> parts;
        for (std::size_t k = 0; k < fits.size(); ++k) {
          parts.push_back(predict_target(fits[k], pairs[k], scenario.test_inputs));
          parts.back().variance = parts.back().variance.cwiseMax(kVarianceFloor);
        }
        pred = bgcp_combine(parts);
        rec.predict_seconds = seconds_since(t0);
        break;
      }
      case Method::kGcp: {
        TransferData data;
        data.target = full.target;
        tc.penalty_mode = PenaltyMode::kNone;
        const FitResult fr = fit(data, tc);
        rec.fit_seconds = seconds_since(t0);
        t0 = Clock::now();
        pred = predict_target(fr, data, scenario.test_inputs);
        rec.predict_seconds = seconds_since(t0);
        break;
      }
    }
    rec.mae = mean_absolute_error(scenario.test_truth, pred.mean);
    rec.ok = std::isfinite(rec.mae);
    if (!rec.ok) rec.error = "non-finite prediction";
  } catch (const Error &e) {
    rec.ok = false;
    rec.mae = std::numeric_limits<double>::quiet_NaN();
    rec.error = e.what();
  }
  return rec;
}

BenchResult run_benchmark(const ScenarioSpec &spec, const BenchConfig &config) {
  spec.validate();
  config.validate(spec.case_id);
  BenchResult result;
  result.spec = spec;
  result.config = config;
  for (int r = 0; r < config.replications; ++r) {
    ScenarioSpec rs = spec;
    rs.seed = spec.seed + static_cast<std::uint64_t>(r);
    const Scenario scenario = generate(rs);
    for (Method m : config.methods) {
      ReplicationRecord rec = run_method(scenario, spec.case_id, m, config, rs.seed);
      rec.replication = r;
      result.records.push_back(std::move(rec));
    }
  }
  result.summary = summarize(result.records, config.methods);
  return result;
}

std::vector<MethodSummary> summarize(const std::vector<ReplicationRecord> &records,
                                     const std::vector<Method> &methods) {
  std::vector<MethodSummary> out;
  for (Method m : methods) {
    MethodSummary s;
    s.method = m;
    std::vector<double> maes;
    double fit_total = 0.0;
    double predict_total = 0.0;
    for (const auto &rec : records) {
      if (rec.method != m) continue;
      if (!rec.ok) {
        ++s.failed;
        continue;
      }
      ++s.succeeded;
      maes.push_back(rec.mae);
      fit_total += rec.fit_seconds;
      predict_total += rec.predict_seconds;
    }
    const int total = s.succeeded + s.failed;
    s.flagged = total > 0 && 10 * s.failed > total;
    if (!maes.empty()) {
      s.median_mae = median_of(maes);
      s.mean_mae = std::accumulate(maes.begin(), maes.end(), 0.0) / static_cast<double>(maes.size());
      double ss = 0.0;
      for (double v : maes) ss += (v - s.mean_mae) * (v - s.mean_mae);
      s.std_mae = maes.size() > 1 ? std::sqrt(ss / static_cast<double>(maes.size() - 1)) : 0.0;
      s.mean_fit_seconds = fit_total / static_cast<double>(maes.size());
      s.mean_predict_seconds = predict_total / static_cast<double>(maes.size());
    } else {
      s.median_mae = s.mean_mae = s.std_mae = std::numeric_limits<double>::quiet_NaN();
    }
    out.push_back(s);
  }
  return out;
}

std::string replications_csv(const BenchResult &result, bool with_timing) {
  std::ostringstream os;
  os << "replication,method,mae,fit_seconds,predict_seconds,selected_sources,abs_transfer_alphas,error\n";
  for (const auto &rec : result.records) {
    std::vector<std::string> sel, alphas;
    for (int s : rec.selected_sources) sel.push_back(std::to_string(s + 1));
    for (double a : rec.abs_transfer_alphas) alphas.push_back(csv::format_double(a));
    std::string error = rec.error;
    std::replace(error.begin(), error.end(), ',', ';');
    std::replace(error.begin(), error.end(), '\n', ' ');
    os << rec.replication << ',' << method_name(rec.method) << ','
       << (rec.ok ? csv::format_double(rec.mae) : std::string()) << ','
       << (with_timing ? csv::format_double(rec.fit_seconds) : std::string()) << ','
       << (with_timing ? csv::format_double(rec.predict_seconds) : std::string()) << ','
       << csv::join(sel, ';') << ',' << csv::join(alphas, ';') << ',' << error << '\n';
  }
  return os.str();
}

std::string summary_csv(const BenchResult &result, bool with_timing) {
  std::ostringstream os;
  os << "method,succeeded,failed,median_mae,mean_mae,std_mae,mean_fit_seconds,mean_predict_seconds,flagged\n";
  for (const auto &s : result.summary) {
    os << method_name(s.method) << ',' << s.succeeded << ',' << s.failed << ','
       << csv::format_double(s.median_mae) << ',' << csv::format_double(s.mean_mae) << ','
       << csv::format_double(s.std_mae) << ','
       << (with_timing ? csv::format_double(s.mean_fit_seconds) : std::string()) << ','
       << (with_timing ? csv::format_double(s.mean_predict_seconds) : std::string()) << ','
       << (s.flagged ? "true" : "false") << '\n';
  }
  return os.str();
}

}  // namespace mgcp

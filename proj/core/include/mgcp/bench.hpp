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

#ifndef MGCP_BENCH_HPP
#define MGCP_BENCH_HPP

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mgcp/covblock.hpp"
#include "mgcp/data.hpp"

namespace mgcp {

enum class CaseId { kSim1, kSim2, kSim3Setting1, kSim3Setting2 };

std::string_view case_name(CaseId id);
CaseId parse_case(std::string_view name);  // throws ConfigError

struct ScenarioSpec {
  CaseId case_id = CaseId::kSim1;
  int n_e = 2;
  int n = 30;
  int n_t = 10;
  int n_test = 60;
  double noise_std = 0.2;
  std::uint64_t seed = 0;
  // Family perturbations e[family][k * dims + j]; drawn from the seed when empty.
  std::vector<std::vector<double>> perturbations;

  // Default sizes for the case; n_e is kept.
  static ScenarioSpec defaults(CaseId id, int n_e = 2);
  void validate() const;
};

struct Scenario {
  TransferData data;
  Eigen::MatrixXd test_inputs;
  Eigen::VectorXd test_truth;        // noise-free target values
  std::vector<int> informative;      // sources the target is built from
  std::vector<int> adapted;          // sources produced by domain adaptation
  std::vector<std::vector<double>> perturbations;
};

namespace sim {
double case1_source(int i, double x);  // i in [0, 4)
double case1_target(double x);
double case2_source(int i, double x1, double x2);  // i in [0, 3)
double case2_target(double x1, double x2);
}  // namespace sim

Scenario generate_case1(const ScenarioSpec &spec);
Scenario generate_case2(const ScenarioSpec &spec);
Scenario generate_case3(const ScenarioSpec &spec);
Scenario generate(const ScenarioSpec &spec);

// Inverse-variance combination of per-source predictions:
// mean = sum mu_i / V_i / sum 1 / V_i,  variance = q / sum 1 / V_i.
PredictiveDistribution bgcp_combine(const std::vector<PredictiveDistribution> &submodels);

enum class Method { kMgcpR, kMgcp, kMgcpT, kMgcpRF, kBgcpR, kGcp };

std::string_view method_name(Method m);
Method parse_method(std::string_view name);  // throws ConfigError
std::vector<Method> all_methods();

struct BenchConfig {
  std::vector<Method> methods;
  int replications = 20;
  // Penalty weight used by MGCP-R, MGCP-RF and BGCP-R.
  double gamma = 2.5;
  int restarts = 5;
  int max_iterations = 2000;

  void validate(CaseId id) const;
};

struct ReplicationRecord {
  int replication = 0;
  Method method = Method::kMgcpR;
  bool ok = false;
  double mae = 0.0;
  double fit_seconds = 0.0;
  double predict_seconds = 0.0;
  std::vector<int> selected_sources;
  std::vector<double> abs_transfer_alphas;
  std::string error;
};

struct MethodSummary {
  Method method = Method::kMgcpR;
  int succeeded = 0;
  int failed = 0;
  double median_mae = 0.0;
  double mean_mae = 0.0;
  double std_mae = 0.0;
  double mean_fit_seconds = 0.0;
  double mean_predict_seconds = 0.0;
  bool flagged = false;  // more than 10% of replications failed
};

struct BenchResult {
  ScenarioSpec spec;
  BenchConfig config;
  std::vector<ReplicationRecord> records;  // replication-major, methods in config order
  std::vector<MethodSummary> summary;

  const MethodSummary &summary_for(Method m) const;
};

double mean_absolute_error(const Eigen::VectorXd &truth, const Eigen::VectorXd &prediction);

// Seed of one method's fit within one replication.
std::uint64_t method_seed(std::uint64_t replication_seed, Method m);

// Fits one method on a generated scenario and scores it.
ReplicationRecord run_method(const Scenario &scenario, CaseId id, Method m, const BenchConfig &config,
                             std::uint64_t replication_seed);

// Replication r regenerates data with seed spec.seed + r.
BenchResult run_benchmark(const ScenarioSpec &spec, const BenchConfig &config);

std::vector<MethodSummary> summarize(const std::vector<ReplicationRecord> &records,
                                     const std::vector<Method> &methods);

// CSV bodies. Timing columns are left empty unless `with_timing`, so that
// reruns produce identical bytes.
std::string replications_csv(const BenchResult &result, bool with_timing);
std::string summary_csv(const BenchResult &result, bool with_timing);

}  // namespace mgcp

#endif  // MGCP_BENCH_HPP

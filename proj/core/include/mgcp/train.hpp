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

#ifndef MGCP_TRAIN_HPP
#define MGCP_TRAIN_HPP

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mgcp/covblock.hpp"
#include "mgcp/data.hpp"
#include "mgcp/hyperparameters.hpp"

namespace mgcp {

enum class PenaltyMode {
  kL1Transfer,     // gamma * sum_i |alpha_it|, Huber-smoothed
  kGroupL1Shared,  // gamma * sum_i ||(alpha_0i, alpha_it)||, requires the shared-latent structure
  kNone,
};

struct TrainConfig {
  double gamma = 0.0;
  double eta = 1e-5;  // Huber knot; also the group-norm smoothing epsilon
  int restarts = 5;
  int max_iterations = 2000;
  double convergence_tol = 1e-5;  // max-norm of the objective gradient
  double function_tol = 1e-7;     // relative objective change per iteration
  std::uint64_t seed = 0;
  PenaltyMode penalty_mode = PenaltyMode::kL1Transfer;
  CovarianceStructure structure = CovarianceStructure::kIndependentSources;
  int cv_folds = 5;
  std::vector<double> gamma_grid;
  double selection_threshold = 1e-2;
  double jitter = kDefaultJitter;
  // Scale-only by default: centring outputs observed on different input
  // regions adds offsets between them that the cross-covariances cannot absorb.
  StandardizeMode standardize = StandardizeMode::kScale;

  // Throws ConfigError.
  void validate() const;
};

struct RestartDiagnostics {
  std::uint64_t seed = 0;
  bool succeeded = false;
  double objective = 0.0;
  int iterations = 0;
  double gradient_max_norm = 0.0;
  double seconds = 0.0;
  std::string message;
  // Penalised objective after every accepted iteration, starting point first.
  std::vector<double> trace;
};

struct FitResult {
  Hyperparameters theta_hat;  // in standardised response units
  double objective = 0.0;     // penalised objective at theta_hat
  std::vector<int> selected_sources;
  std::vector<double> per_restart_objectives;  // NaN for failed restarts
  std::vector<RestartDiagnostics> diagnostics;
  int best_restart = -1;
  std::vector<Standardizer> source_scalers;
  Standardizer target_scaler;
  TrainConfig config;

  std::vector<double> abs_transfer_alphas() const;
};

// gamma * sum_i h_eta(alpha_i),  h = a^2/(2 eta) for |a| <= eta, |a| - eta/2 otherwise.
double huber_l1(std::span<const double> alphas, double gamma, double eta);
double huber_l1_derivative(double alpha, double gamma, double eta);

// gamma * sum_i (sqrt(a_i^2 + b_i^2 + eps^2) - eps)
double group_l1_smoothed(std::span<const double> a, std::span<const double> b, double gamma,
                         double eps);

double penalty(const Hyperparameters &theta, const TrainConfig &config);

// Log-likelihood minus the configured penalty. `data` is used as given.
double penalized_objective(const TransferData &data, const Hyperparameters &theta,
                           const TrainConfig &config);

Eigen::VectorXd objective_gradient(const TransferData &data, const Hyperparameters &theta,
                                   const TrainConfig &config);

// Single quasi-Newton ascent from `start` on already-prepared data.
struct AscentResult {
  Hyperparameters theta;
  RestartDiagnostics diagnostics;
};
AscentResult maximize_from(const TransferData &data, const Hyperparameters &start,
                           const TrainConfig &config);

// Multi-start regularised maximum likelihood. Throws OptimizationFailed when
// every restart fails.
FitResult fit(const TransferData &data, const TrainConfig &config);

// Predictive distribution of the target in original response units.
PredictiveDistribution predict_target(const FitResult &fit, const TransferData &data,
                                      const Eigen::MatrixXd &query, bool include_noise = false);

struct GammaScore {
  double gamma = 0.0;
  double cv_mae = 0.0;
  std::vector<double> fold_mae;
};

struct GammaSelection {
  double gamma_best = 0.0;
  std::vector<GammaScore> cv_table;  // ascending gamma
};

// k-fold cross-validation over target observations; sources always stay in
// the training fold. Ties go to the larger gamma.
GammaSelection select_gamma(const TransferData &data, const TrainConfig &config);

struct GammaPathRow {
  double gamma = 0.0;
  double cv_mae = 0.0;
  int selected_count = 0;
  std::vector<double> abs_transfer_alphas;
};

// select_gamma plus a full-data fit at every grid value.
std::vector<GammaPathRow> sweep_gamma(const TransferData &data, const TrainConfig &config);

}  // namespace mgcp

#endif  // MGCP_TRAIN_HPP

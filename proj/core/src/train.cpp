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

#include "mgcp/train.hpp"

#include <ceres/ceres.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "mgcp/errors.hpp"
#include "mgcp/parallel.hpp"
#include "mgcp/seed.hpp"

namespace mgcp {

namespace {

// Log-parameters beyond this are treated as an invalid step.
constexpr double kMaxAbsLogParameter = 30.0;

void penalty_gradient(const Hyperparameters &theta, const TrainConfig &config,
                      Eigen::VectorXd &grad) {
  const ParameterLayout lay = theta.layout();
  if (config.penalty_mode == PenaltyMode::kL1Transfer) {
    for (int i = 0; i < lay.num_sources; ++i) {
      grad[lay.transfer_alpha_index(i)] +=
          huber_l1_derivative(theta.transfer_kernels[i].alpha, config.gamma, config.eta);
    }
  } else if (config.penalty_mode == PenaltyMode::kGroupL1Shared) {
    for (int i = 0; i < lay.num_sources; ++i) {
      const double a = (*theta.shared_kernels)[i].alpha;
      const double b = theta.transfer_kernels[i].alpha;
      const double norm = std::sqrt(a * a + b * b + config.eta * config.eta);
      grad[lay.shared_alpha_index(i)] += config.gamma * a / norm;
      grad[lay.transfer_alpha_index(i)] += config.gamma * b / norm;
    }
  }
}

class NegativeObjective final : public ceres::FirstOrderFunction {
 public:
  NegativeObjective(const TransferData &data, const ParameterLayout &layout,
                    const TrainConfig &config)
      : data_(data), layout_(layout), config_(config) {}

  bool Evaluate(const double *parameters, double *cost, double *gradient) const override {
    const Eigen::Map<const Eigen::VectorXd> x(parameters, layout_.size());
    if (!x.allFinite()) return false;
    for (int k = 0; k < layout_.num_kernels(); ++k) {
      for (Eigen::Index j = 0; j < layout_.dim; ++j) {
        if (std::abs(x[layout_.log_lambda_index(k, j)]) > kMaxAbsLogParameter) return false;
      }
    }
    for (int i = 0; i <= layout_.num_sources; ++i) {
      if (std::abs(x[layout_.log_sigma_index(i)]) > kMaxAbsLogParameter) return false;
    }
    try {
      const Hyperparameters theta = Hyperparameters::unflatten(layout_, x);
      const CovarianceBundle bundle = assemble_covariance(data_, theta, config_.jitter);
      const double value =
          log_likelihood(bundle, data_.stacked_responses()) - penalty(theta, config_);
      if (!std::isfinite(value)) return false;
      *cost = -value;
      if (gradient != nullptr) {
        Eigen::VectorXd g = log_likelihood_gradient(bundle, data_, theta);
        Eigen::VectorXd pg = Eigen::VectorXd::Zero(g.size());
        penalty_gradient(theta, config_, pg);
        g -= pg;
        if (!g.allFinite()) return false;
        Eigen::Map<Eigen::VectorXd>(gradient, layout_.size()) = -g;
      }
      return true;
    } catch (const Error &) {
      return false;
    }
  }

  int NumParameters() const override { return static_cast<int>(layout_.size()); }

 private:
  const TransferData &data_;
  ParameterLayout layout_;
  const TrainConfig &config_;
};

class TraceRecorder final : public ceres::IterationCallback {
 public:
  explicit TraceRecorder(std::vector<double> &trace) : trace_(trace) {}
  ceres::CallbackReturnType operator()(const ceres::IterationSummary &summary) override {
    if (summary.iteration == 0 || summary.step_is_successful) trace_.push_back(-summary.cost);
    return ceres::SOLVER_CONTINUE;
  }

 private:
  std::vector<double> &trace_;
};

ParameterLayout layout_for(const TransferData &data, const TrainConfig &config) {
  return {data.num_sources(), data.dim(),
          config.structure == CovarianceStructure::kSharedLatent};
}

std::vector<int> selected_from(const Hyperparameters &theta, double threshold) {
  std::vector<int> out;
  for (int i = 0; i < theta.num_sources(); ++i) {
    if (std::abs(theta.transfer_kernels[i].alpha) > threshold) out.push_back(i);
  }
  return out;
}

double mean_abs_error(const Eigen::VectorXd &a, const Eigen::VectorXd &b) {
  return (a - b).cwiseAbs().mean();
}

}  // namespace

void TrainConfig::validate() const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be finite and >= 0");
  if (!(eta > 0.0 && eta <= 1e-2)) throw ConfigError("eta must lie in (0, 1e-2]");
  if (restarts < 1) throw ConfigError("restarts must be >= 1");
  if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (!(convergence_tol > 0.0)) throw ConfigError("convergence_tol must be > 0");
  if (!(function_tol > 0.0)) throw ConfigError("function_tol must be > 0");
  if (!(jitter >= 0.0)) throw ConfigError("jitter must be >= 0");
  if (!(selection_threshold >= 0.0)) throw ConfigError("selection_threshold must be >= 0");
  if (penalty_mode == PenaltyMode::kGroupL1Shared &&
      structure != CovarianceStructure::kSharedLatent) {
    throw ConfigError("group-l1-rf penalty requires the shared-latent structure");
  }
  for (double g : gamma_grid) {
    if (!(g >= 0.0) || !std::isfinite(g)) throw ConfigError("gamma_grid entries must be >= 0");
  }
}

std::vector<double> FitResult::abs_transfer_alphas() const {
  std::vector<double> out;
  for (const auto &k : theta_hat.transfer_kernels) out.push_back(std::abs(k.alpha));
  return out;
}

double huber_l1(std::span<const double> alphas, double gamma, double eta) {
  double sum = 0.0;
  for (double a : alphas) {
    const double m = std::abs(a);
    sum += m <= eta ? a * a / (2.0 * eta) : m - 0.5 * eta;
  }
  return gamma * sum;
}

double huber_l1_derivative(double alpha, double gamma, double eta) {
  if (std::abs(alpha) <= eta) return gamma * alpha / eta;
  return alpha > 0.0 ? gamma : -gamma;
}

double group_l1_smoothed(std::span<const double> a, std::span<const double> b, double gamma,
                         double eps) {
  if (a.size() != b.size()) throw ContractViolation("group_l1_smoothed: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum += std::sqrt(a[i] * a[i] + b[i] * b[i] + eps * eps) - eps;
  }
  return gamma * sum;
}

double penalty(const Hyperparameters &theta, const TrainConfig &config) {
  switch (config.penalty_mode) {
    case PenaltyMode::kNone:
      return 0.0;
    case PenaltyMode::kL1Transfer: {
      const auto alphas = theta.transfer_alphas();
      return huber_l1(alphas, config.gamma, config.eta);
    }
    case PenaltyMode::kGroupL1Shared: {
      if (!theta.shared_latent()) {
        throw ContractViolation("group-l1-rf penalty needs shared-latent hyperparameters");
      }
      std::vector<double> shared;
      for (const auto &k : *theta.shared_kernels) shared.push_back(k.alpha);
      const auto transfer = theta.transfer_alphas();
      return group_l1_smoothed(shared, transfer, config.gamma, config.eta);
    }
  }
  return 0.0;
}

double penalized_objective(const TransferData &data, const Hyperparameters &theta,
                           const TrainConfig &config) {
  const CovarianceBundle bundle = assemble_covariance(data, theta, config.jitter);
  return log_likelihood(bundle, data.stacked_responses()) - penalty(theta, config);
}

Eigen::VectorXd objective_gradient(const TransferData &data, const Hyperparameters &theta,
                                   const TrainConfig &config) {
  const CovarianceBundle bundle = assemble_covariance(data, theta, config.jitter);
  Eigen::VectorXd grad = log_likelihood_gradient(bundle, data, theta);
  Eigen::VectorXd pg = Eigen::VectorXd::Zero(grad.size());
  penalty_gradient(theta, config, pg);
  return grad - pg;
}

AscentResult maximize_from(const TransferData &data, const Hyperparameters &start,
                           const TrainConfig &config) {
  const ParameterLayout layout = start.layout();
  AscentResult out{start, {}};
  const auto t0 = std::chrono::steady_clock::now();

  Eigen::VectorXd x = start.flatten();
  ceres::GradientProblem problem(new NegativeObjective(data, layout, config));
  ceres::GradientProblemSolver::Options options;
  options.line_search_direction_type = ceres::LBFGS;
  options.line_search_type = ceres::WOLFE;
  options.max_num_iterations = config.max_iterations;
  options.gradient_tolerance = config.convergence_tol;
  options.function_tolerance = config.function_tol;
  options.parameter_tolerance = 1e-10;
  options.logging_type = ceres::SILENT;
  options.minimizer_progress_to_stdout = false;
  TraceRecorder recorder(out.diagnostics.trace);
  options.callbacks.push_back(&recorder);

  ceres::GradientProblemSolver::Summary summary;
  ceres::Solve(options, problem, x.data(), &summary);

  out.diagnostics.iterations = static_cast<int>(summary.iterations.size());
  out.diagnostics.message = summary.message;
  out.diagnostics.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!summary.IsSolutionUsable() || !x.allFinite()) {
    out.diagnostics.succeeded = false;
    out.diagnostics.objective = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.theta = Hyperparameters::unflatten(layout, x);
  try {
    out.diagnostics.objective = penalized_objective(data, out.theta, config);
    out.diagnostics.gradient_max_norm =
        objective_gradient(data, out.theta, config).lpNorm<Eigen::Infinity>();
    out.diagnostics.succeeded = std::isfinite(out.diagnostics.objective);
  } catch (const Error &e) {
    out.diagnostics.succeeded = false;
    out.diagnostics.message = e.what();
  }
  return out;
}

FitResult fit(const TransferData &data, const TrainConfig &config) {
  config.validate();
  data.validate();
  FitResult result;
  result.config = config;
  TransferData prepared;
  {
    StandardizedData sd = standardize(data, config.standardize);
    prepared = std::move(sd.data);
    result.source_scalers = std::move(sd.source_scalers);
    result.target_scaler = sd.target_scaler;
  }
  const ParameterLayout layout = layout_for(prepared, config);

  std::vector<AscentResult> runs(static_cast<std::size_t>(config.restarts));
  parallel_for(runs.size(), [&](std::size_t r) {
    const std::uint64_t seed = derive_seed(config.seed, "restart", r);
    std::mt19937_64 rng(seed);
    const Hyperparameters start = Hyperparameters::random(layout, rng);
    try {
      runs[r] = maximize_from(prepared, start, config);
    } catch (const Error &e) {
      runs[r].theta = start;
      runs[r].diagnostics.succeeded = false;
      runs[r].diagnostics.message = e.what();
      runs[r].diagnostics.objective = std::numeric_limits<double>::quiet_NaN();
    }
    runs[r].diagnostics.seed = seed;
  });

  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto &diag = runs[r].diagnostics;
    result.per_restart_objectives.push_back(diag.objective);
    result.diagnostics.push_back(diag);
    if (!diag.succeeded) continue;
    if (result.best_restart < 0 || diag.objective > result.objective) {
      result.best_restart = static_cast<int>(r);
      result.objective = diag.objective;
    }
  }
  if (result.best_restart < 0) {
    std::string msg = "all " + std::to_string(config.restarts) + " restarts failed";
    if (!result.diagnostics.empty()) msg += "; first: " + result.diagnostics.front().message;
    throw OptimizationFailed(msg);
  }
  result.theta_hat = runs[static_cast<std::size_t>(result.best_restart)].theta;
  result.selected_sources = selected_from(result.theta_hat, config.selection_threshold);
  return result;
}

PredictiveDistribution predict_target(const FitResult &fit, const TransferData &data,
                                      const Eigen::MatrixXd &query, bool include_noise) {
  if (static_cast<int>(fit.source_scalers.size()) != data.num_sources()) {
    throw ContractViolation("predict_target: data has a different number of sources than the fit");
  }
  TransferData prepared = data;
  for (int i = 0; i < data.num_sources(); ++i) {
    prepared.sources[i].responses = fit.source_scalers[i].apply(data.sources[i].responses);
  }
  prepared.target.responses = fit.target_scaler.apply(data.target.responses);
  const CovarianceBundle bundle = assemble_covariance(prepared, fit.theta_hat, fit.config.jitter);
  PredictiveDistribution out = predict(bundle, prepared, fit.theta_hat, query, include_noise);
  const double s = fit.target_scaler.scale;
  out.mean = fit.target_scaler.invert(out.mean);
  out.variance *= s * s;
  return out;
}

GammaSelection select_gamma(const TransferData &data, const TrainConfig &config) {
  config.validate();
  if (config.gamma_grid.empty()) throw ConfigError("gamma_grid must not be empty");
  if (config.cv_folds < 2) throw ConfigError("cv_folds must be >= 2");
  const Eigen::Index nt = data.target.size();
  if (nt < config.cv_folds) {
    throw ConfigError("cv_folds (" + std::to_string(config.cv_folds) +
                      ") exceeds the number of target observations (" + std::to_string(nt) + ")");
  }
  std::vector<double> grid = config.gamma_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::vector<Eigen::Index> perm(static_cast<std::size_t>(nt));
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(derive_seed(config.seed, "cv-folds"));
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<int> fold_of(static_cast<std::size_t>(nt));
  for (std::size_t k = 0; k < perm.size(); ++k) {
    fold_of[static_cast<std::size_t>(perm[k])] = static_cast<int>(k % config.cv_folds);
  }

  const auto split_target = [&](int fold, bool held_out) {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index r = 0; r < nt; ++r) {
      if ((fold_of[static_cast<std::size_t>(r)] == fold) == held_out) rows.push_back(r);
    }
    OutputData part;
    part.role = OutputRole::kTarget;
    part.name = data.target.name;
    part.inputs.resize(static_cast<Eigen::Index>(rows.size()), data.dim());
    part.responses.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
      part.inputs.row(static_cast<Eigen::Index>(k)) = data.target.inputs.row(rows[k]);
      part.responses[static_cast<Eigen::Index>(k)] = data.target.responses[rows[k]];
    }
    return part;
  };

  GammaSelection selection;
  double best = std::numeric_limits<double>::infinity();
  for (double gamma : grid) {
    GammaScore score;
    score.gamma = gamma;
    for (int f = 0; f < config.cv_folds; ++f) {
      TransferData train = data;
      train.target = split_target(f, false);
      const OutputData held = split_target(f, true);
      TrainConfig c = config;
      c.gamma = gamma;
      c.seed = derive_seed(config.seed, "cv-fit", static_cast<std::uint64_t>(f));
      const FitResult fr = fit(train, c);
      const PredictiveDistribution pd = predict_target(fr, train, held.inputs);
      score.fold_mae.push_back(mean_abs_error(pd.mean, held.responses));
    }
    score.cv_mae = std::accumulate(score.fold_mae.begin(), score.fold_mae.end(), 0.0) /
                   static_cast<double>(score.fold_mae.size());
    if (score.cv_mae <= best) {
      best = score.cv_mae;
      selection.gamma_best = gamma;
    }
    selection.cv_table.push_back(std::move(score));
  }
  return selection;
}

std::vector<GammaPathRow> sweep_gamma(const TransferData &data, const TrainConfig &config) {
  const GammaSelection selection = select_gamma(data, config);
  std::vector<GammaPathRow> rows;
  for (const GammaScore &score : selection.cv_table) {
    TrainConfig c = config;
    c.gamma = score.gamma;
    const FitResult fr = fit(data, c);
    GammaPathRow row;
    row.gamma = score.gamma;
    row.cv_mae = score.cv_mae;
    row.selected_count = static_cast<int>(fr.selected_sources.size());
    row.abs_transfer_alphas = fr.abs_transfer_alphas();
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace mgcp

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

#include "mgcp/dame.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include "mgcp/errors.hpp"
#include "mgcp/seed.hpp"
#include "mgcp/train.hpp"

namespace mgcp {

namespace {

std::vector<int> expand_counts(const DameConfig &config, std::size_t unique_dims) {
  if (config.n_expand.size() == unique_dims) return config.n_expand;
  if (config.n_expand.size() == 1) return std::vector<int>(unique_dims, config.n_expand.front());
  throw ConfigError("n_expand has " + std::to_string(config.n_expand.size()) +
                    " entries for " + std::to_string(unique_dims) + " unique target columns");
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd &X, const std::vector<int> &cols) {
  Eigen::MatrixXd out(X.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = X.col(cols[k]);
  return out;
}

}  // namespace

void DomainSpec::validate(Eigen::Index source_dim, Eigen::Index target_dim) const {
  if (shared_features.empty()) {
    throw DomainSpecError("shared_features is empty: domain adaptation needs at least one input "
                          "feature shared by source and target");
  }
  std::set<int> seen;
  for (int c : shared_features) {
    if (c < 0 || c >= source_dim) {
      throw DomainSpecError("shared_features index " + std::to_string(c) + " outside source columns");
    }
    if (!seen.insert(c).second) throw DomainSpecError("shared_features repeats column " + std::to_string(c));
  }
  for (int c : source_unique) {
    if (c < 0 || c >= source_dim) {
      throw DomainSpecError("source_unique index " + std::to_string(c) + " outside source columns");
    }
    if (!seen.insert(c).second) {
      throw DomainSpecError("source column " + std::to_string(c) +
                            " is listed as both shared and unique");
    }
  }
  if (static_cast<Eigen::Index>(seen.size()) != source_dim) {
    throw DomainSpecError("shared_features and source_unique do not cover all " +
                          std::to_string(source_dim) + " source columns");
  }
  if (target_shared_columns.size() != shared_features.size()) {
    throw DomainSpecError("target_shared_columns must have one entry per shared feature");
  }
  std::set<int> tseen;
  for (int c : target_shared_columns) tseen.insert(c);
  for (int c : target_unique_columns) tseen.insert(c);
  if (static_cast<Eigen::Index>(tseen.size()) != target_dim ||
      target_shared_columns.size() + target_unique_columns.size() !=
          static_cast<std::size_t>(target_dim) ||
      *tseen.begin() != 0 || *tseen.rbegin() != target_dim - 1) {
    throw DomainSpecError("target_shared_columns and target_unique_columns must partition the " +
                          std::to_string(target_dim) + " target columns");
  }
  if (!target_unique_bounds.empty() && target_unique_bounds.size() != target_unique_columns.size()) {
    throw DomainSpecError("target_unique_bounds must have one entry per unique target column");
  }
  for (const auto &[lo, hi] : target_unique_bounds) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) {
      throw DomainSpecError("target_unique_bounds entries must be finite with low <= high");
    }
  }
}

void DameConfig::validate() const {
  if (n_induced && *n_induced < 1) throw ConfigError("n_induced must be >= 1");
  if (n_expand.empty()) throw ConfigError("n_expand must not be empty");
  for (int n : n_expand) {
    if (n < 1) throw ConfigError("n_expand entries must be >= 1");
  }
  if (bandwidth && !(*bandwidth > 0.0 && std::isfinite(*bandwidth))) {
    throw ConfigError("bandwidth must be > 0");
  }
  for (double h : bandwidth_grid) {
    if (!(h > 0.0 && std::isfinite(h))) throw ConfigError("bandwidth_grid entries must be > 0");
  }
  if (folds < 2) throw ConfigError("folds must be >= 2");
  if (expansion_noise_std && !(*expansion_noise_std >= 0.0)) {
    throw ConfigError("expansion_noise_std must be >= 0");
  }
}

Eigen::VectorXd nadaraya_watson(const Eigen::MatrixXd &X, const Eigen::VectorXd &y,
                                const Eigen::MatrixXd &query, double bandwidth) {
  if (X.rows() != y.size() || X.rows() == 0) {
    throw ContractViolation("nadaraya_watson: need matching, non-empty X and y");
  }
  if (query.cols() != X.cols()) throw ContractViolation("nadaraya_watson: query dimension mismatch");
  if (!(bandwidth > 0.0)) throw BandwidthError("bandwidth must be > 0");
  const double scale = -0.5 / (bandwidth * bandwidth);
  Eigen::VectorXd out(query.rows());
  for (Eigen::Index m = 0; m < query.rows(); ++m) {
    double num = 0.0;
    double den = 0.0;
    for (Eigen::Index b = 0; b < X.rows(); ++b) {
      const double w = std::exp(scale * (X.row(b) - query.row(m)).squaredNorm());
      num += w * y[b];
      den += w;
    }
    if (!(den > 0.0)) {
      throw BandwidthError("all kernel weights vanish at a query point; bandwidth " +
                           std::to_string(bandwidth) + " is too small");
    }
    out[m] = num / den;
  }
  return out;
}

std::vector<double> default_bandwidth_grid(const Eigen::MatrixXd &X) {
  const double spread = (X.colwise().maxCoeff() - X.colwise().minCoeff()).maxCoeff();
  const double base = spread > 0.0 ? spread : 1.0;
  std::vector<double> grid;
  constexpr int kCount = 25;
  for (int k = 0; k < kCount; ++k) {
    grid.push_back(base * std::pow(10.0, -2.0 + 3.0 * k / (kCount - 1)));
  }
  return grid;
}

double select_bandwidth(const Eigen::MatrixXd &X, const Eigen::VectorXd &y,
                        const std::vector<double> &grid, int folds, std::uint64_t seed) {
  if (grid.empty()) throw ConfigError("bandwidth grid must not be empty");
  if (X.rows() != y.size()) throw ContractViolation("select_bandwidth: X and y disagree");
  if (folds < 2) throw ConfigError("folds must be >= 2");
  if (X.rows() < folds) {
    throw BandwidthError("need at least " + std::to_string(folds) + " points for " +
                         std::to_string(folds) + "-fold bandwidth selection");
  }
  if (grid.size() == 1) return grid.front();

  // Group identical rows so duplicated observations never straddle folds.
  std::map<std::vector<double>, int> group_of_row;
  std::vector<int> group(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    std::vector<double> key(static_cast<std::size_t>(X.cols()));
    for (Eigen::Index c = 0; c < X.cols(); ++c) key[static_cast<std::size_t>(c)] = X(r, c);
    const auto [it, inserted] =
        group_of_row.emplace(std::move(key), static_cast<int>(group_of_row.size()));
    group[static_cast<std::size_t>(r)] = it->second;
  }
  const int groups = static_cast<int>(group_of_row.size());
  if (groups < 2) throw BandwidthError("all inputs are identical; bandwidth is not identifiable");
  const int k = std::min(folds, groups);

  std::vector<int> order(static_cast<std::size_t>(groups));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(derive_seed(seed, "bandwidth-folds"));
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> fold_of_group(static_cast<std::size_t>(groups));
  for (std::size_t p = 0; p < order.size(); ++p) {
    fold_of_group[static_cast<std::size_t>(order[p])] = static_cast<int>(p % static_cast<std::size_t>(k));
  }

  double best_h = 0.0;
  double best_err = std::numeric_limits<double>::infinity();
  for (double h : grid) {
    double err = 0.0;
    bool usable = true;
    for (int f = 0; f < k && usable; ++f) {
      std::vector<Eigen::Index> train, held;
      for (Eigen::Index r = 0; r < X.rows(); ++r) {
        (fold_of_group[static_cast<std::size_t>(group[static_cast<std::size_t>(r)])] == f ? held : train)
            .push_back(r);
      }
      const Eigen::MatrixXd Xtr = X(train, Eigen::all);
      const Eigen::VectorXd ytr = y(train);
      try {
        const Eigen::VectorXd pred = nadaraya_watson(Xtr, ytr, X(held, Eigen::all), h);
        err += (pred - y(held)).squaredNorm();
      } catch (const BandwidthError &) {
        usable = false;
      }
    }
    if (!usable) continue;
    err /= static_cast<double>(X.rows());
    if (err < best_err) {
      best_err = err;
      best_h = h;
    }
  }
  if (!std::isfinite(best_err)) {
    throw BandwidthError("no bandwidth candidate gives non-vanishing kernel weights");
  }
  return best_h;
}

Eigen::MatrixXd induced_design(const Eigen::VectorXd &lo, const Eigen::VectorXd &hi, int n,
                               std::uint64_t seed) {
  if (n < 1) throw ConfigError("n_induced must be >= 1");
  const Eigen::Index d = lo.size();
  Eigen::MatrixXd out(n, d);
  if (d == 1) {
    for (int a = 0; a < n; ++a) {
      out(a, 0) = n == 1 ? 0.5 * (lo[0] + hi[0]) : lo[0] + (hi[0] - lo[0]) * a / (n - 1);
    }
    return out;
  }
  std::mt19937_64 rng(derive_seed(seed, "latin-hypercube"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Eigen::Index j = 0; j < d; ++j) {
    std::vector<int> strata(static_cast<std::size_t>(n));
    std::iota(strata.begin(), strata.end(), 0);
    std::shuffle(strata.begin(), strata.end(), rng);
    for (int a = 0; a < n; ++a) {
      const double u = (strata[static_cast<std::size_t>(a)] + unit(rng)) / n;
      out(a, j) = lo[j] + (hi[j] - lo[j]) * u;
    }
  }
  return out;
}

int resolve_n_induced(const DameConfig &config, Eigen::Index target_size) {
  if (config.n_induced) return *config.n_induced;
  return static_cast<int>(std::clamp<Eigen::Index>(target_size - 1, 1, 10));
}

InducedSet marginalize(const OutputData &source, const DomainSpec &spec, const DameConfig &config,
                       int n_induced) {
  config.validate();
  source.validate();
  if (source.size() < 2) throw DataError("marginalize needs at least two source observations");
  if (spec.shared_features.empty()) {
    throw DomainSpecError("shared_features is empty: domain adaptation needs at least one input "
                          "feature shared by source and target");
  }
  const Eigen::MatrixXd projected = select_columns(source.inputs, spec.shared_features);
  const double h = config.bandwidth
                       ? *config.bandwidth
                       : select_bandwidth(projected, source.responses,
                                          config.bandwidth_grid.empty()
                                              ? default_bandwidth_grid(projected)
                                              : config.bandwidth_grid,
                                          config.folds, config.seed);
  InducedSet out;
  out.inputs = induced_design(projected.colwise().minCoeff().transpose(),
                              projected.colwise().maxCoeff().transpose(), n_induced, config.seed);
  out.responses = nadaraya_watson(projected, source.responses, out.inputs, h);
  return out;
}

double estimate_noise_std(const OutputData &target, std::uint64_t seed) {
  TransferData single;
  single.target = target;
  single.target.role = OutputRole::kTarget;
  TrainConfig config;
  config.penalty_mode = PenaltyMode::kNone;
  config.restarts = 3;
  config.seed = derive_seed(seed, "noise-estimate");
  try {
    const FitResult fr = fit(single, config);
    return std::exp(fr.theta_hat.log_sigma_target) * fr.target_scaler.scale;
  } catch (const Error &) {
    const double h = select_bandwidth(target.inputs, target.responses,
                                      default_bandwidth_grid(target.inputs),
                                      std::min<int>(5, static_cast<int>(target.size())), seed);
    const Eigen::VectorXd r =
        target.responses - nadaraya_watson(target.inputs, target.responses, target.inputs, h);
    return std::sqrt((r.array() - r.mean()).square().sum() /
                     std::max<double>(1.0, static_cast<double>(r.size() - 1)));
  }
}

OutputData expand(const InducedSet &induced, const DomainSpec &spec, const DameConfig &config,
                  const OutputData &target) {
  config.validate();
  const std::size_t du = spec.target_unique_columns.size();
  const Eigen::Index dim = static_cast<Eigen::Index>(spec.target_shared_columns.size() + du);
  if (induced.inputs.cols() != static_cast<Eigen::Index>(spec.target_shared_columns.size())) {
    throw DomainSpecError("induced inputs have " + std::to_string(induced.inputs.cols()) +
                          " columns but the domain spec lists " +
                          std::to_string(spec.target_shared_columns.size()) + " shared features");
  }
  const bool have_target = target.size() > 0;
  if (have_target && target.dim() != dim) {
    throw DomainSpecError("target has " + std::to_string(target.dim()) +
                          " columns but the domain spec describes " + std::to_string(dim));
  }
  if (du > 0 && !have_target && spec.target_unique_bounds.empty()) {
    throw DomainSpecError("no target data and no explicit target_unique_bounds to expand over");
  }
  const std::vector<int> counts = expand_counts(config, du);

  // Values of the unique columns attached to every induced point.
  std::size_t per_point = 1;
  for (int c : counts) per_point *= static_cast<std::size_t>(c);
  Eigen::MatrixXd unique_values(static_cast<Eigen::Index>(per_point), static_cast<Eigen::Index>(du));
  std::mt19937_64 design_rng(derive_seed(config.seed, "dame-expand"));
  for (std::size_t m = 0; m < du; ++m) {
    const int col = spec.target_unique_columns[m];
    double lo, hi, mu = 0.0, sd = 1.0;
    if (!spec.target_unique_bounds.empty()) {
      std::tie(lo, hi) = spec.target_unique_bounds[m];
      mu = 0.5 * (lo + hi);
      sd = (hi - lo) / std::sqrt(12.0);
    } else {
      const Eigen::VectorXd x = target.inputs.col(col);
      lo = x.minCoeff();
      hi = x.maxCoeff();
      mu = x.mean();
      sd = x.size() > 1 ? std::sqrt((x.array() - mu).square().sum() / static_cast<double>(x.size() - 1))
                        : 0.0;
    }
    if (config.design == ExpansionDesign::kGrid) {
      std::size_t stride = 1;
      for (std::size_t k = m + 1; k < du; ++k) stride *= static_cast<std::size_t>(counts[k]);
      const int n = counts[m];
      for (std::size_t r = 0; r < per_point; ++r) {
        const int b = static_cast<int>((r / stride) % static_cast<std::size_t>(n));
        unique_values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(m)) =
            n == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * b / (n - 1);
      }
    }
    if (config.design == ExpansionDesign::kRandom) {
      // Filled below per induced point; remember the moments in row 0/1.
      unique_values(0, static_cast<Eigen::Index>(m)) = mu;
      if (per_point > 1) unique_values(1, static_cast<Eigen::Index>(m)) = sd;
    }
  }
  Eigen::VectorXd mus, sds;
  if (config.design == ExpansionDesign::kRandom && du > 0) {
    mus = unique_values.row(0).transpose();
    sds = per_point > 1 ? Eigen::VectorXd(unique_values.row(1).transpose())
                        : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(du));
  }

  const double noise_std = config.expansion_noise_std
                               ? *config.expansion_noise_std
                               : (have_target ? estimate_noise_std(target, config.seed) : 0.0);
  std::mt19937_64 noise_rng(derive_seed(config.seed, "dame-noise"));
  std::normal_distribution<double> standard(0.0, 1.0);

  const Eigen::Index n_out = induced.inputs.rows() * static_cast<Eigen::Index>(per_point);
  OutputData out;
  out.role = OutputRole::kSource;
  out.inputs.resize(n_out, dim);
  out.responses.resize(n_out);
  Eigen::Index row = 0;
  for (Eigen::Index a = 0; a < induced.inputs.rows(); ++a) {
    for (std::size_t r = 0; r < per_point; ++r, ++row) {
      for (std::size_t k = 0; k < spec.target_shared_columns.size(); ++k) {
        out.inputs(row, spec.target_shared_columns[k]) = induced.inputs(a, static_cast<Eigen::Index>(k));
      }
      for (std::size_t m = 0; m < du; ++m) {
        const Eigen::Index mm = static_cast<Eigen::Index>(m);
        out.inputs(row, spec.target_unique_columns[m]) =
            config.design == ExpansionDesign::kGrid
                ? unique_values(static_cast<Eigen::Index>(r), mm)
                : mus[mm] + sds[mm] * standard(design_rng);
      }
      double value = induced.responses[a];
      if (noise_std > 0.0) value += noise_std * standard(noise_rng);
      if (config.response_transform) value = config.response_transform(out.inputs.row(row).transpose(), value);
      out.responses[row] = value;
    }
  }
  return out;
}

OutputData adapt_source(const OutputData &source, const DomainSpec &spec, const DameConfig &config,
                        const OutputData &target) {
  spec.validate(source.dim(), target.dim());
  const InducedSet induced = marginalize(source, spec, config, resolve_n_induced(config, target.size()));
  OutputData out = expand(induced, spec, config, target);
  out.name = source.name;
  return out;
}

}  // namespace mgcp

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

#ifndef MGCP_DAME_HPP
#define MGCP_DAME_HPP

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "mgcp/data.hpp"

namespace mgcp {

// How a source's columns relate to the target's columns. Column k of the
// shared block in the source (shared_features[k]) corresponds to target
// column target_shared_columns[k].
struct DomainSpec {
  std::vector<int> shared_features;
  std::vector<int> source_unique;
  std::vector<int> target_shared_columns;
  std::vector<int> target_unique_columns;
  // Per target-unique column [low, high]; taken from the target data when empty.
  std::vector<std::pair<double, double>> target_unique_bounds;

  // Throws DomainSpecError.
  void validate(Eigen::Index source_dim, Eigen::Index target_dim) const;
};

enum class ExpansionDesign {
  kGrid,    // evenly spaced values per unique column, crossed
  kRandom,  // Gaussian draws matched to the target's unique columns
};

struct DameConfig {
  std::optional<int> n_induced;  // default min(n_t - 1, 10)
  std::vector<int> n_expand{8};  // one entry per unique column, or a single entry for all
  std::optional<double> bandwidth;  // cross-validated when empty
  std::vector<double> bandwidth_grid;  // default: log-spaced relative to the input spread
  int folds = 5;
  std::optional<double> expansion_noise_std;  // estimated from the target when empty
  ExpansionDesign design = ExpansionDesign::kGrid;
  std::uint64_t seed = 0;
  // Optional domain-knowledge hook applied to every pseudo response:
  // (pseudo input row, response) -> response.
  std::function<double(const Eigen::VectorXd &, double)> response_transform;

  void validate() const;
};

// Marginal trend of a source over the shared features.
struct InducedSet {
  Eigen::MatrixXd inputs;  // n_induced x d_c
  Eigen::VectorXd responses;
};

// Gaussian-kernel weighted average sum_b K(x_b, x) y_b / sum_b K(x_b, x),
// K(x, x') = exp(-|x - x'|^2 / (2 h^2)). Throws BandwidthError if every
// weight at a query underflows to zero.
Eigen::VectorXd nadaraya_watson(const Eigen::MatrixXd &X, const Eigen::VectorXd &y,
                                const Eigen::MatrixXd &query, double bandwidth);

// k-fold squared-error cross-validation over `grid`. Rows with identical
// inputs always share a fold. Throws BandwidthError when all inputs coincide
// or no candidate is usable.
double select_bandwidth(const Eigen::MatrixXd &X, const Eigen::VectorXd &y,
                        const std::vector<double> &grid, int folds, std::uint64_t seed);

std::vector<double> default_bandwidth_grid(const Eigen::MatrixXd &X);

// n evenly spaced points over [lo, hi] for d = 1, a Latin hypercube over the
// box otherwise.
Eigen::MatrixXd induced_design(const Eigen::VectorXd &lo, const Eigen::VectorXd &hi, int n,
                               std::uint64_t seed);

int resolve_n_induced(const DameConfig &config, Eigen::Index target_size);

InducedSet marginalize(const OutputData &source, const DomainSpec &spec, const DameConfig &config,
                       int n_induced);

// Noise deviation of the target from a single-output GP fit; falls back to
// the spread of kernel-regression residuals when that fit fails.
double estimate_noise_std(const OutputData &target, std::uint64_t seed);

// Cross product of the induced points with values of the target-unique
// columns, plus i.i.d. Gaussian noise. Throws DomainSpecError when bounds
// cannot be derived.
OutputData expand(const InducedSet &induced, const DomainSpec &spec, const DameConfig &config,
                  const OutputData &target);

// marginalize followed by expand.
OutputData adapt_source(const OutputData &source, const DomainSpec &spec, const DameConfig &config,
                        const OutputData &target);

}  // namespace mgcp

#endif  // MGCP_DAME_HPP

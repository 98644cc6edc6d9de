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

#ifndef MGCP_COVBLOCK_HPP
#define MGCP_COVBLOCK_HPP

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "mgcp/data.hpp"
#include "mgcp/hyperparameters.hpp"

namespace mgcp {

enum class CovarianceStructure {
  kIndependentSources,  // sources coupled only through the target (block arrow)
  kSharedLatent,        // extra latent process shared by every output (dense)
};

// One additive covariance contribution cov(output row, output col) =
// cov_cross(x - x', kernel_a, kernel_b). Output index q is the target.
struct CovTerm {
  int row_output;
  int col_output;
  int kernel_a;
  int kernel_b;
};

std::vector<CovTerm> covariance_terms(const ParameterLayout &layout);

inline constexpr double kDefaultJitter = 1e-8;

// Assembled covariance of all stacked observations together with the
// factorisations needed for likelihood, gradient and prediction.
//
// In the independent-sources structure
//
//   C = | Omega_ss   Omega_st |   Omega_ss = blockdiag(C_11 .. C_qq)
//       | Omega_st'  C_tt     |   Omega_st = [C_1t; ..; C_qt]
//
// and the target block is reduced to the Schur complement
// B = C_tt - sum_i C_it' C_ii^{-1} C_it.  Only q (n_i x n_i) and one
// (n_t x n_t) Cholesky factorisations are ever formed.
struct CovarianceBundle {
  CovarianceStructure structure = CovarianceStructure::kIndependentSources;
  std::vector<Eigen::Index> offsets;  // start row of each output, target last
  std::vector<Eigen::MatrixXd> source_blocks;
  std::vector<Eigen::MatrixXd> cross_blocks;
  Eigen::MatrixXd target_block;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> source_factorizations;
  // L_i^{-1} C_it, reused by likelihood, gradient and prediction.
  std::vector<Eigen::MatrixXd> whitened_cross;
  Eigen::LLT<Eigen::MatrixXd> schur_factorization;
  std::optional<Eigen::MatrixXd> dense_full;
  std::optional<Eigen::LLT<Eigen::MatrixXd>> dense_factorization;
  double jitter = 0.0;           // absolute value added to every diagonal entry
  int jitter_escalations = 0;

  int num_sources() const { return static_cast<int>(source_blocks.size()); }
  Eigen::Index total_size() const;
  Eigen::MatrixXd dense() const;
};

struct PredictiveDistribution {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  bool includes_noise = false;
};

// `jitter` is relative to the mean diagonal of C. On a failed factorisation
// it is multiplied by 10, at most three times, before IndefiniteCovariance.
CovarianceBundle assemble_covariance(const TransferData &data, const Hyperparameters &theta,
                                     double jitter = kDefaultJitter, bool keep_dense = false);

// Log marginal likelihood from the block factorisation. Requires the
// independent-sources structure.
double log_likelihood_schur(const CovarianceBundle &bundle, const Eigen::VectorXd &y);

// Dispatches on structure (dense Cholesky for the shared-latent variant).
double log_likelihood(const CovarianceBundle &bundle, const Eigen::VectorXd &y);

// d log_likelihood / d flat(theta), with the jitter held fixed.
Eigen::VectorXd log_likelihood_gradient(const CovarianceBundle &bundle, const TransferData &data,
                                        const Hyperparameters &theta);

// Posterior of the noise-free target f_t at the query rows.
PredictiveDistribution predict(const CovarianceBundle &bundle, const TransferData &data,
                               const Hyperparameters &theta, const Eigen::MatrixXd &query,
                               bool include_noise = false);

// Remove the given sources and their kernels.
std::pair<TransferData, Hyperparameters> marginalize_sources(const TransferData &data,
                                                             const Hyperparameters &theta,
                                                             const std::set<int> &drop_set);

// Sum of every covariance term between output `row` at rows of X1 and output
// `col` at rows of X2 (noise excluded).
Eigen::MatrixXd output_covariance(const Hyperparameters &theta, int row, int col,
                                  const Eigen::MatrixXd &X1, const Eigen::MatrixXd &X2);

}  // namespace mgcp

#endif  // MGCP_COVBLOCK_HPP

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

#ifndef MGCP_DENSE_ORACLE_HPP
#define MGCP_DENSE_ORACLE_HPP

#include <Eigen/Core>

#include "mgcp/covblock.hpp"
#include "mgcp/data.hpp"
#include "mgcp/hyperparameters.hpp"

// Reference implementations that never exploit block structure: the full
// N x N covariance is built entry by entry from the scalar kernel functions
// and factorised with an unblocked textbook Cholesky. Used to check the
// block path and to measure how the dense cost scales.
namespace mgcp::oracle {

Eigen::MatrixXd dense_covariance(const TransferData &data, const Hyperparameters &theta,
                                 double absolute_jitter);

// Lower-triangular L with L L' = A. Throws IndefiniteCovariance.
Eigen::MatrixXd cholesky(const Eigen::MatrixXd &A);

double log_density(const Eigen::MatrixXd &C, const Eigen::VectorXd &y);

PredictiveDistribution predict(const TransferData &data, const Hyperparameters &theta,
                               const Eigen::MatrixXd &query, double absolute_jitter);

}  // namespace mgcp::oracle

#endif  // MGCP_DENSE_ORACLE_HPP

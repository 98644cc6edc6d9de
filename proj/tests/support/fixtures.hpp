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

#ifndef MGCP_TESTS_FIXTURES_HPP
#define MGCP_TESTS_FIXTURES_HPP

#include <random>

#include <Eigen/Core>

#include "mgcp/data.hpp"
#include "mgcp/hyperparameters.hpp"

namespace mgcp::testing {

inline Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, double lo, double hi,
                                      std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = u(rng);
  }
  return m;
}

inline OutputData random_output(Eigen::Index n, Eigen::Index d, std::mt19937_64 &rng, OutputRole role) {
  OutputData o;
  o.role = role;
  o.inputs = uniform_matrix(n, d, 0.0, 5.0, rng);
  o.responses = uniform_matrix(n, 1, -2.0, 2.0, rng).col(0);
  return o;
}

inline TransferData random_data(int q, Eigen::Index n, Eigen::Index n_t, Eigen::Index d, std::mt19937_64 &rng) {
  TransferData data;
  for (int i = 0; i < q; ++i) data.sources.push_back(random_output(n, d, rng, OutputRole::kSource));
  data.target = random_output(n_t, d, rng, OutputRole::kTarget);
  return data;
}

inline KernelParams random_kernel(Eigen::Index d, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> alpha(0.3, 1.5);
  std::uniform_real_distribution<double> log_l(std::log(0.3), std::log(3.0));
  Eigen::VectorXd ll(d);
  for (Eigen::Index j = 0; j < d; ++j) ll[j] = log_l(rng);
  return {alpha(rng), ll};
}

// Well-conditioned parameters: moderate scales and length-scales, noise
// deviations in [0.1, 0.5].
inline Hyperparameters random_theta(int q, Eigen::Index d, std::mt19937_64 &rng, bool shared = false) {
  std::uniform_real_distribution<double> sigma(0.1, 0.5);
  Hyperparameters t;
  for (int i = 0; i < q; ++i) {
    t.source_kernels.push_back(random_kernel(d, rng));
    t.transfer_kernels.push_back(random_kernel(d, rng));
    t.log_sigma_sources.push_back(std::log(sigma(rng)));
  }
  t.target_kernel = random_kernel(d, rng);
  t.log_sigma_target = std::log(sigma(rng));
  if (shared) {
    t.shared_kernels.emplace();
    for (int i = 0; i < q; ++i) t.shared_kernels->push_back(random_kernel(d, rng));
    t.shared_target_kernel = random_kernel(d, rng);
  }
  return t;
}

}  // namespace mgcp::testing

#endif  // MGCP_TESTS_FIXTURES_HPP

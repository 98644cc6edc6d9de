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

#ifndef MGCP_HYPERPARAMETERS_HPP
#define MGCP_HYPERPARAMETERS_HPP

#include <Eigen/Core>
#include <optional>
#include <random>
#include <vector>

#include "mgcp/kernels.hpp"

namespace mgcp {

// Shape of the flat optimisation vector.
struct ParameterLayout {
  int num_sources = 0;
  Eigen::Index dim = 1;
  bool shared_latent = false;

  int num_kernels() const { return 2 * num_sources + 1 + (shared_latent ? num_sources + 1 : 0); }
  Eigen::Index params_per_kernel() const { return 1 + dim; }
  Eigen::Index size() const { return num_kernels() * params_per_kernel() + num_sources + 1; }

  // Kernel numbering used by the flat vector and by the covariance terms.
  int source_kernel(int i) const { return i; }
  int transfer_kernel(int i) const { return num_sources + i; }
  int target_kernel() const { return 2 * num_sources; }
  int shared_kernel(int i) const { return 2 * num_sources + 1 + i; }
  int shared_target_kernel() const { return 3 * num_sources + 1; }

  Eigen::Index alpha_index(int kernel) const { return kernel * params_per_kernel(); }
  Eigen::Index log_lambda_index(int kernel, Eigen::Index j) const {
    return kernel * params_per_kernel() + 1 + j;
  }
  // Output index q denotes the target.
  Eigen::Index log_sigma_index(int output) const {
    return num_kernels() * params_per_kernel() + output;
  }
  Eigen::Index transfer_alpha_index(int i) const { return alpha_index(transfer_kernel(i)); }
  Eigen::Index shared_alpha_index(int i) const { return alpha_index(shared_kernel(i)); }

  bool operator==(const ParameterLayout &) const = default;
};

// All kernel scales, length-scales and noise deviations of one model.
// Source i couples to the target through (source_kernels[i], transfer_kernels[i]);
// the optional shared kernels add a common latent process (full-covariance variant).
struct Hyperparameters {
  std::vector<KernelParams> source_kernels;
  std::vector<KernelParams> transfer_kernels;
  KernelParams target_kernel;
  std::vector<double> log_sigma_sources;
  double log_sigma_target = 0.0;
  std::optional<std::vector<KernelParams>> shared_kernels;
  std::optional<KernelParams> shared_target_kernel;

  int num_sources() const { return static_cast<int>(source_kernels.size()); }
  Eigen::Index dim() const { return target_kernel.dim(); }
  bool shared_latent() const { return shared_kernels.has_value(); }
  ParameterLayout layout() const { return {num_sources(), dim(), shared_latent()}; }

  const KernelParams &kernel(int index) const;
  KernelParams &kernel(int index);
  double log_sigma(int output) const;

  std::vector<double> transfer_alphas() const;

  // Throws ContractViolation on inconsistent sizes or non-finite values.
  void validate() const;

  Eigen::VectorXd flatten() const;
  static Hyperparameters unflatten(const ParameterLayout &layout, const Eigen::VectorXd &flat);

  // Every alpha, sigma and lambda entry drawn uniformly on [0, 1]
  // (lambda and sigma floored at `floor` before taking logs).
  static Hyperparameters random(const ParameterLayout &layout, std::mt19937_64 &rng,
                                double floor = 1e-3);
};

}  // namespace mgcp

#endif  // MGCP_HYPERPARAMETERS_HPP

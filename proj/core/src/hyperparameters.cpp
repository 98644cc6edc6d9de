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

#include "mgcp/hyperparameters.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mgcp/errors.hpp"

namespace mgcp {

const KernelParams &Hyperparameters::kernel(int index) const {
  return const_cast<Hyperparameters *>(this)->kernel(index);
}

KernelParams &Hyperparameters::kernel(int index) {
  const int q = num_sources();
  if (index < 0) throw ContractViolation("kernel index out of range");
  if (index < q) return source_kernels[index];
  if (index < 2 * q) return transfer_kernels[index - q];
  if (index == 2 * q) return target_kernel;
  if (shared_kernels) {
    if (index < 3 * q + 1) return (*shared_kernels)[index - 2 * q - 1];
    if (index == 3 * q + 1) return *shared_target_kernel;
  }
  throw ContractViolation("kernel index out of range");
}

double Hyperparameters::log_sigma(int output) const {
  if (output == num_sources()) return log_sigma_target;
  return log_sigma_sources.at(output);
}

std::vector<double> Hyperparameters::transfer_alphas() const {
  std::vector<double> out;
  out.reserve(transfer_kernels.size());
  for (const auto &k : transfer_kernels) out.push_back(k.alpha);
  return out;
}

void Hyperparameters::validate() const {
  const int q = num_sources();
  const Eigen::Index d = dim();
  if (d < 1) throw ContractViolation("hyperparameters: dimension must be >= 1");
  if (static_cast<int>(transfer_kernels.size()) != q ||
      static_cast<int>(log_sigma_sources.size()) != q) {
    throw ContractViolation("hyperparameters: per-source vectors disagree in length");
  }
  if (shared_kernels.has_value() != shared_target_kernel.has_value() ||
      (shared_kernels && static_cast<int>(shared_kernels->size()) != q)) {
    throw ContractViolation("hyperparameters: incomplete shared-latent kernels");
  }
  const ParameterLayout lay = layout();
  for (int k = 0; k < lay.num_kernels(); ++k) {
    const KernelParams &kp = kernel(k);
    if (kp.dim() != d) throw ContractViolation("hyperparameters: kernel dimension mismatch");
    if (!std::isfinite(kp.alpha) || !kp.log_lambda.allFinite()) {
      throw ContractViolation("hyperparameters: non-finite kernel parameter");
    }
  }
  if (!std::isfinite(log_sigma_target) ||
      !std::all_of(log_sigma_sources.begin(), log_sigma_sources.end(),
                   [](double s) { return std::isfinite(s); })) {
    throw ContractViolation("hyperparameters: non-finite noise parameter");
  }
}

Eigen::VectorXd Hyperparameters::flatten() const {
  const ParameterLayout lay = layout();
  Eigen::VectorXd flat(lay.size());
  for (int k = 0; k < lay.num_kernels(); ++k) {
    const KernelParams &kp = kernel(k);
    flat[lay.alpha_index(k)] = kp.alpha;
    flat.segment(lay.log_lambda_index(k, 0), lay.dim) = kp.log_lambda;
  }
  for (int i = 0; i <= lay.num_sources; ++i) flat[lay.log_sigma_index(i)] = log_sigma(i);
  return flat;
}

Hyperparameters Hyperparameters::unflatten(const ParameterLayout &lay, const Eigen::VectorXd &flat) {
  if (flat.size() != lay.size()) {
    throw ContractViolation("unflatten: expected " + std::to_string(lay.size()) +
                            " parameters, got " + std::to_string(flat.size()));
  }
  const int q = lay.num_sources;
  const auto kernel_at = [&](int k) {
    return KernelParams(flat[lay.alpha_index(k)], flat.segment(lay.log_lambda_index(k, 0), lay.dim));
  };
  Hyperparameters h;
  for (int i = 0; i < q; ++i) {
    h.source_kernels.push_back(kernel_at(lay.source_kernel(i)));
    h.transfer_kernels.push_back(kernel_at(lay.transfer_kernel(i)));
    h.log_sigma_sources.push_back(flat[lay.log_sigma_index(i)]);
  }
  h.target_kernel = kernel_at(lay.target_kernel());
  h.log_sigma_target = flat[lay.log_sigma_index(q)];
  if (lay.shared_latent) {
    h.shared_kernels.emplace();
    for (int i = 0; i < q; ++i) h.shared_kernels->push_back(kernel_at(lay.shared_kernel(i)));
    h.shared_target_kernel = kernel_at(lay.shared_target_kernel());
  }
  return h;
}

Hyperparameters Hyperparameters::random(const ParameterLayout &lay, std::mt19937_64 &rng,
                                        double floor) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd flat(lay.size());
  for (int k = 0; k < lay.num_kernels(); ++k) {
    flat[lay.alpha_index(k)] = unit(rng);
    for (Eigen::Index j = 0; j < lay.dim; ++j) {
      flat[lay.log_lambda_index(k, j)] = std::log(std::max(unit(rng), floor));
    }
  }
  for (int i = 0; i <= lay.num_sources; ++i) {
    flat[lay.log_sigma_index(i)] = std::log(std::max(unit(rng), floor));
  }
  return unflatten(lay, flat);
}

}  // namespace mgcp

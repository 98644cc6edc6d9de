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

#include "mgcp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "mgcp/errors.hpp"

namespace mgcp {

namespace {

void require_dim(Eigen::Index got, Eigen::Index want, const char *what) {
  if (got != want) {
    throw ContractViolation(std::string(what) + ": dimension mismatch (" + std::to_string(got) +
                            " vs " + std::to_string(want) + ")");
  }
}

// Trapezoid sum over one axis of g1(u) g2(u - v) for 1-D Gaussian factors.
double axis_quadrature(double v, double l1, double l2, int points, double window_sd) {
  const double s1 = std::sqrt(l1);
  const double s2 = std::sqrt(l2);
  const double lo = std::min(-window_sd * s1, v - window_sd * s2);
  const double hi = std::max(window_sd * s1, v + window_sd * s2);
  const double h = (hi - lo) / (points - 1);
  const double c1 = std::pow(std::numbers::pi * l1, -0.25);
  const double c2 = std::pow(std::numbers::pi * l2, -0.25);
  double sum = 0.0;
  for (int k = 0; k < points; ++k) {
    const double u = lo + k * h;
    const double w = (k == 0 || k == points - 1) ? 0.5 : 1.0;
    const double du = u - v;
    sum += w * c1 * std::exp(-0.5 * u * u / l1) * c2 * std::exp(-0.5 * du * du / l2);
  }
  return sum * h;
}

}  // namespace

KernelParams KernelParams::isotropic(double alpha, double lambda, Eigen::Index dim) {
  return KernelParams(alpha, Eigen::VectorXd::Constant(dim, std::log(lambda)));
}

double smoothing_kernel_eval(const Eigen::VectorXd &x, const KernelParams &k) {
  require_dim(x.size(), k.dim(), "smoothing_kernel_eval");
  const Eigen::Index d = x.size();
  const Eigen::ArrayXd lambda = k.log_lambda.array().exp();
  const double log_det = k.log_lambda.sum();
  const double quad = (x.array().square() / lambda).sum();
  return k.alpha * std::pow(std::numbers::pi, -0.25 * static_cast<double>(d)) *
         std::exp(-0.25 * log_det - 0.5 * quad);
}

double cov_cross(const Eigen::VectorXd &v, const KernelParams &k1, const KernelParams &k2) {
  require_dim(k1.dim(), k2.dim(), "cov_cross");
  require_dim(v.size(), k1.dim(), "cov_cross");
  return CrossKernel(k1, k2).value(v);
}

double cov_auto_source(const Eigen::VectorXd &v, const KernelParams &k) {
  require_dim(v.size(), k.dim(), "cov_auto_source");
  const double quad = (v.array().square() / k.log_lambda.array().exp()).sum();
  return k.alpha * k.alpha * std::exp(-0.25 * quad);
}

double cov_auto_target(const Eigen::VectorXd &v, std::span<const KernelParams> kernels) {
  if (kernels.empty()) throw ContractViolation("cov_auto_target: empty kernel list");
  double sum = 0.0;
  for (const auto &k : kernels) sum += cov_auto_source(v, k);
  return sum;
}

double cov_quadrature_oracle(const Eigen::VectorXd &v, const KernelParams &k1,
                             const KernelParams &k2, int grid_points, double window_sd) {
  require_dim(k1.dim(), k2.dim(), "cov_quadrature_oracle");
  require_dim(v.size(), k1.dim(), "cov_quadrature_oracle");
  if (v.size() < 1 || v.size() > 2) {
    throw ContractViolation("cov_quadrature_oracle: only d <= 2 is supported");
  }
  if (grid_points < 3) throw ContractViolation("cov_quadrature_oracle: grid too coarse");
  // With diagonal length-scales the integrand is a product over axes, so the
  // tensor-product trapezoid sum equals the product of the per-axis sums.
  double value = k1.alpha * k2.alpha;
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    value *= axis_quadrature(v[j], std::exp(k1.log_lambda[j]), std::exp(k2.log_lambda[j]),
                             grid_points, window_sd);
  }
  return value;
}

CrossKernel::CrossKernel(const KernelParams &k1, const KernelParams &k2)
    : alpha1_(k1.alpha), alpha2_(k2.alpha) {
  require_dim(k1.dim(), k2.dim(), "CrossKernel");
  const Eigen::Index d = k1.dim();
  l1_ = k1.log_lambda.array().exp();
  l2_ = k2.log_lambda.array().exp();
  inv_sum_.resize(d);
  double log_norm = 0.5 * static_cast<double>(d) * std::numbers::ln2;
  for (Eigen::Index j = 0; j < d; ++j) {
    const double s = l1_[j] + l2_[j];
    inv_sum_[j] = 1.0 / s;
    log_norm += 0.25 * (k1.log_lambda[j] + k2.log_lambda[j]) - 0.5 * std::log(s);
  }
  norm_ = std::exp(log_norm);
}

}  // namespace mgcp

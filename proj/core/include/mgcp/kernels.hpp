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

#ifndef MGCP_KERNELS_HPP
#define MGCP_KERNELS_HPP

#include <Eigen/Core>
#include <span>

namespace mgcp {

// Scale and diagonal length-scale of one Gaussian smoothing kernel
//   g(x) = alpha * pi^{-d/4} |L|^{-1/4} exp(-x' L^{-1} x / 2),  L = diag(exp(log_lambda)).
// alpha is sign-free; the length-scale lives in log space so that any real
// vector is a valid parameter.
struct KernelParams {
  double alpha = 0.0;
  Eigen::VectorXd log_lambda;

  KernelParams() = default;
  KernelParams(double a, Eigen::VectorXd log_l) : alpha(a), log_lambda(std::move(log_l)) {}

  // Isotropic helper: every diagonal entry of L equals `lambda`.
  static KernelParams isotropic(double alpha, double lambda, Eigen::Index dim);

  Eigen::Index dim() const { return log_lambda.size(); }
  Eigen::VectorXd lambda() const { return log_lambda.array().exp(); }
};

double smoothing_kernel_eval(const Eigen::VectorXd &x, const KernelParams &k);

// Covariance induced by convolving two smoothing kernels with one shared
// white-noise process, evaluated at offset v = x - x'.
double cov_cross(const Eigen::VectorXd &v, const KernelParams &k1, const KernelParams &k2);

// alpha^2 exp(-v' L^{-1} v / 4); equal to cov_cross(v, k, k).
double cov_auto_source(const Eigen::VectorXd &v, const KernelParams &k);

// Sum of auto terms over every kernel feeding the target (the q transfer
// kernels plus the target's own kernel).
double cov_auto_target(const Eigen::VectorXd &v, std::span<const KernelParams> kernels);

// Numerical evaluation of  int g1(u) g2(u - v) du  by tensor-product
// trapezoid quadrature (d <= 2). Test oracle for cov_cross.
double cov_quadrature_oracle(const Eigen::VectorXd &v, const KernelParams &k1,
                             const KernelParams &k2, int grid_points = 4001,
                             double window_sd = 8.0);

// Precomputed form of cov_cross(., k1, k2) for repeated evaluation over
// many point pairs.  value(v) = alpha1 * alpha2 * shape(v).
class CrossKernel {
 public:
  CrossKernel(const KernelParams &k1, const KernelParams &k2);

  Eigen::Index dim() const { return inv_sum_.size(); }

  // shape(v) = 2^{d/2} prod_d (l1 l2)^{1/4} (l1+l2)^{-1/2} exp(-v_d^2 / (2 (l1+l2)))
  template <typename Vec>
  double shape(const Vec &v) const {
    double q = 0.0;
    for (Eigen::Index j = 0; j < v.size(); ++j) q += v[j] * v[j] * inv_sum_[j];
    return norm_ * std::exp(-0.5 * q);
  }

  template <typename Vec>
  double value(const Vec &v) const {
    return alpha1_ * alpha2_ * shape(v);
  }

  double alpha1() const { return alpha1_; }
  double alpha2() const { return alpha2_; }

  // d value / d log(l1_j) divided by value:  1/4 - l1/(2s) + v^2 l1 / (2 s^2),  s = l1 + l2.
  double dlog_lambda1_factor(Eigen::Index j, double vj) const {
    const double s_inv = inv_sum_[j];
    return 0.25 - 0.5 * l1_[j] * s_inv + 0.5 * vj * vj * l1_[j] * s_inv * s_inv;
  }
  double dlog_lambda2_factor(Eigen::Index j, double vj) const {
    const double s_inv = inv_sum_[j];
    return 0.25 - 0.5 * l2_[j] * s_inv + 0.5 * vj * vj * l2_[j] * s_inv * s_inv;
  }

 private:
  double alpha1_;
  double alpha2_;
  double norm_;
  Eigen::VectorXd l1_;
  Eigen::VectorXd l2_;
  Eigen::VectorXd inv_sum_;
};

}  // namespace mgcp

#endif  // MGCP_KERNELS_HPP

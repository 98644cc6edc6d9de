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

#include "mgcp/dense_oracle.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "mgcp/errors.hpp"
#include "mgcp/kernels.hpp"

namespace mgcp::oracle {

namespace {

struct PointRef {
  int output;
  Eigen::VectorXd x;
};

std::vector<PointRef> stacked_points(const TransferData &data) {
  std::vector<PointRef> pts;
  for (int i = 0; i < data.num_sources(); ++i) {
    for (Eigen::Index r = 0; r < data.sources[i].size(); ++r) {
      pts.push_back({i, data.sources[i].inputs.row(r).transpose()});
    }
  }
  for (Eigen::Index r = 0; r < data.target.size(); ++r) {
    pts.push_back({data.num_sources(), data.target.inputs.row(r).transpose()});
  }
  return pts;
}

std::vector<KernelParams> target_kernels(const Hyperparameters &theta) {
  std::vector<KernelParams> ks = theta.transfer_kernels;
  ks.push_back(theta.target_kernel);
  if (theta.shared_latent()) ks.push_back(*theta.shared_target_kernel);
  return ks;
}

// cov(f_a(x), f_b(x')) with v = x - x'.
double entry(const Hyperparameters &theta, int a, int b, const Eigen::VectorXd &v) {
  const int q = theta.num_sources();
  const bool shared = theta.shared_latent();
  if (a > b) return entry(theta, b, a, v);
  if (a == q) return cov_auto_target(v, target_kernels(theta));
  if (b == q) {
    double c = cov_cross(v, theta.source_kernels[a], theta.transfer_kernels[a]);
    if (shared) c += cov_cross(v, (*theta.shared_kernels)[a], *theta.shared_target_kernel);
    return c;
  }
  if (a == b) {
    double c = cov_auto_source(v, theta.source_kernels[a]);
    if (shared) c += cov_auto_source(v, (*theta.shared_kernels)[a]);
    return c;
  }
  return shared ? cov_cross(v, (*theta.shared_kernels)[a], (*theta.shared_kernels)[b]) : 0.0;
}

Eigen::VectorXd forward(const Eigen::MatrixXd &L, const Eigen::VectorXd &b) {
  const Eigen::Index n = L.rows();
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = b[i];
    for (Eigen::Index k = 0; k < i; ++k) s -= L(i, k) * x[k];
    x[i] = s / L(i, i);
  }
  return x;
}

}  // namespace

Eigen::MatrixXd dense_covariance(const TransferData &data, const Hyperparameters &theta,
                                 double absolute_jitter) {
  const auto pts = stacked_points(data);
  const Eigen::Index n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd C(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      C(r, c) = entry(theta, pts[r].output, pts[c].output, pts[r].x - pts[c].x);
    }
    C(r, r) += std::exp(2.0 * theta.log_sigma(pts[r].output)) + absolute_jitter;
  }
  return C;
}

Eigen::MatrixXd cholesky(const Eigen::MatrixXd &A) {
  const Eigen::Index n = A.rows();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = A(j, j);
    for (Eigen::Index k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
    if (!(d > 0.0)) throw IndefiniteCovariance("oracle cholesky: matrix not positive definite");
    L(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = A(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
      L(i, j) = s / L(j, j);
    }
  }
  return L;
}

double log_density(const Eigen::MatrixXd &C, const Eigen::VectorXd &y) {
  const Eigen::MatrixXd L = cholesky(C);
  const Eigen::VectorXd w = forward(L, y);
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < L.rows(); ++i) log_det += 2.0 * std::log(L(i, i));
  return -0.5 * w.squaredNorm() - 0.5 * log_det -
         0.5 * static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi);
}

PredictiveDistribution predict(const TransferData &data, const Hyperparameters &theta,
                               const Eigen::MatrixXd &query, double absolute_jitter) {
  const auto pts = stacked_points(data);
  const int q = theta.num_sources();
  const Eigen::MatrixXd C = dense_covariance(data, theta, absolute_jitter);
  const Eigen::MatrixXd L = cholesky(C);
  const Eigen::VectorXd w = forward(L, data.stacked_responses());
  PredictiveDistribution out;
  out.mean.resize(query.rows());
  out.variance.resize(query.rows());
  for (Eigen::Index m = 0; m < query.rows(); ++m) {
    const Eigen::VectorXd xs = query.row(m).transpose();
    Eigen::VectorXd k(static_cast<Eigen::Index>(pts.size()));
    for (std::size_t r = 0; r < pts.size(); ++r) k[r] = entry(theta, pts[r].output, q, pts[r].x - xs);
    const Eigen::VectorXd s = forward(L, k);
    out.mean[m] = s.dot(w);
    const double prior = entry(theta, q, q, Eigen::VectorXd::Zero(xs.size()));
    out.variance[m] = std::max(prior - s.squaredNorm(), 0.0);
  }
  return out;
}

}  // namespace mgcp::oracle

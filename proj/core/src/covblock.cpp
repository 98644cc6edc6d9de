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

#include "mgcp/covblock.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "mgcp/errors.hpp"
#include "mgcp/kernels.hpp"

namespace mgcp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2 pi)

const Eigen::MatrixXd &inputs_of(const TransferData &data, int output) {
  return output == data.num_sources() ? data.target.inputs : data.sources[output].inputs;
}

void add_term_block(Eigen::MatrixXd &block, const CrossKernel &ck, const Eigen::MatrixXd &X1,
                    const Eigen::MatrixXd &X2, bool symmetric) {
  const Eigen::Index d = X1.cols();
  Eigen::VectorXd v(d);
  const double scale = ck.alpha1() * ck.alpha2();
  if (scale == 0.0) return;
  for (Eigen::Index p = 0; p < X1.rows(); ++p) {
    const Eigen::Index end = symmetric ? p + 1 : X2.rows();
    for (Eigen::Index r = 0; r < end; ++r) {
      for (Eigen::Index j = 0; j < d; ++j) v[j] = X1(p, j) - X2(r, j);
      const double value = scale * ck.shape(v);
      block(p, r) += value;
      if (symmetric && r != p) block(r, p) += value;
    }
  }
}

double sum_log_diag(const Eigen::LLT<Eigen::MatrixXd> &llt) {
  return llt.matrixLLT().diagonal().array().log().sum();
}

struct RawBlocks {
  std::vector<Eigen::MatrixXd> source;
  std::vector<Eigen::MatrixXd> cross;
  Eigen::MatrixXd target;
  // Shared-latent only: source_pair[i][j - i - 1] = C_ij for i < j.
  std::vector<std::vector<Eigen::MatrixXd>> source_pair;
};

bool factorize_independent(CovarianceBundle &b) {
  const int q = static_cast<int>(b.source_blocks.size());
  b.source_factorizations.clear();
  b.whitened_cross.clear();
  Eigen::MatrixXd schur = b.target_block;
  for (int i = 0; i < q; ++i) {
    b.source_factorizations.emplace_back(b.source_blocks[i]);
    if (b.source_factorizations.back().info() != Eigen::Success) return false;
    Eigen::MatrixXd V = b.source_factorizations.back().matrixL().solve(b.cross_blocks[i]);
    schur.noalias() -= V.transpose() * V;
    b.whitened_cross.push_back(std::move(V));
  }
  b.schur_factorization.compute(schur);
  if (b.schur_factorization.info() != Eigen::Success) return false;
  const Eigen::VectorXd diag = b.schur_factorization.matrixLLT().diagonal();
  return diag.allFinite() && (diag.array() > 0.0).all();
}

Eigen::MatrixXd build_dense(const RawBlocks &raw, const std::vector<Eigen::Index> &offsets,
                            Eigen::Index n) {
  const int q = static_cast<int>(raw.source.size());
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
  const Eigen::Index ot = offsets[q];
  const Eigen::Index nt = raw.target.rows();
  for (int i = 0; i < q; ++i) {
    const Eigen::Index oi = offsets[i];
    const Eigen::Index ni = raw.source[i].rows();
    C.block(oi, oi, ni, ni) = raw.source[i];
    C.block(oi, ot, ni, nt) = raw.cross[i];
    C.block(ot, oi, nt, ni) = raw.cross[i].transpose();
    if (!raw.source_pair.empty()) {
      for (int j = i + 1; j < q; ++j) {
        const Eigen::MatrixXd &Cij = raw.source_pair[i][j - i - 1];
        C.block(oi, offsets[j], ni, Cij.cols()) = Cij;
        C.block(offsets[j], oi, Cij.cols(), ni) = Cij.transpose();
      }
    }
  }
  C.block(ot, ot, nt, nt) = raw.target;
  return C;
}

// a = C^{-1} y, stacked like y.
Eigen::VectorXd representer_weights(const CovarianceBundle &b, const Eigen::VectorXd &y) {
  if (y.size() != b.total_size()) {
    throw ContractViolation("response vector length " + std::to_string(y.size()) +
                            " does not match covariance size " + std::to_string(b.total_size()));
  }
  if (b.structure == CovarianceStructure::kSharedLatent) return b.dense_factorization->solve(y);
  const int q = b.num_sources();
  const Eigen::Index ot = b.offsets[q];
  const Eigen::Index nt = b.target_block.rows();
  Eigen::VectorXd a(y.size());
  Eigen::VectorXd rhs = y.segment(ot, nt);
  std::vector<Eigen::VectorXd> z(q);
  for (int i = 0; i < q; ++i) {
    z[i] = b.source_factorizations[i].solve(y.segment(b.offsets[i], b.source_blocks[i].rows()));
    rhs.noalias() -= b.cross_blocks[i].transpose() * z[i];
  }
  const Eigen::VectorXd at = b.schur_factorization.solve(rhs);
  a.segment(ot, nt) = at;
  for (int i = 0; i < q; ++i) {
    a.segment(b.offsets[i], z[i].size()) =
        z[i] - b.source_factorizations[i].solve(b.cross_blocks[i] * at);
  }
  return a;
}

void accumulate_term_gradient(const CrossKernel &ck, const Eigen::MatrixXd &X1,
                              const Eigen::MatrixXd &X2, const Eigen::MatrixXd &W, double weight,
                              bool symmetric, const ParameterLayout &lay, int ka, int kb,
                              Eigen::VectorXd &grad) {
  const Eigen::Index d = X1.cols();
  Eigen::VectorXd v(d);
  const Eigen::Index ia = lay.alpha_index(ka);
  const Eigen::Index ib = lay.alpha_index(kb);
  const double alpha_a = ck.alpha1();
  const double alpha_b = ck.alpha2();
  double g_alpha_a = 0.0;
  double g_alpha_b = 0.0;
  Eigen::VectorXd g_lam_a = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd g_lam_b = Eigen::VectorXd::Zero(d);
  for (Eigen::Index p = 0; p < X1.rows(); ++p) {
    const Eigen::Index end = symmetric ? p + 1 : X2.rows();
    for (Eigen::Index r = 0; r < end; ++r) {
      double w = weight * W(p, r);
      if (symmetric && r != p) w *= 2.0;
      if (w == 0.0) continue;
      for (Eigen::Index j = 0; j < d; ++j) v[j] = X1(p, j) - X2(r, j);
      const double shape = ck.shape(v);
      g_alpha_a += w * alpha_b * shape;
      g_alpha_b += w * alpha_a * shape;
      const double wv = w * alpha_a * alpha_b * shape;
      if (wv == 0.0) continue;
      for (Eigen::Index j = 0; j < d; ++j) {
        g_lam_a[j] += wv * ck.dlog_lambda1_factor(j, v[j]);
        g_lam_b[j] += wv * ck.dlog_lambda2_factor(j, v[j]);
      }
    }
  }
  grad[ia] += g_alpha_a;
  grad[ib] += g_alpha_b;
  for (Eigen::Index j = 0; j < d; ++j) {
    grad[lay.log_lambda_index(ka, j)] += g_lam_a[j];
    grad[lay.log_lambda_index(kb, j)] += g_lam_b[j];
  }
}

void check_model(const TransferData &data, const Hyperparameters &theta) {
  data.validate();
  theta.validate();
  if (theta.num_sources() != data.num_sources()) {
    throw ContractViolation("hyperparameters describe " + std::to_string(theta.num_sources()) +
                            " sources but data has " + std::to_string(data.num_sources()));
  }
  if (theta.dim() != data.dim()) {
    throw ContractViolation("hyperparameter dimension " + std::to_string(theta.dim()) +
                            " does not match input dimension " + std::to_string(data.dim()));
  }
}

}  // namespace

std::vector<CovTerm> covariance_terms(const ParameterLayout &lay) {
  const int q = lay.num_sources;
  const int t = q;
  std::vector<CovTerm> terms;
  for (int i = 0; i < q; ++i) terms.push_back({i, i, lay.source_kernel(i), lay.source_kernel(i)});
  for (int i = 0; i < q; ++i) terms.push_back({i, t, lay.source_kernel(i), lay.transfer_kernel(i)});
  for (int i = 0; i < q; ++i) {
    terms.push_back({t, t, lay.transfer_kernel(i), lay.transfer_kernel(i)});
  }
  terms.push_back({t, t, lay.target_kernel(), lay.target_kernel()});
  if (lay.shared_latent) {
    const int st = lay.shared_target_kernel();
    for (int i = 0; i < q; ++i) {
      terms.push_back({i, i, lay.shared_kernel(i), lay.shared_kernel(i)});
      for (int j = i + 1; j < q; ++j) {
        terms.push_back({i, j, lay.shared_kernel(i), lay.shared_kernel(j)});
      }
      terms.push_back({i, t, lay.shared_kernel(i), st});
    }
    terms.push_back({t, t, st, st});
  }
  return terms;
}

Eigen::MatrixXd output_covariance(const Hyperparameters &theta, int row, int col,
                                  const Eigen::MatrixXd &X1, const Eigen::MatrixXd &X2) {
  if (X1.cols() != theta.dim() || X2.cols() != theta.dim()) {
    throw ContractViolation("output_covariance: input dimension does not match kernels");
  }
  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(X1.rows(), X2.rows());
  const bool symmetric = row == col && &X1 == &X2;
  for (const CovTerm &term : covariance_terms(theta.layout())) {
    const bool match = (term.row_output == row && term.col_output == col) ||
                       (term.row_output == col && term.col_output == row);
    if (!match) continue;
    add_term_block(block, CrossKernel(theta.kernel(term.kernel_a), theta.kernel(term.kernel_b)),
                   X1, X2, symmetric);
  }
  return block;
}

Eigen::Index CovarianceBundle::total_size() const {
  Eigen::Index n = target_block.rows();
  for (const auto &s : source_blocks) n += s.rows();
  return n;
}

Eigen::MatrixXd CovarianceBundle::dense() const {
  if (dense_full) return *dense_full;
  RawBlocks raw{source_blocks, cross_blocks, target_block, {}};
  return build_dense(raw, offsets, total_size());
}

CovarianceBundle assemble_covariance(const TransferData &data, const Hyperparameters &theta,
                                     double jitter, bool keep_dense) {
  check_model(data, theta);
  if (!(jitter >= 0.0) || !std::isfinite(jitter)) {
    throw ContractViolation("assemble_covariance: jitter must be finite and >= 0");
  }
  const int q = data.num_sources();
  const bool shared = theta.shared_latent();

  RawBlocks raw;
  std::vector<Eigen::Index> offsets;
  Eigen::Index n = 0;
  double trace = 0.0;
  for (int i = 0; i < q; ++i) {
    const Eigen::MatrixXd &Xi = data.sources[i].inputs;
    offsets.push_back(n);
    n += Xi.rows();
    Eigen::MatrixXd Cii = output_covariance(theta, i, i, Xi, Xi);
    Cii.diagonal().array() += std::exp(2.0 * theta.log_sigma_sources[i]);
    trace += Cii.trace();
    raw.source.push_back(std::move(Cii));
    raw.cross.push_back(output_covariance(theta, i, q, Xi, data.target.inputs));
  }
  offsets.push_back(n);
  n += data.target.size();
  raw.target = output_covariance(theta, q, q, data.target.inputs, data.target.inputs);
  raw.target.diagonal().array() += std::exp(2.0 * theta.log_sigma_target);
  trace += raw.target.trace();
  if (shared) {
    raw.source_pair.resize(q);
    for (int i = 0; i < q; ++i) {
      for (int j = i + 1; j < q; ++j) {
        raw.source_pair[i].push_back(
            output_covariance(theta, i, j, data.sources[i].inputs, data.sources[j].inputs));
      }
    }
  }
  const double mean_diag = trace / static_cast<double>(n);
  if (!std::isfinite(mean_diag)) throw IndefiniteCovariance("covariance has non-finite diagonal");

  constexpr int kMaxEscalations = 3;
  const double base = jitter > 0.0 ? jitter : kDefaultJitter;
  for (int attempt = 0; attempt <= kMaxEscalations; ++attempt) {
    const double rel = attempt == 0 ? jitter : base * std::pow(10.0, attempt);
    CovarianceBundle b;
    b.structure = shared ? CovarianceStructure::kSharedLatent
                         : CovarianceStructure::kIndependentSources;
    b.offsets = offsets;
    b.jitter = rel * mean_diag;
    b.jitter_escalations = attempt;
    b.source_blocks = raw.source;
    b.cross_blocks = raw.cross;
    b.target_block = raw.target;
    for (auto &S : b.source_blocks) S.diagonal().array() += b.jitter;
    b.target_block.diagonal().array() += b.jitter;

    if (shared) {
      RawBlocks jittered{b.source_blocks, b.cross_blocks, b.target_block, raw.source_pair};
      b.dense_full = build_dense(jittered, offsets, n);
      b.dense_factorization.emplace(*b.dense_full);
      if (b.dense_factorization->info() != Eigen::Success ||
          !b.dense_factorization->matrixLLT().diagonal().allFinite()) {
        continue;
      }
      return b;
    }
    if (!factorize_independent(b)) continue;
    if (keep_dense) b.dense_full = b.dense();
    return b;
  }
  throw IndefiniteCovariance("covariance is not positive definite after " +
                             std::to_string(kMaxEscalations) + " jitter escalations");
}

double log_likelihood_schur(const CovarianceBundle &b, const Eigen::VectorXd &y) {
  if (b.structure != CovarianceStructure::kIndependentSources) {
    throw ContractViolation("log_likelihood_schur requires the independent-sources structure");
  }
  const Eigen::Index n = b.total_size();
  if (y.size() != n) {
    throw ContractViolation("log_likelihood_schur: response vector length " +
                            std::to_string(y.size()) + " does not match " + std::to_string(n));
  }
  const int q = b.num_sources();
  const Eigen::Index ot = b.offsets[q];
  const Eigen::Index nt = b.target_block.rows();
  double quad = 0.0;
  double log_det = 0.0;
  Eigen::VectorXd r = -y.segment(ot, nt);
  for (int i = 0; i < q; ++i) {
    const auto &llt = b.source_factorizations[i];
    const Eigen::VectorXd w = llt.matrixL().solve(y.segment(b.offsets[i], b.source_blocks[i].rows()));
    quad += w.squaredNorm();
    log_det += 2.0 * sum_log_diag(llt);
    r.noalias() += b.whitened_cross[i].transpose() * w;  // A y_i contribution
  }
  const Eigen::VectorXd s = b.schur_factorization.matrixL().solve(r);
  quad += s.squaredNorm();
  log_det += 2.0 * sum_log_diag(b.schur_factorization);
  return -0.5 * quad - 0.5 * log_det - 0.5 * static_cast<double>(n) * kLog2Pi;
}

double log_likelihood(const CovarianceBundle &b, const Eigen::VectorXd &y) {
  if (b.structure == CovarianceStructure::kIndependentSources) return log_likelihood_schur(b, y);
  if (y.size() != b.total_size()) {
    throw ContractViolation("log_likelihood: response vector length mismatch");
  }
  const Eigen::VectorXd w = b.dense_factorization->matrixL().solve(y);
  return -0.5 * w.squaredNorm() - sum_log_diag(*b.dense_factorization) -
         0.5 * static_cast<double>(y.size()) * kLog2Pi;
}

Eigen::VectorXd log_likelihood_gradient(const CovarianceBundle &b, const TransferData &data,
                                        const Hyperparameters &theta) {
  check_model(data, theta);
  const ParameterLayout lay = theta.layout();
  const int q = lay.num_sources;
  const Eigen::VectorXd y = data.stacked_responses();
  const Eigen::VectorXd a = representer_weights(b, y);
  const auto seg = [&](int output) {
    const Eigen::Index len = output == q ? b.target_block.rows() : b.source_blocks[output].rows();
    return a.segment(b.offsets[output], len);
  };

  // W = a a' - C^{-1}; only the blocks touched by some term are formed.
  std::vector<Eigen::MatrixXd> w_source(q);
  std::vector<Eigen::MatrixXd> w_cross(q);
  Eigen::MatrixXd w_target;
  Eigen::MatrixXd w_dense;
  if (b.structure == CovarianceStructure::kSharedLatent) {
    const Eigen::Index n = b.total_size();
    w_dense = a * a.transpose() - b.dense_factorization->solve(Eigen::MatrixXd::Identity(n, n));
  } else {
    const Eigen::Index nt = b.target_block.rows();
    const Eigen::MatrixXd b_inv = b.schur_factorization.solve(Eigen::MatrixXd::Identity(nt, nt));
    const Eigen::VectorXd at = seg(q);
    w_target = at * at.transpose() - b_inv;
    for (int i = 0; i < q; ++i) {
      const auto &llt = b.source_factorizations[i];
      const Eigen::Index ni = b.source_blocks[i].rows();
      const Eigen::MatrixXd G = llt.matrixU().solve(b.whitened_cross[i]);  // C_ii^{-1} C_it
      const Eigen::MatrixXd GB = G * b_inv;
      const Eigen::VectorXd ai = seg(i);
      w_cross[i] = ai * at.transpose() + GB;
      w_source[i] = ai * ai.transpose() - llt.solve(Eigen::MatrixXd::Identity(ni, ni));
      w_source[i].noalias() -= GB * G.transpose();
    }
  }
  const auto weight_block = [&](int r, int c) -> Eigen::MatrixXd {
    if (b.structure == CovarianceStructure::kSharedLatent) {
      const Eigen::Index nr = r == q ? b.target_block.rows() : b.source_blocks[r].rows();
      const Eigen::Index nc = c == q ? b.target_block.rows() : b.source_blocks[c].rows();
      return w_dense.block(b.offsets[r], b.offsets[c], nr, nc);
    }
    if (r == q) return w_target;
    if (c == q) return w_cross[r];
    return w_source[r];
  };

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(lay.size());
  for (const CovTerm &term : covariance_terms(lay)) {
    const bool diagonal = term.row_output == term.col_output;
    const Eigen::MatrixXd W = weight_block(term.row_output, term.col_output);
    accumulate_term_gradient(CrossKernel(theta.kernel(term.kernel_a), theta.kernel(term.kernel_b)),
                             inputs_of(data, term.row_output), inputs_of(data, term.col_output), W,
                             diagonal ? 0.5 : 1.0, diagonal, lay, term.kernel_a, term.kernel_b, grad);
  }
  for (int out = 0; out <= q; ++out) {
    const double var = std::exp(2.0 * theta.log_sigma(out));
    grad[lay.log_sigma_index(out)] = var * weight_block(out, out).trace();
  }
  return grad;
}

PredictiveDistribution predict(const CovarianceBundle &b, const TransferData &data,
                               const Hyperparameters &theta, const Eigen::MatrixXd &query,
                               bool include_noise) {
  check_model(data, theta);
  if (query.cols() != data.dim()) {
    throw ContractViolation("predict: query dimension " + std::to_string(query.cols()) +
                            " does not match input dimension " + std::to_string(data.dim()));
  }
  const int q = data.num_sources();
  const Eigen::Index m = query.rows();
  const Eigen::VectorXd a = representer_weights(b, data.stacked_responses());

  const Eigen::MatrixXd origin = Eigen::MatrixXd::Zero(1, data.dim());
  const double prior = output_covariance(theta, q, q, origin, origin)(0, 0);

  std::vector<Eigen::MatrixXd> k_source(q);
  for (int i = 0; i < q; ++i) {
    k_source[i] = output_covariance(theta, i, q, data.sources[i].inputs, query);
  }
  const Eigen::MatrixXd k_target = output_covariance(theta, q, q, data.target.inputs, query);

  PredictiveDistribution out;
  out.mean = k_target.transpose() * a.segment(b.offsets[q], data.target.size());
  for (int i = 0; i < q; ++i) {
    out.mean.noalias() += k_source[i].transpose() * a.segment(b.offsets[i], data.sources[i].size());
  }

  Eigen::VectorXd reduction = Eigen::VectorXd::Zero(m);
  if (b.structure == CovarianceStructure::kSharedLatent) {
    Eigen::MatrixXd k_all(b.total_size(), m);
    for (int i = 0; i < q; ++i) k_all.middleRows(b.offsets[i], k_source[i].rows()) = k_source[i];
    k_all.middleRows(b.offsets[q], k_target.rows()) = k_target;
    reduction = b.dense_factorization->matrixL().solve(k_all).colwise().squaredNorm().transpose();
  } else {
    Eigen::MatrixXd u = k_target;
    for (int i = 0; i < q; ++i) {
      const Eigen::MatrixXd P = b.source_factorizations[i].matrixL().solve(k_source[i]);
      reduction += P.colwise().squaredNorm().transpose();
      u.noalias() -= b.whitened_cross[i].transpose() * P;
    }
    reduction += b.schur_factorization.matrixL().solve(u).colwise().squaredNorm().transpose();
  }
  out.variance = (prior - reduction.array()).max(0.0);
  if (include_noise) out.variance.array() += std::exp(2.0 * theta.log_sigma_target);
  out.includes_noise = include_noise;
  return out;
}

std::pair<TransferData, Hyperparameters> marginalize_sources(const TransferData &data,
                                                             const Hyperparameters &theta,
                                                             const std::set<int> &drop_set) {
  const int q = theta.num_sources();
  if (data.num_sources() != q) throw ContractViolation("marginalize_sources: data/theta mismatch");
  for (int i : drop_set) {
    if (i < 0 || i >= q) {
      throw ContractViolation("marginalize_sources: source index " + std::to_string(i) +
                              " out of range");
    }
  }
  TransferData reduced_data;
  reduced_data.target = data.target;
  Hyperparameters reduced = theta;
  reduced.source_kernels.clear();
  reduced.transfer_kernels.clear();
  reduced.log_sigma_sources.clear();
  if (reduced.shared_kernels) reduced.shared_kernels->clear();
  for (int i = 0; i < q; ++i) {
    if (drop_set.contains(i)) continue;
    reduced_data.sources.push_back(data.sources[i]);
    reduced.source_kernels.push_back(theta.source_kernels[i]);
    reduced.transfer_kernels.push_back(theta.transfer_kernels[i]);
    reduced.log_sigma_sources.push_back(theta.log_sigma_sources[i]);
    if (reduced.shared_kernels) reduced.shared_kernels->push_back((*theta.shared_kernels)[i]);
  }
  return {std::move(reduced_data), std::move(reduced)};
}

}  // namespace mgcp

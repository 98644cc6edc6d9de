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

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "mgcp/covblock.hpp"
#include "mgcp/dense_oracle.hpp"
#include "mgcp/errors.hpp"

namespace mgcp {
namespace {

using testing::random_data;
using testing::random_theta;

// All scales zero and unit noise: the covariance is the identity.
Hyperparameters noise_only(int q, Eigen::Index d) {
  std::mt19937_64 rng(0);
  Hyperparameters t = random_theta(q, d, rng);
  for (auto &k : t.source_kernels) k.alpha = 0.0;
  for (auto &k : t.transfer_kernels) k.alpha = 0.0;
  t.target_kernel.alpha = 0.0;
  for (auto &s : t.log_sigma_sources) s = 0.0;
  t.log_sigma_target = 0.0;
  return t;
}

TEST(AssembleCovariance, NoiseOnlyIsScaledIdentity) {
  std::mt19937_64 rng(1);
  const TransferData data = random_data(1, 1, 1, 1, rng);
  const CovarianceBundle b = assemble_covariance(data, noise_only(1, 1), 1e-8);
  const Eigen::MatrixXd C = b.dense();
  EXPECT_TRUE(C.isApprox(Eigen::MatrixXd::Identity(2, 2) * (1.0 + 1e-8), 1e-15));
}

TEST(AssembleCovariance, ZeroTransferScalesGiveZeroCrossBlocks) {
  std::mt19937_64 rng(2);
  const TransferData data = random_data(3, 6, 4, 2, rng);
  Hyperparameters t = random_theta(3, 2, rng);
  for (auto &k : t.transfer_kernels) k.alpha = 0.0;
  const CovarianceBundle b = assemble_covariance(data, t);
  for (const auto &block : b.cross_blocks) EXPECT_EQ(block.cwiseAbs().maxCoeff(), 0.0);
}

TEST(AssembleCovariance, BlockAssemblyMatchesDenseOracle) {
  std::mt19937_64 rng(3);
  const TransferData data = random_data(3, 10, 5, 2, rng);
  const Hyperparameters t = random_theta(3, 2, rng);
  const CovarianceBundle b = assemble_covariance(data, t, 1e-8, true);
  ASSERT_TRUE(b.dense_full.has_value());
  const Eigen::MatrixXd oracle = oracle::dense_covariance(data, t, b.jitter);
  EXPECT_LT((*b.dense_full - oracle).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((b.dense() - oracle).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(AssembleCovariance, SharedLatentMatchesDenseOracle) {
  std::mt19937_64 rng(4);
  const TransferData data = random_data(2, 7, 4, 1, rng);
  const Hyperparameters t = random_theta(2, 1, rng, true);
  const CovarianceBundle b = assemble_covariance(data, t, 1e-8, true);
  EXPECT_EQ(b.structure, CovarianceStructure::kSharedLatent);
  const Eigen::MatrixXd oracle = oracle::dense_covariance(data, t, b.jitter);
  EXPECT_LT((b.dense() - oracle).cwiseAbs().maxCoeff(), 1e-12);
  // Source-source coupling exists only through the shared latent process.
  EXPECT_GT(oracle.block(0, 7, 7, 7).cwiseAbs().maxCoeff(), 0.0);
}

TEST(AssembleCovariance, PositiveDefiniteForInitialisationDraws) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const TransferData data = random_data(3, 10, 6, 1, rng);
    const Hyperparameters t = Hyperparameters::random({3, 1, false}, rng);
    const CovarianceBundle b = assemble_covariance(data, t);
    const double mean_diag = b.dense().diagonal().mean();
    EXPECT_LE(b.jitter, 1e-6 * mean_diag) << "trial " << trial;
  }
}

TEST(LogLikelihoodSchur, IdentityCovarianceZeroResponses) {
  std::mt19937_64 rng(6);
  TransferData data = random_data(2, 1, 1, 1, rng);
  for (auto *o : {&data.sources[0], &data.sources[1], &data.target}) o->responses.setZero();
  const CovarianceBundle b = assemble_covariance(data, noise_only(2, 1), 0.0);
  EXPECT_NEAR(log_likelihood_schur(b, data.stacked_responses()), -1.5 * std::log(2.0 * std::numbers::pi), 1e-12);
  EXPECT_NEAR(log_likelihood_schur(b, data.stacked_responses()), -2.7568156, 1e-7);
}

TEST(LogLikelihoodSchur, IdentityCovarianceUnitNormResponses) {
  std::mt19937_64 rng(7);
  TransferData data = random_data(1, 1, 1, 1, rng);
  data.sources[0].responses << 1.0;
  data.target.responses << -1.0;
  const CovarianceBundle b = assemble_covariance(data, noise_only(1, 1), 0.0);
  EXPECT_NEAR(log_likelihood_schur(b, data.stacked_responses()), -1.0 - std::log(2.0 * std::numbers::pi), 1e-12);
  EXPECT_NEAR(log_likelihood_schur(b, data.stacked_responses()), -2.8378771, 1e-7);
}

TEST(LogLikelihoodSchur, MatchesDenseLogDensity) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const TransferData data = random_data(3, 8, 4, 1 + trial % 2, rng);
    const Hyperparameters t = random_theta(3, data.dim(), rng);
    const CovarianceBundle b = assemble_covariance(data, t);
    const double block = log_likelihood_schur(b, data.stacked_responses());
    const double dense = oracle::log_density(oracle::dense_covariance(data, t, b.jitter), data.stacked_responses());
    EXPECT_NEAR(block, dense, 1e-8 * std::abs(dense)) << "trial " << trial;
  }
}

TEST(LogLikelihoodSchur, ShapeMismatchThrows) {
  std::mt19937_64 rng(9);
  const TransferData data = random_data(2, 4, 3, 1, rng);
  const CovarianceBundle b = assemble_covariance(data, random_theta(2, 1, rng));
  EXPECT_THROW(log_likelihood_schur(b, Eigen::VectorXd::Zero(5)), ContractViolation);
}

TEST(LogLikelihood, SharedLatentUsesDenseFactorisation) {
  std::mt19937_64 rng(10);
  const TransferData data = random_data(2, 6, 4, 1, rng);
  const Hyperparameters t = random_theta(2, 1, rng, true);
  const CovarianceBundle b = assemble_covariance(data, t);
  const double dense = oracle::log_density(oracle::dense_covariance(data, t, b.jitter), data.stacked_responses());
  EXPECT_NEAR(log_likelihood(b, data.stacked_responses()), dense, 1e-8 * std::abs(dense));
  EXPECT_THROW(log_likelihood_schur(b, data.stacked_responses()), ContractViolation);
}

TEST(Predict, FarQueryReturnsPrior) {
  std::mt19937_64 rng(11);
  const TransferData data = random_data(2, 6, 4, 1, rng);
  const Hyperparameters t = random_theta(2, 1, rng);
  const CovarianceBundle b = assemble_covariance(data, t);
  const Eigen::MatrixXd query = Eigen::MatrixXd::Constant(1, 1, 1e6);
  const PredictiveDistribution p = predict(b, data, t, query);
  std::vector<KernelParams> ks = t.transfer_kernels;
  ks.push_back(t.target_kernel);
  EXPECT_NEAR(p.mean[0], 0.0, 1e-14);
  EXPECT_NEAR(p.variance[0], cov_auto_target(Eigen::VectorXd::Zero(1), ks), 1e-12);
  EXPECT_FALSE(p.includes_noise);
}

TEST(Predict, NoiselessTargetInterpolates) {
  std::mt19937_64 rng(12);
  TransferData data = random_data(1, 6, 5, 1, rng);
  Hyperparameters t = random_theta(1, 1, rng);
  t.log_sigma_target = std::log(1e-6);
  const CovarianceBundle b = assemble_covariance(data, t, 1e-8);
  const PredictiveDistribution p = predict(b, data, t, data.target.inputs);
  for (Eigen::Index r = 0; r < data.target.size(); ++r) {
    EXPECT_NEAR(p.mean[r], data.target.responses[r], 1e-4);
  }
}

TEST(Predict, MatchesDenseOracle) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const TransferData data = random_data(3, 8, 5, 2, rng);
    const Hyperparameters t = random_theta(3, 2, rng, trial % 2 == 1);
    const CovarianceBundle b = assemble_covariance(data, t);
    const Eigen::MatrixXd query = testing::uniform_matrix(7, 2, 0.0, 5.0, rng);
    const PredictiveDistribution p = predict(b, data, t, query);
    const PredictiveDistribution o = oracle::predict(data, t, query, b.jitter);
    EXPECT_LT((p.mean - o.mean).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((p.variance - o.variance).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_GE(p.variance.minCoeff(), 0.0);
  }
}

TEST(Predict, IncludeNoiseAddsTargetNoise) {
  std::mt19937_64 rng(14);
  const TransferData data = random_data(1, 5, 4, 1, rng);
  const Hyperparameters t = random_theta(1, 1, rng);
  const CovarianceBundle b = assemble_covariance(data, t);
  const Eigen::MatrixXd query = testing::uniform_matrix(3, 1, 0.0, 5.0, rng);
  const PredictiveDistribution f = predict(b, data, t, query, false);
  const PredictiveDistribution y = predict(b, data, t, query, true);
  const double s2 = std::exp(2.0 * t.log_sigma_target);
  EXPECT_TRUE(y.includes_noise);
  EXPECT_LT((y.variance.array() - f.variance.array() - s2).abs().maxCoeff(), 1e-12);
}

TEST(Predict, QueryDimensionMismatchThrows) {
  std::mt19937_64 rng(15);
  const TransferData data = random_data(1, 5, 4, 2, rng);
  const Hyperparameters t = random_theta(1, 2, rng);
  const CovarianceBundle b = assemble_covariance(data, t);
  EXPECT_THROW(predict(b, data, t, Eigen::MatrixXd::Zero(2, 3)), ContractViolation);
}

TEST(MarginalizeSources, EmptyDropSetIsIdentity) {
  std::mt19937_64 rng(16);
  const TransferData data = random_data(3, 5, 4, 1, rng);
  const Hyperparameters t = random_theta(3, 1, rng);
  const auto [d2, t2] = marginalize_sources(data, t, {});
  EXPECT_EQ(d2.num_sources(), 3);
  EXPECT_EQ(t2.flatten(), t.flatten());
  EXPECT_EQ(d2.stacked_responses(), data.stacked_responses());
}

TEST(MarginalizeSources, DroppingAllLeavesTargetOnly) {
  std::mt19937_64 rng(17);
  const TransferData data = random_data(3, 5, 4, 1, rng);
  const Hyperparameters t = random_theta(3, 1, rng);
  const auto [d2, t2] = marginalize_sources(data, t, {0, 1, 2});
  EXPECT_EQ(d2.num_sources(), 0);
  EXPECT_EQ(t2.num_sources(), 0);
  EXPECT_EQ(d2.target.responses, data.target.responses);
  // A target-only model still assembles and predicts.
  const CovarianceBundle b = assemble_covariance(d2, t2);
  const PredictiveDistribution p = predict(b, d2, t2, data.target.inputs);
  EXPECT_EQ(p.mean.size(), data.target.size());
}

TEST(MarginalizeSources, InvalidIndexThrows) {
  std::mt19937_64 rng(18);
  const TransferData data = random_data(2, 5, 4, 1, rng);
  EXPECT_THROW(marginalize_sources(data, random_theta(2, 1, rng), {2}), ContractViolation);
}

TEST(MarginalizeSources, ZeroTransferSourcesDoNotAffectPrediction) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 10; ++trial) {
    const TransferData data = random_data(4, 7, 5, 1, rng);
    Hyperparameters t = random_theta(4, 1, rng);
    t.transfer_kernels[0].alpha = 0.0;
    t.transfer_kernels[1].alpha = 0.0;
    const auto [d2, t2] = marginalize_sources(data, t, {0, 1});
    const Eigen::MatrixXd query = testing::uniform_matrix(20, 1, 0.0, 5.0, rng);
    const PredictiveDistribution full = predict(assemble_covariance(data, t, 0.0), data, t, query);
    const PredictiveDistribution reduced = predict(assemble_covariance(d2, t2, 0.0), d2, t2, query);
    EXPECT_LT((full.mean - reduced.mean).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((full.variance - reduced.variance).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(LogLikelihoodGradient, MatchesCentralDifferences) {
  std::mt19937_64 rng(20);
  for (int trial = 0; trial < 6; ++trial) {
    const bool shared = trial % 3 == 2;
    const TransferData data = random_data(2, 6, 4, 1 + trial % 2, rng);
    const Hyperparameters t = random_theta(2, data.dim(), rng, shared);
    const CovarianceBundle b = assemble_covariance(data, t);
    const Eigen::VectorXd g = log_likelihood_gradient(b, data, t);
    const Eigen::VectorXd x = t.flatten();
    Eigen::VectorXd fd(x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      const double h = 1e-5 * std::max(1.0, std::abs(x[k]));
      Eigen::VectorXd xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      // Same absolute jitter on both sides so the check sees only theta.
      const auto eval = [&](const Eigen::VectorXd &z) {
        const Hyperparameters tz = Hyperparameters::unflatten(t.layout(), z);
        const Eigen::MatrixXd C = oracle::dense_covariance(data, tz, b.jitter);
        return oracle::log_density(C, data.stacked_responses());
      };
      fd[k] = (eval(xp) - eval(xm)) / (2.0 * h);
    }
    EXPECT_LT((g - fd).norm() / fd.norm(), 1e-4) << "trial " << trial;
  }
}

}  // namespace
}  // namespace mgcp

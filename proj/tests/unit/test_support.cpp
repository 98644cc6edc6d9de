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

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "mgcp/csv.hpp"
#include "mgcp/data.hpp"
#include "mgcp/errors.hpp"
#include "mgcp/hyperparameters.hpp"
#include "mgcp/parallel.hpp"
#include "mgcp/seed.hpp"

namespace mgcp {
namespace {

TEST(DeriveSeed, StableAndLabelSensitive) {
  EXPECT_EQ(derive_seed(1, "restart", 0), derive_seed(1, "restart", 0));
  EXPECT_NE(derive_seed(1, "restart", 0), derive_seed(1, "restart", 1));
  EXPECT_NE(derive_seed(1, "restart", 0), derive_seed(2, "restart", 0));
  EXPECT_NE(derive_seed(1, "restart", 0), derive_seed(1, "cv-folds", 0));
}

TEST(ParallelFor, EveryIndexOnce) {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
  for (const auto &h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(ParallelFor, RethrowsWorkerException) {
  EXPECT_THROW(parallel_for(10, [](std::size_t i) {
                 if (i == 7) throw std::runtime_error("boom");
               }),
               std::runtime_error);
}

TEST(ParallelFor, ThreadCapFromEnvironment) {
  ::setenv("MGCP_THREADS", "1", 1);
  EXPECT_EQ(worker_threads(), 1);
  ::unsetenv("MGCP_THREADS");
  EXPECT_GE(worker_threads(), 1);
}

TEST(CsvFormat, ShortestRoundTrip) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, i % 30 - 15);
    EXPECT_EQ(std::stod(csv::format_double(v)), v);
  }
  EXPECT_EQ(csv::format_double(0.1), "0.1");
  EXPECT_EQ(csv::format_double(2.0), "2");
}

class CsvFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("mgcp_csv_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::string write(const std::string &name, const std::string &text) {
    std::ofstream(dir_ / name) << text;
    return (dir_ / name).string();
  }
  std::filesystem::path dir_;
};

TEST_F(CsvFiles, OutputRoundTrip) {
  std::mt19937_64 rng(2);
  OutputData o = testing::random_output(7, 2, rng, OutputRole::kSource);
  const std::string path = (dir_ / "o.csv").string();
  csv::write_output(path, o);
  const OutputData back = csv::read_output(path, OutputRole::kSource, "o");
  EXPECT_EQ(back.inputs, o.inputs);
  EXPECT_EQ(back.responses, o.responses);
}

TEST_F(CsvFiles, MalformedInputIsDataError) {
  EXPECT_THROW(csv::read_output((dir_ / "missing.csv").string(), OutputRole::kTarget, "t"), DataError);
  EXPECT_THROW(csv::read_output(write("a.csv", ""), OutputRole::kTarget, "t"), DataError);
  EXPECT_THROW(csv::read_output(write("b.csv", "x,y\n1,2\n3\n"), OutputRole::kTarget, "t"), DataError);
  EXPECT_THROW(csv::read_output(write("c.csv", "x,y\n1,abc\n"), OutputRole::kTarget, "t"), DataError);
  EXPECT_THROW(csv::read_output(write("d.csv", "y\n1\n"), OutputRole::kTarget, "t"), DataError);
  EXPECT_THROW(csv::read_output(write("e.csv", "x,y\n1,nan\n"), OutputRole::kTarget, "t"), DataError);
}

TEST(Standardizer, Modes) {
  const Eigen::VectorXd y = Eigen::Vector4d(1.0, 2.0, 3.0, 6.0);
  const Standardizer none = Standardizer::fit(y, StandardizeMode::kNone);
  EXPECT_EQ(none.apply(y), y);
  const Standardizer scale = Standardizer::fit(y, StandardizeMode::kScale);
  EXPECT_EQ(scale.mean, 0.0);
  const Eigen::VectorXd z = scale.apply(y);
  const double m = z.mean();
  EXPECT_NEAR(std::sqrt((z.array() - m).square().sum() / 3.0), 1.0, 1e-14);
  const Standardizer full = Standardizer::fit(y, StandardizeMode::kCenterScale);
  EXPECT_NEAR(full.apply(y).mean(), 0.0, 1e-14);
  EXPECT_LT((full.invert(full.apply(y)) - y).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Hyperparameters, FlattenIsLosslessBijection) {
  std::mt19937_64 rng(3);
  for (bool shared : {false, true}) {
    const Hyperparameters t = testing::random_theta(3, 2, rng, shared);
    const Eigen::VectorXd x = t.flatten();
    EXPECT_EQ(x.size(), t.layout().size());
    const Hyperparameters back = Hyperparameters::unflatten(t.layout(), x);
    EXPECT_EQ(back.flatten(), x);
    EXPECT_EQ(back.transfer_alphas(), t.transfer_alphas());
    for (int i = 0; i < 3; ++i) {
      EXPECT_EQ(x[t.layout().transfer_alpha_index(i)], t.transfer_kernels[static_cast<std::size_t>(i)].alpha);
    }
  }
}

TEST(Hyperparameters, RandomInitialisationRanges) {
  std::mt19937_64 rng(4);
  const Hyperparameters t = Hyperparameters::random({2, 3, false}, rng);
  for (const auto &k : t.transfer_kernels) {
    EXPECT_GE(k.alpha, 0.0);
    EXPECT_LE(k.alpha, 1.0);
    EXPECT_GE(k.log_lambda.minCoeff(), std::log(1e-3));
    EXPECT_LE(k.log_lambda.maxCoeff(), 0.0);
  }
  EXPECT_NO_THROW(t.validate());
}

TEST(Hyperparameters, ValidateRejectsNonFinite) {
  std::mt19937_64 rng(5);
  Hyperparameters t = testing::random_theta(1, 1, rng);
  t.transfer_kernels[0].alpha = std::nan("");
  EXPECT_THROW(t.validate(), ContractViolation);
}

TEST(TransferData, ValidationAndSubsets) {
  std::mt19937_64 rng(6);
  TransferData d = testing::random_data(3, 4, 3, 2, rng);
  EXPECT_NO_THROW(d.validate());
  EXPECT_EQ(d.total_size(), 15);
  const TransferData sub = d.with_sources({2, 0});
  ASSERT_EQ(sub.num_sources(), 2);
  EXPECT_EQ(sub.sources[0].responses, d.sources[2].responses);
  d.sources[1].inputs = Eigen::MatrixXd::Zero(4, 1);
  EXPECT_THROW(d.validate(), DataError);
}

}  // namespace
}  // namespace mgcp

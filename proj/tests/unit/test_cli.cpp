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

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "json.hpp"
#include "mgcp/bench.hpp"
#include "mgcp/csv.hpp"
#include "mgcp/errors.hpp"
#include "mgcp_cli/app.hpp"

namespace mgcp {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::set<std::string> listing(const fs::path &dir) {
  std::set<std::string> out;
  for (const auto &e : fs::recursive_directory_iterator(dir)) out.insert(fs::relative(e.path(), dir).string());
  return out;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("mgcp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_ / "in");
    ScenarioSpec s = ScenarioSpec::defaults(CaseId::kSim1);
    s.seed = 4;
    scenario_ = generate(s);
    for (int i = 0; i < scenario_.data.num_sources(); ++i) {
      csv::write_output((dir_ / "in" / ("s" + std::to_string(i + 1) + ".csv")).string(),
                        scenario_.data.sources[static_cast<std::size_t>(i)]);
    }
    csv::write_output((dir_ / "in" / "t.csv").string(), scenario_.data.target);
    std::ofstream q(dir_ / "in" / "q.csv");
    q << "x\n0\n1.5\n2.5\n4\n5\n";
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const Json &j, const std::string &name = "config.json") {
    std::ofstream(dir_ / "in" / name) << j.dump(2);
    return dir_ / "in" / name;
  }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "mgcp");
    out_.str("");
    err_.str("");
    return cli::run(args, out_, err_);
  }

  fs::path dir_;
  Scenario scenario_;
  std::ostringstream out_;
  std::ostringstream err_;
};

TEST_F(Cli, MinimalFitWritesArtifacts) {
  const fs::path cfg = write_config(
      {{"seed", 1}, {"target", "t.csv"}, {"sources", {"s1.csv"}}, {"query", "q.csv"}, {"train", {{"gamma", 1.0}, {"restarts", 2}}}});
  const auto before = listing(dir_ / "in");
  ASSERT_EQ(run({"fit", "--config", cfg.string(), "--out", (dir_ / "out").string()}), 0) << err_.str();
  EXPECT_EQ(listing(dir_ / "in"), before);
  const auto files = listing(dir_ / "out");
  EXPECT_EQ(files, (std::set<std::string>{"hyperparameters.json", "selection.csv", "predictions.csv", "manifest.json"}));
  const csv::Table pred = csv::read_numeric((dir_ / "out" / "predictions.csv").string());
  EXPECT_EQ(pred.values.rows(), 5);
  EXPECT_EQ(pred.header, (std::vector<std::string>{"x", "mean", "variance"}));
  const Json manifest = Json::parse(slurp(dir_ / "out" / "manifest.json"));
  EXPECT_EQ(manifest["command"], "fit");
  EXPECT_EQ(manifest["seed"], 1);
  EXPECT_EQ(manifest["artifacts"].size(), 4u);
  EXPECT_TRUE(manifest.contains("started_at"));
  EXPECT_TRUE(manifest["config"].contains("train"));
}

TEST_F(Cli, FitWithoutGammaRunsCrossValidation) {
  const fs::path cfg = write_config({{"seed", 2},
                                     {"target", "t.csv"},
                                     {"sources", {"s1.csv", "s2.csv"}},
                                     {"train", {{"gamma_grid", {0.5, 2.0}}, {"restarts", 2}, {"cv_folds", 3}}}});
  ASSERT_EQ(run({"fit", "--config", cfg.string(), "--out", (dir_ / "out").string()}), 0) << err_.str();
  EXPECT_TRUE(fs::exists(dir_ / "out" / "gamma_selection.csv"));
  EXPECT_FALSE(fs::exists(dir_ / "out" / "predictions.csv"));
}

TEST_F(Cli, SameSelectionAsBenchPath) {
  const BenchConfig bc = [] {
    BenchConfig c;
    c.methods = {Method::kMgcpR};
    return c;
  }();
  const std::uint64_t replication_seed = 4;
  const ReplicationRecord rec = run_method(scenario_, CaseId::kSim1, Method::kMgcpR, bc, replication_seed);
  ASSERT_TRUE(rec.ok) << rec.error;
  const fs::path cfg = write_config(
      {{"target", "t.csv"},
       {"sources", {"s1.csv", "s2.csv", "s3.csv", "s4.csv"}},
       {"train",
        {{"seed", method_seed(replication_seed, Method::kMgcpR)},
         {"gamma", bc.gamma},
         {"restarts", bc.restarts},
         {"max_iterations", bc.max_iterations}}}});
  ASSERT_EQ(run({"fit", "--config", cfg.string(), "--out", (dir_ / "out").string()}), 0) << err_.str();
  const csv::Table sel = [&] {
    // selection.csv has a text column; read the flags by hand.
    std::ifstream in(dir_ / "out" / "selection.csv");
    std::string line;
    std::getline(in, line);
    csv::Table t;
    std::vector<double> kept;
    while (std::getline(in, line)) kept.push_back(line.substr(line.rfind(',') + 1) == "true" ? 1.0 : 0.0);
    t.values = Eigen::Map<Eigen::VectorXd>(kept.data(), static_cast<Eigen::Index>(kept.size()));
    return t;
  }();
  std::vector<int> cli_selected;
  for (Eigen::Index i = 0; i < sel.values.rows(); ++i) {
    if (sel.values(i, 0) == 1.0) cli_selected.push_back(static_cast<int>(i));
  }
  EXPECT_EQ(cli_selected, rec.selected_sources);
}

TEST_F(Cli, EmptySharedFeaturesIsConfigError) {
  const fs::path cfg = write_config(
      {{"target", "t.csv"},
       {"sources", {{{"path", "s1.csv"}, {"domain", {{"shared_features", Json::array()}, {"source_unique", {0}}}}}}}});
  EXPECT_EQ(run({"fit", "--config", cfg.string(), "--out", (dir_ / "out").string()}), 2);
  EXPECT_NE(err_.str().find("shared"), std::string::npos) << err_.str();
  EXPECT_NE(err_.str().find("sources[0].domain"), std::string::npos) << err_.str();
  EXPECT_FALSE(fs::exists(dir_ / "out"));
}

TEST_F(Cli, ConfigErrorsNameTheField) {
  const fs::path cfg = write_config({{"target", "t.csv"}, {"sources", {"s1.csv"}}, {"train", {{"eta", "big"}}}});
  EXPECT_EQ(run({"fit", "--config", cfg.string(), "--out", (dir_ / "out").string()}), 2);
  EXPECT_NE(err_.str().find("train.eta"), std::string::npos) << err_.str();
  const fs::path cfg2 = write_config({{"target", "t.csv"}, {"sources", {"s1.csv"}}, {"trian", 1}}, "c2.json");
  EXPECT_EQ(run({"fit", "--config", cfg2.string(), "--out", (dir_ / "out").string()}), 2);
  EXPECT_NE(err_.str().find("trian"), std::string::npos);
  EXPECT_EQ(run({"fit", "--config", (dir_ / "in" / "none.json").string(), "--out", (dir_ / "out").string()}), 2);
}

TEST_F(Cli, MissingDataFileIsDataError) {
  const fs::path cfg = write_config({{"target", "t.csv"}, {"sources", {"nope.csv"}}});
  EXPECT_EQ(run({"fit", "--config", cfg.string(), "--out", (dir_ / "out").string()}), 3);
  EXPECT_NE(err_.str().find("nope.csv"), std::string::npos);
}

TEST_F(Cli, QueryWithWrongWidthIsDataError) {
  std::ofstream(dir_ / "in" / "q2.csv") << "a,b\n1,2\n";
  const fs::path cfg = write_config(
      {{"target", "t.csv"}, {"sources", {"s1.csv"}}, {"query", "q2.csv"}, {"train", {{"gamma", 1.0}, {"restarts", 1}}}});
  EXPECT_EQ(run({"fit", "--config", cfg.string(), "--out", (dir_ / "out").string()}), 3);
}

TEST_F(Cli, UnknownCaseAndBadFlags) {
  EXPECT_EQ(run({"sim7", "--out", (dir_ / "out").string()}), 2);
  EXPECT_EQ(run({"sim1"}), 2);
  EXPECT_EQ(run({"sim1", "--out", (dir_ / "out").string(), "--methods", "MGCP-X"}), 2);
  EXPECT_EQ(run({"sim2", "--out", (dir_ / "out").string(), "--methods", "MGCP-T"}), 2);
  EXPECT_EQ(run({"--help"}), 0);
}

TEST_F(Cli, SimulationIsByteReproducibleAndReplayable) {
  const std::vector<std::string> base{"--replications", "2", "--seed", "7", "--methods", "MGCP-R,GCP"};
  auto args = [&](const std::string &out) {
    std::vector<std::string> a{"sim1"};
    a.insert(a.end(), base.begin(), base.end());
    a.insert(a.end(), {"--out", (dir_ / out).string()});
    return a;
  };
  ASSERT_EQ(run(args("a")), 0) << err_.str();
  ASSERT_EQ(run(args("b")), 0) << err_.str();
  for (const char *f : {"replications.csv", "summary.csv"}) {
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
  ASSERT_EQ(run({"sim1", "--config", (dir_ / "a" / "manifest.json").string(), "--out", (dir_ / "c").string()}), 0)
      << err_.str();
  for (const char *f : {"replications.csv", "summary.csv"}) {
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "c" / f)) << f;
  }
  const std::string reps = slurp(dir_ / "a" / "replications.csv");
  EXPECT_EQ(std::count(reps.begin(), reps.end(), '\n'), 5);
}

TEST_F(Cli, FitReplaysFromManifest) {
  const fs::path cfg = write_config(
      {{"seed", 3}, {"target", "t.csv"}, {"sources", {"s1.csv", "s3.csv"}}, {"query", "q.csv"}, {"train", {{"gamma", 2.0}, {"restarts", 2}}}});
  ASSERT_EQ(run({"fit", "--config", cfg.string(), "--out", (dir_ / "a").string()}), 0) << err_.str();
  ASSERT_EQ(run({"fit", "--config", (dir_ / "a" / "manifest.json").string(), "--out", (dir_ / "b").string()}), 0)
      << err_.str();
  for (const char *f : {"predictions.csv", "selection.csv", "hyperparameters.json"}) {
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
}

TEST_F(Cli, Case3FamilyMultiplierFlag) {
  ASSERT_EQ(run({"sim3-s1", "--ne", "1", "--replications", "1", "--methods", "GCP", "--out", (dir_ / "o").string()}), 0)
      << err_.str();
  const Json m = Json::parse(slurp(dir_ / "o" / "manifest.json"));
  EXPECT_EQ(m["config"]["n_e"], 1);
  EXPECT_EQ(m["config"]["replications"], 1);
}

TEST_F(Cli, TimingColumnsOnlyWhenRequested) {
  ASSERT_EQ(run({"sim1", "--replications", "1", "--methods", "GCP", "--out", (dir_ / "a").string()}), 0);
  ASSERT_EQ(run({"sim1", "--replications", "1", "--methods", "GCP", "--timing", "--out", (dir_ / "b").string()}), 0);
  const std::string a = slurp(dir_ / "a" / "replications.csv");
  const std::string b = slurp(dir_ / "b" / "replications.csv");
  const auto row_fields = [](const std::string &csv) {
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    std::vector<std::string> fields;
    std::istringstream row(line);
    for (std::string f; std::getline(row, f, ',');) fields.push_back(f);
    return fields;
  };
  const auto fa = row_fields(a);
  const auto fb = row_fields(b);
  ASSERT_GE(fa.size(), 5u);
  ASSERT_GE(fb.size(), 5u);
  EXPECT_EQ(fa[1], "GCP");
  EXPECT_TRUE(fa[3].empty());
  EXPECT_TRUE(fa[4].empty());
  EXPECT_FALSE(fb[3].empty());
  EXPECT_FALSE(fb[4].empty());
}

TEST_F(Cli, SweepGammaSortedGrid) {
  const fs::path cfg = write_config(
      {{"seed", 5}, {"target", "t.csv"}, {"sources", {"s1.csv", "s2.csv"}}, {"train", {{"restarts", 2}, {"cv_folds", 3}}}});
  ASSERT_EQ(run({"sweep-gamma", "--config", cfg.string(), "--grid", "1000000,0,1", "--out", (dir_ / "o").string()}), 0)
      << err_.str();
  std::ifstream in(dir_ / "o" / "gamma_path.csv");
  std::string header, r0, r1, r2;
  std::getline(in, header);
  std::getline(in, r0);
  std::getline(in, r1);
  std::getline(in, r2);
  EXPECT_EQ(header, "gamma,cv_mae,selected_count,alpha_path");
  EXPECT_EQ(r0.substr(0, 2), "0,");
  EXPECT_EQ(r1.substr(0, 2), "1,");
  EXPECT_EQ(r2.substr(0, 6), "1e+06,");
  const auto count = [](const std::string &row) {
    std::stringstream ss(row);
    std::string f;
    std::getline(ss, f, ',');
    std::getline(ss, f, ',');
    std::getline(ss, f, ',');
    return std::stoi(f);
  };
  EXPECT_EQ(count(r0), 2);
  EXPECT_EQ(count(r2), 0);
  EXPECT_EQ(run({"sweep-gamma", "--config", cfg.string(), "--grid", "", "--out", (dir_ / "p").string()}), 0);
  EXPECT_EQ(run({"sweep-gamma", "--config", cfg.string(), "--grid", "a,b", "--out", (dir_ / "p").string()}), 2);
}

TEST(ExitCodes, Mapping) {
  EXPECT_EQ(cli::exit_code_for(ConfigError("x")), 2);
  EXPECT_EQ(cli::exit_code_for(DomainSpecError("x")), 2);
  EXPECT_EQ(cli::exit_code_for(DataError("x")), 3);
  EXPECT_EQ(cli::exit_code_for(OptimizationFailed("x")), 4);
  EXPECT_EQ(cli::exit_code_for(IndefiniteCovariance("x")), 4);
  EXPECT_EQ(cli::exit_code_for(std::runtime_error("x")), 1);
}

}  // namespace
}  // namespace mgcp

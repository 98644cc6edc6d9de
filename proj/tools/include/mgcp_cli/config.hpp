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

#ifndef MGCP_CLI_CONFIG_HPP
#define MGCP_CLI_CONFIG_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mgcp/bench.hpp"
#include "mgcp/dame.hpp"
#include "mgcp/train.hpp"

namespace mgcp::cli {

using Json = nlohmann::ordered_json;

struct SourceEntry {
  std::filesystem::path path;
  std::string name;
  std::optional<DomainSpec> domain;  // present when the source needs DAME
  DameConfig dame;
};

// Configuration of `fit` and `sweep-gamma`. Relative paths are resolved
// against the directory of the config file.
struct FitJob {
  std::uint64_t seed = 0;
  std::filesystem::path target_path;
  std::string target_name = "target";
  std::vector<SourceEntry> sources;
  std::optional<std::filesystem::path> query_path;
  TrainConfig train;
  bool gamma_given = false;
};

// Configuration of the simulation subcommands.
struct SimJob {
  ScenarioSpec scenario;
  BenchConfig bench;
};

std::vector<double> default_gamma_grid();

// Parse errors throw ConfigError naming the offending field.
FitJob parse_fit_job(const Json &j, const std::filesystem::path &base_dir);
SimJob parse_sim_job(const Json &j, CaseId id);

Json to_json(const FitJob &job);
Json to_json(const SimJob &job);
Json to_json(const Hyperparameters &theta);
Json to_json(const TrainConfig &config);

// Reads a JSON file. A run manifest is accepted too: its stored config is
// returned so that a run can be repeated from its manifest.
Json load_config_file(const std::filesystem::path &path);

std::vector<Method> parse_method_list(const std::string &csv);
std::vector<double> parse_grid(const std::string &csv);

}  // namespace mgcp::cli

#endif  // MGCP_CLI_CONFIG_HPP

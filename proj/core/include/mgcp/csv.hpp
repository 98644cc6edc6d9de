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

#ifndef MGCP_CSV_HPP
#define MGCP_CSV_HPP

#include <Eigen/Core>
#include <string>
#include <vector>

#include "mgcp/data.hpp"

namespace mgcp::csv {

// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

struct Table {
  std::vector<std::string> header;
  Eigen::MatrixXd values;
};

// Numeric CSV with one header row. Throws DataError naming the file and line.
Table read_numeric(const std::string &path);

// Feature columns followed by a single response column.
OutputData read_output(const std::string &path, OutputRole role, const std::string &name);

// Header x1..xd,y followed by one row per observation.
std::string format_output(const OutputData &data);
void write_output(const std::string &path, const OutputData &data);

std::string join(const std::vector<std::string> &fields, char sep = ',');

}  // namespace mgcp::csv

#endif  // MGCP_CSV_HPP

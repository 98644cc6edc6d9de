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

#include "mgcp/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "mgcp/errors.hpp"

namespace mgcp::csv {

namespace {

std::vector<std::string> split(const std::string &line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    const auto first = field.find_first_not_of(" \t\r");
    const auto last = field.find_last_not_of(" \t\r");
    out.push_back(first == std::string::npos ? std::string() : field.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string join(const std::vector<std::string> &fields, char sep) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += sep;
    out += fields[i];
  }
  return out;
}

Table read_numeric(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  Table table;
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  table.header = split(line);
  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split(line);
    if (fields.size() != table.header.size()) {
      throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(table.header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    std::vector<double> row;
    for (const auto &f : fields) {
      double v = 0.0;
      const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
        throw DataError(path + ":" + std::to_string(line_no) + ": not a number: '" + f + "'");
      }
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  table.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(table.header.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) table.values(r, c) = rows[r][c];
  }
  return table;
}

OutputData read_output(const std::string &path, OutputRole role, const std::string &name) {
  const Table t = read_numeric(path);
  if (t.header.size() < 2) {
    throw DataError(path + ": need at least one feature column and a response column");
  }
  OutputData out;
  out.role = role;
  out.name = name;
  const Eigen::Index d = t.values.cols() - 1;
  out.inputs = t.values.leftCols(d);
  out.responses = t.values.col(d);
  out.validate();
  return out;
}

std::string format_output(const OutputData &data) {
  std::ostringstream out;
  for (Eigen::Index j = 0; j < data.dim(); ++j) out << "x" << j + 1 << ",";
  out << "y\n";
  for (Eigen::Index r = 0; r < data.size(); ++r) {
    for (Eigen::Index j = 0; j < data.dim(); ++j) out << format_double(data.inputs(r, j)) << ",";
    out << format_double(data.responses[r]) << "\n";
  }
  return out.str();
}

void write_output(const std::string &path, const OutputData &data) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << format_output(data);
}

}  // namespace mgcp::csv

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

#include "mgcp/data.hpp"

#include <cmath>

#include "mgcp/errors.hpp"

namespace mgcp {

void OutputData::validate() const {
  const std::string label = name.empty() ? std::string("output") : name;
  if (responses.size() < 1) throw DataError(label + ": no observations");
  if (inputs.rows() != responses.size()) {
    throw DataError(label + ": inputs have " + std::to_string(inputs.rows()) + " rows but " +
                    std::to_string(responses.size()) + " responses");
  }
  if (inputs.cols() < 1) throw DataError(label + ": inputs have no columns");
  if (!inputs.allFinite() || !responses.allFinite()) {
    throw DataError(label + ": non-finite entry");
  }
}

Eigen::Index TransferData::total_size() const {
  Eigen::Index n = target.size();
  for (const auto &s : sources) n += s.size();
  return n;
}

Eigen::VectorXd TransferData::stacked_responses() const {
  Eigen::VectorXd y(total_size());
  Eigen::Index offset = 0;
  for (const auto &s : sources) {
    y.segment(offset, s.size()) = s.responses;
    offset += s.size();
  }
  y.segment(offset, target.size()) = target.responses;
  return y;
}

void TransferData::validate() const {
  target.validate();
  for (const auto &s : sources) {
    s.validate();
    if (s.dim() != target.dim()) {
      throw DataError((s.name.empty() ? std::string("source") : s.name) +
                      ": input dimension " + std::to_string(s.dim()) +
                      " differs from target dimension " + std::to_string(target.dim()));
    }
  }
}

TransferData TransferData::with_sources(const std::vector<int> &keep) const {
  TransferData out;
  out.target = target;
  for (int i : keep) out.sources.push_back(sources.at(i));
  return out;
}

Standardizer Standardizer::fit(const Eigen::VectorXd &y, StandardizeMode mode) {
  Standardizer s;
  if (mode == StandardizeMode::kNone || y.size() == 0) return s;
  const double mean = y.mean();
  if (mode == StandardizeMode::kCenterScale) s.mean = mean;
  if (y.size() > 1) {
    const double var = (y.array() - mean).square().sum() / static_cast<double>(y.size() - 1);
    if (var > 0.0 && std::isfinite(var)) s.scale = std::sqrt(var);
  }
  return s;
}

StandardizedData standardize(const TransferData &data, StandardizeMode mode) {
  StandardizedData out;
  out.data = data;
  for (auto &s : out.data.sources) {
    out.source_scalers.push_back(Standardizer::fit(s.responses, mode));
    s.responses = out.source_scalers.back().apply(s.responses);
  }
  out.target_scaler = Standardizer::fit(data.target.responses, mode);
  out.data.target.responses = out.target_scaler.apply(data.target.responses);
  return out;
}

}  // namespace mgcp

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

#ifndef MGCP_DATA_HPP
#define MGCP_DATA_HPP

#include <Eigen/Core>
#include <string>
#include <vector>

namespace mgcp {

enum class OutputRole { kSource, kTarget };

// Observations of one output: n x d inputs and n responses.
struct OutputData {
  Eigen::MatrixXd inputs;
  Eigen::VectorXd responses;
  OutputRole role = OutputRole::kSource;
  std::string name;

  Eigen::Index size() const { return responses.size(); }
  Eigen::Index dim() const { return inputs.cols(); }

  // n >= 1, rows agree, all entries finite. Throws DataError.
  void validate() const;
};

// q sources plus one target, all on a common input space.
struct TransferData {
  std::vector<OutputData> sources;
  OutputData target;

  int num_sources() const { return static_cast<int>(sources.size()); }
  Eigen::Index dim() const { return target.dim(); }
  Eigen::Index total_size() const;

  // Responses stacked source-major, target last.
  Eigen::VectorXd stacked_responses() const;

  void validate() const;

  TransferData with_sources(const std::vector<int> &keep) const;
};

enum class StandardizeMode {
  kNone,
  kScale,        // divide by the sample standard deviation, keep the origin
  kCenterScale,  // zero mean and unit variance
};

// Affine map y -> (y - mean) / scale.
struct Standardizer {
  double mean = 0.0;
  double scale = 1.0;

  static Standardizer fit(const Eigen::VectorXd &y, StandardizeMode mode = StandardizeMode::kCenterScale);
  Eigen::VectorXd apply(const Eigen::VectorXd &y) const { return (y.array() - mean) / scale; }
  Eigen::VectorXd invert(const Eigen::VectorXd &z) const { return z.array() * scale + mean; }
};

struct StandardizedData {
  TransferData data;
  std::vector<Standardizer> source_scalers;
  Standardizer target_scaler;
};

StandardizedData standardize(const TransferData &data,
                             StandardizeMode mode = StandardizeMode::kCenterScale);

}  // namespace mgcp

#endif  // MGCP_DATA_HPP

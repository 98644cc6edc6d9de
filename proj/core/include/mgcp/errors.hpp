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

#ifndef MGCP_ERRORS_HPP
#define MGCP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mgcp {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on shapes or argument ranges was violated by the caller.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Cholesky failed on a covariance block even after jitter escalation.
class IndefiniteCovariance : public Error {
 public:
  using Error::Error;
};

// Every optimizer restart failed.
class OptimizationFailed : public Error {
 public:
  using Error::Error;
};

// Kernel-regression bandwidth is unusable (zero weights, degenerate design).
class BandwidthError : public Error {
 public:
  using Error::Error;
};

// Domain specification cannot be honoured (no shared features, no bounds).
class DomainSpecError : public Error {
 public:
  using Error::Error;
};

// Invalid training or benchmark configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data.
class DataError : public Error {
 public:
  using Error::Error;
};

// Inverse-variance combination received a non-positive variance.
class CombinationError : public Error {
 public:
  using Error::Error;
};

}  // namespace mgcp

#endif  // MGCP_ERRORS_HPP

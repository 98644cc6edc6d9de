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

#ifndef MGCP_CLI_APP_HPP
#define MGCP_CLI_APP_HPP

#include <exception>
#include <iosfwd>
#include <string>
#include <vector>

namespace mgcp::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitConfig = 2,
  kExitData = 3,
  kExitOptimization = 4,
};

// Maps a library exception to the documented process exit code.
int exit_code_for(const std::exception &e);

// Entry point shared by the executable and the tests. args[0] is the
// program name.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace mgcp::cli

#endif  // MGCP_CLI_APP_HPP

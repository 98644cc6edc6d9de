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

#ifndef MGCP_PARALLEL_HPP
#define MGCP_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace mgcp {

// Worker count: MGCP_THREADS if set and positive, else hardware concurrency.
int worker_threads();

// Runs body(i) for i in [0, n) on up to worker_threads() threads. Each index
// runs exactly once; the first exception thrown is rethrown after all workers
// join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)> &body);

}  // namespace mgcp

#endif  // MGCP_PARALLEL_HPP

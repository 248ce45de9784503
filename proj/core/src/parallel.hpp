/*
 * Copyright 2026 The MVMC Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <future>
#include <vector>

#include "mvmc/types.hpp"

namespace mvmc::detail {

// Runs fn(i) for i in [0, count) on up to `workers` threads; results land in
// their own slot, so the outcome does not depend on scheduling.
template <typename Fn>
void parallel_for(Index count, int workers, Fn&& fn) {
  if (workers <= 1 || count <= 1) {
    for (Index i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::future<void>> pending;
  Index next = 0;
  while (next < count || !pending.empty()) {
    while (next < count && static_cast<int>(pending.size()) < workers) {
      pending.push_back(std::async(std::launch::async, [&fn, i = next] { fn(i); }));
      ++next;
    }
    pending.front().get();
    pending.erase(pending.begin());
  }
}

}  // namespace mvmc::detail

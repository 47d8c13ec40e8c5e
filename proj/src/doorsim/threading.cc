// Copyright 2026 The doorsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "doorsim/threading.h"

#include <memory>

namespace doorsim {

namespace {
std::unique_ptr<ThreadPool> g_pool;
int g_requested_threads = 0;
}  // namespace

ThreadPool* GlobalPool() {
  if (!g_pool) {
    int n = g_requested_threads;
    if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    g_pool = std::make_unique<ThreadPool>(n);
  }
  return g_pool.get();
}

void ConfigureGlobalPool(int parallelism) {
  g_requested_threads = parallelism;
  g_pool.reset();
}

}  // namespace doorsim

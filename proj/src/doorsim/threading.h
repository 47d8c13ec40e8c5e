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

#ifndef DOORSIM_THREADING_H_
#define DOORSIM_THREADING_H_

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <queue>
#include <thread>
#include <vector>

namespace doorsim {

// Fork-join helper with a fixed degree of parallelism. ParallelFor splits an
// index range into one contiguous chunk per participant (the caller runs the
// first chunk), so every index is processed by exactly one thread and results
// never depend on scheduling order.
class ThreadPool {
 public:
  // `parallelism` counts the calling thread; 1 means run everything inline.
  explicit ThreadPool(int parallelism)
      : parallelism_(parallelism < 1 ? 1 : parallelism) {
    for (int i = 0; i < parallelism_ - 1; i++) {
      threads_.emplace_back([this] { Worker(); });
    }
  }

  ~ThreadPool() {
    {
      std::unique_lock<std::mutex> lock(mutex_);
      stop_ = true;
      cv_in_.notify_all();
    }
    for (auto& t : threads_) t.join();
  }

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  int parallelism() const { return parallelism_; }

  // Runs fn(begin, end) over a partition of [0, n) and blocks until done.
  void ParallelFor(int64_t n, const std::function<void(int64_t, int64_t)>& fn) {
    if (n <= 0) return;
    int64_t chunks = parallelism_ < n ? parallelism_ : n;
    if (chunks <= 1) {
      fn(0, n);
      return;
    }
    int64_t chunk_size = (n + chunks - 1) / chunks;

    remaining_.store(static_cast<int>(chunks) - 1, std::memory_order_relaxed);
    for (int64_t c = 1; c < chunks; c++) {
      int64_t begin = c * chunk_size;
      int64_t end = begin + chunk_size < n ? begin + chunk_size : n;
      Schedule([fn, begin, end, this] {
        fn(begin, end);
        if (remaining_.fetch_sub(1, std::memory_order_acq_rel) == 1) {
          std::unique_lock<std::mutex> lock(mutex_);
          cv_done_.notify_all();
        }
      });
    }
    fn(0, chunk_size < n ? chunk_size : n);
    std::unique_lock<std::mutex> lock(mutex_);
    cv_done_.wait(lock, [this] { return remaining_.load(std::memory_order_acquire) == 0; });
  }

 private:
  void Schedule(std::function<void()> task) {
    std::unique_lock<std::mutex> lock(mutex_);
    queue_.push(std::move(task));
    cv_in_.notify_one();
  }

  void Worker() {
    while (true) {
      std::function<void()> task;
      {
        std::unique_lock<std::mutex> lock(mutex_);
        cv_in_.wait(lock, [this] { return stop_ || !queue_.empty(); });
        if (stop_ && queue_.empty()) return;
        task = std::move(queue_.front());
        queue_.pop();
      }
      task();
    }
  }

  int parallelism_;
  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable cv_in_;
  std::condition_variable cv_done_;
  std::queue<std::function<void()>> queue_;
  std::atomic<int> remaining_{0};
  bool stop_ = false;
};

// Process-wide pool used by the kernels and the rollout samplers. Created on
// first use; ConfigureGlobalPool must run before any parallel work if a
// specific degree of parallelism is wanted.
ThreadPool* GlobalPool();
void ConfigureGlobalPool(int parallelism);

}  // namespace doorsim

#endif  // DOORSIM_THREADING_H_

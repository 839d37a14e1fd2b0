#pragma once

// Bounded work-stealing pool for speculative tasks. Each worker owns a deque:
// it pops its own newest task first and steals the oldest task of another
// worker when idle. Submission round-robins across deques and fails once the
// pending budget is exhausted, so a speculation storm degrades into dropped
// tasks instead of unbounded queue growth (callers count a failed submit as
// an immediately fizzled task). `quiesce` waits until every accepted task has
// finished; per-worker busy time accumulates across the pool's lifetime.

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace pfmc {

class WorkerPool {
 public:
  explicit WorkerPool(unsigned threads, std::size_t capacity = 8192)
      : slots_(threads == 0 ? 1 : threads), capacity_(capacity) {
    workers_.reserve(threads);
    for (unsigned i = 0; i < threads; ++i)
      workers_.emplace_back([this, i] { run_worker(i); });
  }
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;
  ~WorkerPool() { shutdown(); }

  unsigned thread_count() const {
    return static_cast<unsigned>(workers_.size());
  }

  // Accepts the task unless the pool is stopping or saturated.
  bool submit(std::function<void()> fn) {
    {
      std::lock_guard<std::mutex> lock(m_);
      if (stopping_ || pending_ >= capacity_) return false;
      slots_[next_++ % slots_.size()].push_back(std::move(fn));
      ++pending_;
    }
    work_cv_.notify_one();
    return true;
  }

  // Blocks until no task is pending or running. With zero threads the queue
  // can hold work forever, so the caller must shut down instead.
  void quiesce() {
    if (workers_.empty()) return;
    std::unique_lock<std::mutex> lock(m_);
    idle_cv_.wait(lock, [this] { return pending_ == 0 && running_ == 0; });
  }

  // Stops accepting work, runs out the backlog, joins the threads. Remaining
  // tasks still execute (they are expected to observe a caller-side stop flag
  // and return quickly).
  void shutdown() {
    {
      std::lock_guard<std::mutex> lock(m_);
      if (stopping_) return;
      stopping_ = true;
    }
    work_cv_.notify_all();
    for (auto& w : workers_) w.join();
    workers_.clear();
  }

  std::vector<double> busy_seconds() const {
    std::lock_guard<std::mutex> lock(m_);
    return busy_;
  }

 private:
  void run_worker(unsigned id) {
    {
      std::lock_guard<std::mutex> lock(m_);
      if (busy_.size() <= id) busy_.resize(id + 1, 0.0);
    }
    for (;;) {
      std::function<void()> task;
      {
        std::unique_lock<std::mutex> lock(m_);
        work_cv_.wait(lock, [this] { return pending_ > 0 || stopping_; });
        if (pending_ == 0 && stopping_) return;
        if (pending_ == 0) continue;
        // Own deque newest-first, then steal oldest elsewhere.
        auto& own = slots_[id % slots_.size()];
        if (!own.empty()) {
          task = std::move(own.back());
          own.pop_back();
        } else {
          for (auto& other : slots_) {
            if (!other.empty()) {
              task = std::move(other.front());
              other.pop_front();
              break;
            }
          }
        }
        if (!task) continue;
        --pending_;
        ++running_;
      }
      auto t0 = std::chrono::steady_clock::now();
      task();
      auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                    .count();
      {
        std::lock_guard<std::mutex> lock(m_);
        busy_[id] += dt;
        --running_;
        if (pending_ == 0 && running_ == 0) idle_cv_.notify_all();
      }
    }
  }

  mutable std::mutex m_;
  std::condition_variable work_cv_;
  std::condition_variable idle_cv_;
  std::vector<std::deque<std::function<void()>>> slots_;
  std::vector<std::thread> workers_;
  std::vector<double> busy_;
  std::size_t capacity_;
  std::size_t pending_ = 0;
  std::size_t running_ = 0;
  std::size_t next_ = 0;
  bool stopping_ = false;
};

}  // namespace pfmc

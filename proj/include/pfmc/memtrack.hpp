#pragma once

#include <atomic>
#include <cstdint>

namespace pfmc {

// Process-wide accounting of live engine payloads (terms, states, stores).
// Approximate by design: it tracks the footprint the engine allocates for
// node/store data, which is what peak_tracked_bytes reports.
struct MemTracker {
  static std::atomic<std::int64_t>& live() {
    static std::atomic<std::int64_t> v{0};
    return v;
  }
  static std::atomic<std::int64_t>& peak() {
    static std::atomic<std::int64_t> v{0};
    return v;
  }

  static void add(std::int64_t n) {
    auto now = live().fetch_add(n, std::memory_order_relaxed) + n;
    auto p = peak().load(std::memory_order_relaxed);
    while (now > p &&
           !peak().compare_exchange_weak(p, now, std::memory_order_relaxed)) {
    }
  }
  static void sub(std::int64_t n) { live().fetch_sub(n, std::memory_order_relaxed); }

  // A run resets the peak to the current level and reads the delta at the end.
  static std::int64_t begin_window() {
    auto now = live().load(std::memory_order_relaxed);
    peak().store(now, std::memory_order_relaxed);
    return now;
  }
  static std::int64_t window_peak(std::int64_t baseline) {
    auto p = peak().load(std::memory_order_relaxed);
    return p > baseline ? p - baseline : 0;
  }
};

}  // namespace pfmc

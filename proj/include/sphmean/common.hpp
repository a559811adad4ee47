#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace sphmean {

inline constexpr double pi = std::numbers::pi;

/// Point in R^n for n <= 3; the z component is ignored (and kept zero) when n = 2.
using Point = std::array<double, 3>;

/// Invalid run configuration: resolutions below module preconditions,
/// unsupported dimensions, unreadable or inconsistent input files.
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

inline double dot(const Point& a, const Point& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline double norm(const Point& a) { return std::sqrt(dot(a, a)); }

inline Point axpy(double s, const Point& x, const Point& y) {
  return {y[0] + s * x[0], y[1] + s * x[1], y[2] + s * x[2]};
}

/// Worker threads used by the parallel loops. Defaults to 1; the
/// SPHMEAN_THREADS environment variable overrides. Results are identical
/// for any thread count: every parallel loop writes disjoint output slots.
inline int thread_count() {
  if (const char* env = std::getenv("SPHMEAN_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<int>(v);
  }
  return 1;
}

inline void parallel_for(std::size_t count,
                         const std::function<void(std::size_t, std::size_t)>& body) {
  const int threads = thread_count();
  if (threads <= 1 || count < 2) {
    body(0, count);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, count);
  const std::size_t chunk = (count + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace sphmean

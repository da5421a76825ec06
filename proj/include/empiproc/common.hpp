#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace empiproc {

using Real = double;

inline constexpr Real kInf = std::numeric_limits<Real>::infinity();

/// A point of [-inf, inf]^d, coordinate-wise ordered.
using Point = std::vector<Real>;

inline bool leq(const Point& s, const Point& t) {
  for (std::size_t i = 0; i < s.size(); ++i)
    if (!(s[i] <= t[i])) return false;
  return true;
}

// --- seeding ------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Per-replicate stream: replicates of one experiment never share a state.
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t replicate_id = 0) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(replicate_id * 0x9e3779b97f4a7c15ULL + 1)));
}

// --- worker pool ----------------------------------------------------------

namespace detail {
inline std::atomic<unsigned>& thread_budget() {
  static std::atomic<unsigned> n{std::thread::hardware_concurrency()};
  return n;
}
}  // namespace detail

inline void set_thread_count(unsigned n) { detail::thread_budget() = n == 0 ? 1 : n; }
inline unsigned thread_count() {
  unsigned n = detail::thread_budget();
  return n == 0 ? 1 : n;
}

/// Runs fn(i) for i in [0, count). Work items must be independent; callers
/// that reduce results do so afterwards in index order so output does not
/// depend on the thread count.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  unsigned workers = std::min<std::size_t>(thread_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

// --- FNV-1a, used for config provenance hashes ----------------------------

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace empiproc

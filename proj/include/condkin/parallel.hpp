#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace condkin {

// Static range partitioning so results do not depend on scheduling.  Each
// worker gets one contiguous block; block boundaries depend only on (n,
// n_threads), never on timing.  The body receives (worker, begin, end).
template <typename Fn>
void parallel_for_indexed(std::size_t n, unsigned n_threads, Fn&& body) {
  if (n == 0) return;
  if (n_threads <= 1 || n == 1) {
    body(unsigned{0}, std::size_t{0}, n);
    return;
  }
  unsigned workers = static_cast<unsigned>(n < n_threads ? n : n_threads);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::size_t chunk = n / workers;
  std::size_t rem = n % workers;
  std::size_t begin = 0;
  for (unsigned w = 0; w < workers; ++w) {
    std::size_t len = chunk + (w < rem ? 1 : 0);
    std::size_t end = begin + len;
    pool.emplace_back([&body, w, begin, end] { body(w, begin, end); });
    begin = end;
  }
  for (auto& t : pool) t.join();
}

template <typename Fn>
void parallel_for(std::size_t n, unsigned n_threads, Fn&& body) {
  parallel_for_indexed(n, n_threads,
                       [&body](unsigned, std::size_t begin, std::size_t end) {
                         body(begin, end);
                       });
}

// Compensated (Kahan) accumulator; keeps long positive sums accurate to a few
// ulp so that regrouped evaluation paths can agree to 1e-12.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    double y = x - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

}  // namespace condkin

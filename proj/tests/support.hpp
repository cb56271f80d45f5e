#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace support {

struct Sample {
  std::vector<double> x;
  std::vector<double> lam;
};

// Seeded generator of random mean arguments: dimension in [1, max_dim],
// values log-uniform on [lo, hi], weights uniform on (0.05, 2].
class Gen {
public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

  Sample sample(std::size_t max_dim = 8, double lo = 1e-2, double hi = 1e2) {
    Sample s;
    const auto n = 1 + index(max_dim);
    for (std::size_t i = 0; i < n; ++i) {
      s.x.push_back(log_uniform(lo, hi));
      s.lam.push_back(uniform(0.05, 2.0));
    }
    return s;
  }

  std::mt19937_64& engine() { return rng_; }

private:
  std::mt19937_64 rng_;
};

inline double rel_err(double a, double b) {
  if (a == b) {
    return 0.0;
  }
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

inline double min_of(const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); }
inline double max_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

}  // namespace support

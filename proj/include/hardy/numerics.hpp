#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace hardy::numerics {

/// Neumaier's variant of Kahan summation.
class CompensatedSum {
public:
  void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double v) noexcept {
    add(v);
    return *this;
  }
  [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Signed sum of terms given as sign * exp(log_magnitude), kept relative to a
/// running scale so that neither overflow nor underflow occurs. The mantissa
/// is accumulated with compensated summation.
class ScaledSum {
public:
  void add_log(double log_magnitude, double sign = 1.0) noexcept;
  /// log of the (positive) sum; -inf when empty or the sum is not positive.
  [[nodiscard]] double log_value() const noexcept;
  /// The sum as sign * exp(log_scale) * mantissa.
  [[nodiscard]] double mantissa() const noexcept { return sum_.value(); }
  [[nodiscard]] double log_scale() const noexcept { return scale_; }
  [[nodiscard]] bool empty() const noexcept { return empty_; }

private:
  CompensatedSum sum_;
  double scale_ = -std::numeric_limits<double>::infinity();
  bool empty_ = true;
};

struct RootResult {
  double root = 0.0;
  double residual = 0.0;
  double lo = 0.0;  // final bracket
  double hi = 0.0;
  int iterations = 0;
};

/// Brent's zeroin on a sign-changing bracket [lo, hi]: bisection safeguarded
/// inverse-quadratic / secant steps. Terminates when the bracket width drops
/// below `xtol` (plus a few ulps of the iterate) or an exact zero is hit.
/// Throws BracketError if f(lo) and f(hi) have the same strict sign.
RootResult brent(const std::function<double(double)>& f, double lo, double hi, double xtol,
                 int max_iter = 500);

/// Same, with f(lo) and f(hi) already known.
RootResult brent(const std::function<double(double)>& f, double lo, double hi, double flo,
                 double fhi, double xtol, int max_iter = 500);

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  /// Largest |w f| seen at the outermost node of either end; a large value
  /// means the integrand is not decaying at a singular endpoint.
  double edge_term = 0.0;
  int levels = 0;
  std::size_t evaluations = 0;
  bool converged = false;
};

struct TanhSinhOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-13;
  int max_level = 12;
  /// Edge terms above this (absolute) mark the result as not converged.
  double edge_tol = 1e-9;
};

/// Double-exponential (tanh-sinh) quadrature of f over [a, b]. The integrand
/// is never evaluated at the endpoints, so integrable algebraic or
/// logarithmic endpoint singularities are handled without splitting.
QuadratureResult tanh_sinh(const std::function<double(double)>& f, double a, double b,
                           const TanhSinhOptions& opts = {});

/// Roughly `per_decade` log-spaced distinct integers in [1, n], always
/// containing 1 and n, strictly increasing.
std::vector<std::size_t> log_grid(std::size_t n, int per_decade = 20);

/// Runs body(i) for i in [0, count) across hardware threads. Each index is
/// executed exactly once; the caller owns result ordering.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

/// Shortest decimal text that round-trips to the same double; `inf`/`-inf`
/// for infinities.
std::string shortest(double v);

/// SplitMix64 finaliser, used to derive independent PRNG streams.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Uniform double in [0, 1) from the top 53 bits; bit-identical everywhere.
constexpr double unit_double(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace hardy::numerics

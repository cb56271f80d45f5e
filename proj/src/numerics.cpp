#include "hardy/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <numbers>
#include <thread>

#include "hardy/errors.hpp"

namespace hardy::numerics {

namespace {
// Rescale the mantissa only when a term would exceed exp(kRescaleMargin)
// relative to the current scale; keeps rescaling (and its rounding) rare.
constexpr double kRescaleMargin = 64.0;
}  // namespace

void ScaledSum::add_log(double log_magnitude, double sign) noexcept {
  if (log_magnitude == -std::numeric_limits<double>::infinity() || sign == 0.0) {
    return;
  }
  const double s = sign > 0 ? 1.0 : -1.0;
  if (empty_) {
    scale_ = log_magnitude;
    sum_ = CompensatedSum{};
    sum_.add(s);
    empty_ = false;
    return;
  }
  if (log_magnitude > scale_ + kRescaleMargin) {
    const double carried = sum_.value() * std::exp(scale_ - log_magnitude);
    sum_ = CompensatedSum{};
    sum_.add(carried);
    scale_ = log_magnitude;
  }
  sum_.add(s * std::exp(log_magnitude - scale_));
}

double ScaledSum::log_value() const noexcept {
  const double m = sum_.value();
  if (empty_ || !(m > 0.0)) {
    return -std::numeric_limits<double>::infinity();
  }
  return std::log(m) + scale_;
}

RootResult brent(const std::function<double(double)>& f, double lo, double hi, double xtol,
                 int max_iter) {
  return brent(f, lo, hi, f(lo), f(hi), xtol, max_iter);
}

RootResult brent(const std::function<double(double)>& f, double lo, double hi, double flo,
                 double fhi, double xtol, int max_iter) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (std::isnan(flo) || std::isnan(fhi)) {
    throw BracketError("function is NaN at a bracket endpoint");
  }
  if (flo == 0.0) {
    return {lo, 0.0, lo, lo, 0};
  }
  if (fhi == 0.0) {
    return {hi, 0.0, hi, hi, 0};
  }
  if ((flo > 0) == (fhi > 0)) {
    throw BracketError("no sign change on [" + std::to_string(lo) + ", " + std::to_string(hi) +
                       "]");
  }

  double a = lo, b = hi, c = lo;
  double fa = flo, fb = fhi, fc = flo;
  double d = b - a, e = d;
  int it = 0;
  for (; it < max_iter; ++it) {
    if ((fb > 0 && fc > 0) || (fb < 0 && fc < 0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * eps * std::abs(b) + 0.25 * xtol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) {
      break;
    }
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double p, q;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0) {
        q = -q;
      }
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol1 ? d : std::copysign(tol1, xm);
    fb = f(b);
    if (std::isnan(fb)) {
      throw BracketError("function became NaN inside the bracket");
    }
  }
  return {b, fb, std::min(b, c), std::max(b, c), it};
}

QuadratureResult tanh_sinh(const std::function<double(double)>& f, double a, double b,
                           const TanhSinhOptions& opts) {
  using std::numbers::pi;
  QuadratureResult out;
  if (!(b > a)) {
    out.converged = (a == b);
    return out;
  }
  const double width = b - a;
  const double half = 0.5 * width;
  bool finite = true;

  // Weighted integrand at abscissa t; sets `stop` once the node reaches an
  // endpoint (or the distance to it becomes subnormal).
  auto term = [&](double t, bool& stop) -> double {
    const double u = 0.5 * pi * std::sinh(t);
    const double e = std::exp(-2.0 * std::abs(u));
    const double dist = width * e / (1.0 + e);
    const double x = t < 0 ? a + dist : b - dist;
    if (dist < std::numeric_limits<double>::min() || x <= a || x >= b) {
      stop = true;
      return 0.0;
    }
    const double w = half * 0.5 * pi * std::cosh(t) * 4.0 * e / ((1.0 + e) * (1.0 + e));
    if (w == 0.0) {
      stop = true;
      return 0.0;
    }
    const double fx = f(x);
    ++out.evaluations;
    if (!std::isfinite(fx)) {
      finite = false;
      stop = true;
      return 0.0;
    }
    return w * fx;
  };

  // Sum over t = j*h for j in `step`-strided odd/all indices, both directions.
  auto sweep = [&](double h, int first, int stride, double& edge) -> double {
    CompensatedSum s;
    for (int dir : {-1, 1}) {
      double last = 0.0;
      for (int j = first;; j += stride) {
        bool stop = false;
        const double v = term(dir * j * h, stop);
        if (stop) {
          break;
        }
        s.add(v);
        last = v;
      }
      edge = std::max(edge, std::abs(last));
    }
    return s.value();
  };

  double edge = 0.0;
  bool dummy = false;
  CompensatedSum raw;  // sum of w f over all nodes so far (unscaled by h)
  raw.add(term(0.0, dummy));
  raw.add(sweep(1.0, 1, 1, edge));
  out.edge_term = edge;
  double h = 1.0;
  double prev = h * raw.value();
  out.value = prev;
  for (int level = 1; level <= opts.max_level; ++level) {
    h *= 0.5;
    double unused = 0.0;
    raw.add(sweep(h, 1, 2, unused));
    const double cur = h * raw.value();
    out.value = cur;
    out.levels = level;
    out.error_estimate = std::abs(cur - prev);
    prev = cur;
    if (!finite) {
      break;
    }
    if (level >= 3 &&
        out.error_estimate <= std::max(opts.abs_tol, opts.rel_tol * std::abs(cur))) {
      break;
    }
  }
  out.converged = finite && std::isfinite(out.value) &&
                  out.error_estimate <= std::max(opts.abs_tol, opts.rel_tol * std::abs(out.value)) &&
                  out.edge_term <= opts.edge_tol;
  return out;
}

std::vector<std::size_t> log_grid(std::size_t n, int per_decade) {
  std::vector<std::size_t> grid;
  if (n == 0) {
    return grid;
  }
  const double top = std::log10(static_cast<double>(n));
  const int steps = static_cast<int>(std::ceil(top * per_decade));
  for (int i = 0; i <= steps; ++i) {
    const double v = std::pow(10.0, static_cast<double>(i) / per_decade);
    const auto k = std::min<std::size_t>(n, static_cast<std::size_t>(std::llround(v)));
    if (grid.empty() || k > grid.back()) {
      grid.push_back(k);
    }
  }
  if (grid.back() != n) {
    grid.push_back(n);
  }
  return grid;
}

std::string shortest(double v) {
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  if (std::isnan(v)) {
    return "nan";
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, res.ptr};
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min(hw, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      body(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          body(i);
        } catch (...) {
          if (!failed.exchange(true)) {
            failure = std::current_exception();
          }
        }
      }
    });
  }
  pool.clear();
  if (failure) {
    std::rethrow_exception(failure);
  }
}

}  // namespace hardy::numerics

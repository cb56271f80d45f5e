#include "hardy/means.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hardy/errors.hpp"
#include "hardy/numerics.hpp"

namespace hardy {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Below this |p| the power mean is evaluated by its geometric-mean branch.
constexpr double kZeroParam = 1e-12;

// Inputs reduced to the entries with positive weight; weights normalised.
struct Prepared {
  std::vector<double> x;
  std::vector<double> w;
  double lo = 0.0;
  double hi = 0.0;
};

Prepared prepare(std::span<const double> x, std::span<const double> lam) {
  if (x.empty()) {
    throw DomainError("mean of an empty vector");
  }
  if (x.size() != lam.size()) {
    throw DomainError("x and lambda lengths differ");
  }
  numerics::CompensatedSum total;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !(x[i] > 0.0)) {
      throw DomainError("mean arguments must be positive and finite");
    }
    if (!std::isfinite(lam[i]) || lam[i] < 0.0) {
      throw DomainError("weights must be nonnegative and finite");
    }
    total.add(lam[i]);
  }
  const double sum = total.value();
  if (!(sum > 0.0)) {
    throw DomainError("weights must have a positive sum");
  }
  Prepared out;
  out.lo = std::numeric_limits<double>::infinity();
  out.hi = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (lam[i] > 0.0) {
      out.x.push_back(x[i]);
      out.w.push_back(lam[i] / sum);
      out.lo = std::min(out.lo, x[i]);
      out.hi = std::max(out.hi, x[i]);
    }
  }
  return out;
}

double clamp_to(const Prepared& in, double y) { return std::clamp(y, in.lo, in.hi); }

// log of sum_i w_i x_i^r, computed as s + log1p(sum_i w_i expm1(r ln x_i - s))
// with s = max_i r ln x_i; accurate for small r and free of overflow.
double log_power_sum(const Prepared& in, double r) {
  double s = -std::numeric_limits<double>::infinity();
  for (double xi : in.x) {
    s = std::max(s, r * std::log(xi));
  }
  numerics::CompensatedSum acc;
  for (std::size_t i = 0; i < in.x.size(); ++i) {
    acc.add(in.w[i] * std::expm1(r * std::log(in.x[i]) - s));
  }
  return s + std::log1p(acc.value());
}

double geometric_mean(const Prepared& in) {
  numerics::CompensatedSum acc;
  for (std::size_t i = 0; i < in.x.size(); ++i) {
    acc.add(in.w[i] * std::log(in.x[i]));
  }
  return std::exp(acc.value());
}

}  // namespace

// ---------------------------------------------------------------- generators

GeneratorFunction log_generator() {
  GeneratorFunction f;
  f.eval = [](double u) { return std::log(u); };
  f.d1 = [](double u) { return 1.0 / u; };
  f.d2 = [](double u) { return -1.0 / (u * u); };
  f.inverse = [](double v) { return std::exp(v); };
  f.declared_concave = true;
  f.declared_sign_property = true;
  f.integrable_reciprocal = true;
  f.family = GeneratorFamily::Log;
  f.name = "log";
  return f;
}

GeneratorFunction power_generator(double p) {
  if (p == 0.0) {
    return log_generator();
  }
  if (!std::isfinite(p)) {
    throw DomainError("power generator needs a finite exponent");
  }
  GeneratorFunction f;
  f.eval = [p](double u) { return std::expm1(p * std::log(u)) / p; };
  f.d1 = [p](double u) { return std::pow(u, p - 1.0); };
  f.d2 = [p](double u) { return (p - 1.0) * std::pow(u, p - 2.0); };
  f.inverse = [p](double v) { return std::exp(std::log1p(p * v) / p); };
  f.declared_concave = p <= 1.0;
  f.declared_sign_property = true;
  f.integrable_reciprocal = p < 1.0;
  f.family = GeneratorFamily::PowerP;
  f.p = p;
  f.name = "pow:" + numerics::shortest(p);
  return f;
}

GeneratorFunction gini_generator(double p, double q) {
  if (!std::isfinite(p) || !std::isfinite(q)) {
    throw DomainError("gini generator needs finite parameters");
  }
  GeneratorFunction f;
  if (p == q) {
    if (p == 0.0) {
      f = log_generator();
    } else {
      f.eval = [p](double u) { return std::pow(u, p) * std::log(u); };
      f.d1 = [p](double u) { return std::pow(u, p - 1.0) * (p * std::log(u) + 1.0); };
      f.d2 = [p](double u) {
        return std::pow(u, p - 2.0) * ((p - 1.0) * (p * std::log(u) + 1.0) + p);
      };
    }
  } else {
    const double d = p - q;
    f.eval = [p, q, d](double u) {
      const double lu = std::log(u);
      return std::exp(q * lu) * std::expm1(d * lu) / d;
    };
    f.d1 = [p, q, d](double u) {
      return (p * std::pow(u, p - 1.0) - q * std::pow(u, q - 1.0)) / d;
    };
    f.d2 = [p, q, d](double u) {
      return (p * (p - 1.0) * std::pow(u, p - 2.0) - q * (q - 1.0) * std::pow(u, q - 2.0)) / d;
    };
  }
  f.inverse = nullptr;
  f.declared_concave = std::min(p, q) <= 0.0 && std::max(p, q) <= 1.0 && 0.0 <= std::max(p, q);
  f.declared_sign_property = true;
  f.integrable_reciprocal = std::max(p, q) < 1.0;
  f.family = GeneratorFamily::GiniPQ;
  f.p = p;
  f.q = q;
  f.name = "gini:" + numerics::shortest(p) + "," + numerics::shortest(q);
  return f;
}

GeneratorFunction pi_generator(double p) {
  if (p == 0.0) {
    auto f = log_generator();
    f.family = GeneratorFamily::Pi;
    return f;
  }
  GeneratorFunction f;
  f.eval = [p](double x) { return std::pow(x, p); };
  f.d1 = [p](double x) { return p * std::pow(x, p - 1.0); };
  f.d2 = [p](double x) { return p * (p - 1.0) * std::pow(x, p - 2.0); };
  f.inverse = [p](double v) { return std::pow(v, 1.0 / p); };
  f.family = GeneratorFamily::Pi;
  f.p = p;
  f.name = "pow:" + numerics::shortest(p);
  return f;
}

GeneratorFunction exp_generator() {
  GeneratorFunction f;
  f.eval = [](double x) { return std::exp(x); };
  f.d1 = f.eval;
  f.d2 = f.eval;
  f.inverse = [](double v) { return std::log(v); };
  f.family = GeneratorFamily::Exp;
  f.name = "exp";
  return f;
}

// ------------------------------------------------------------------- kernels

QuasideviationKernel difference_kernel() {
  return {[](double x, double y) { return x - y; }, [](double) { return -1.0; }, "x-y"};
}

QuasideviationKernel log_ratio_kernel() {
  return {[](double x, double y) { return std::log(x / y); }, [](double x) { return -1.0 / x; },
          "ln(x/y)"};
}

QuasideviationKernel homogeneous_kernel(const GeneratorFunction& f) {
  QuasideviationKernel E;
  E.eval = [g = f.eval](double x, double y) { return g(x / y); };
  if (f.d1) {
    E.d2_diag = [slope = f.d1(1.0)](double x) { return -slope / x; };
  }
  E.name = "f(x/y), f=" + f.name;
  return E;
}

QuasideviationKernel quasiarithmetic_kernel(const GeneratorFunction& g) {
  QuasideviationKernel E;
  E.eval = [h = g.eval](double x, double y) { return h(x) - h(y); };
  if (g.d1) {
    E.d2_diag = [d = g.d1](double x) { return -d(x); };
  }
  E.name = "g(x)-g(y), g=" + g.name;
  return E;
}

// --------------------------------------------------------------------- means

double default_mean_tol(std::span<const double> x) {
  double hi = 0.0;
  for (double v : x) {
    hi = std::max(hi, v);
  }
  return 1e-13 * hi;
}

double power_mean(std::span<const double> x, std::span<const double> lam, double p) {
  const Prepared in = prepare(x, lam);
  if (std::isnan(p)) {
    throw DomainError("power mean exponent is NaN");
  }
  if (p == std::numeric_limits<double>::infinity()) {
    return in.hi;
  }
  if (p == -std::numeric_limits<double>::infinity()) {
    return in.lo;
  }
  if (std::abs(p) < kZeroParam) {
    return clamp_to(in, geometric_mean(in));
  }
  return clamp_to(in, std::exp(log_power_sum(in, p) / p));
}

double gini_mean(std::span<const double> x, std::span<const double> lam, double p, double q) {
  const Prepared in = prepare(x, lam);
  if (!std::isfinite(p) || !std::isfinite(q)) {
    throw DomainError("gini mean parameters must be finite");
  }
  if (std::abs(p - q) < kZeroParam) {
    // exp( sum w x^p ln x / sum w x^p ), with x^p scaled by its maximum.
    double s = -std::numeric_limits<double>::infinity();
    for (double xi : in.x) {
      s = std::max(s, p * std::log(xi));
    }
    numerics::CompensatedSum num;
    numerics::CompensatedSum den;
    for (std::size_t i = 0; i < in.x.size(); ++i) {
      const double lx = std::log(in.x[i]);
      const double u = in.w[i] * std::exp(p * lx - s);
      num.add(u * lx);
      den.add(u);
    }
    return clamp_to(in, std::exp(num.value() / den.value()));
  }
  // With b = min(p, q) and d = |p - q|, ln(sum w x^(b+d) / sum w x^b) is
  // log1p of a v-weighted average of expm1(d ln x), v ~ w x^b. This avoids
  // the cancellation between the two log power sums when p and q are close.
  const double b = std::min(p, q);
  const double d = std::abs(p - q);
  const double c = 0.5 * (std::log(in.lo) + std::log(in.hi));
  const double half_range = 0.5 * (std::log(in.hi) - std::log(in.lo));
  if (d * half_range < 700.0 && std::abs(b) * half_range < 700.0) {
    numerics::CompensatedSum small;
    numerics::CompensatedSum whole;
    numerics::CompensatedSum den;
    for (std::size_t i = 0; i < in.x.size(); ++i) {
      const double l = std::log(in.x[i]) - c;
      const double v = in.w[i] * std::exp(b * l);
      small.add(v * std::expm1(d * l));
      whole.add(v * std::exp(d * l));
      den.add(v);
    }
    // log1p only helps near 0; far from it the plain ratio is better.
    const double s = small.value() / den.value();
    const double log_ratio =
        std::abs(s) < 0.5 ? std::log1p(s) : std::log(whole.value() / den.value());
    return clamp_to(in, std::exp(c + log_ratio / d));
  }
  return clamp_to(in, std::exp((log_power_sum(in, p) - log_power_sum(in, q)) / (p - q)));
}

double quasiarithmetic_mean(std::span<const double> x, std::span<const double> lam,
                            const GeneratorFunction& g) {
  const Prepared in = prepare(x, lam);
  if (in.lo == in.hi) {
    return in.lo;
  }
  if (g.family == GeneratorFamily::Exp && in.hi - in.lo < 700.0) {
    // ln of an average of exponentials, shifted so small results keep
    // their relative accuracy.
    numerics::CompensatedSum shifted;
    for (std::size_t i = 0; i < in.x.size(); ++i) {
      shifted.add(in.w[i] * std::expm1(in.x[i] - in.lo));
    }
    return clamp_to(in, in.lo + std::log1p(shifted.value()));
  }
  numerics::CompensatedSum acc;
  for (std::size_t i = 0; i < in.x.size(); ++i) {
    const double gi = g.eval(in.x[i]);
    if (!std::isfinite(gi)) {
      throw DomainError("generator is not finite at x=" + numerics::shortest(in.x[i]));
    }
    acc.add(in.w[i] * gi);
  }
  const double target = acc.value();
  if (g.inverse) {
    const double y = g.inverse(target);
    if (!std::isfinite(y)) {
      throw InversionError("generator inverse is not finite");
    }
    return clamp_to(in, y);
  }
  auto phi = [&](double y) { return g.eval(y) - target; };
  const double flo = phi(in.lo);
  const double fhi = phi(in.hi);
  if ((flo > 0) == (fhi > 0) && flo != 0.0 && fhi != 0.0) {
    // Rounding can push the average a hair outside [g(lo), g(hi)].
    const double scale = std::max(std::abs(g.eval(in.lo)), std::abs(g.eval(in.hi)));
    if (std::min(std::abs(flo), std::abs(fhi)) <= 1e-12 * scale) {
      return std::abs(flo) < std::abs(fhi) ? in.lo : in.hi;
    }
    throw InversionError("generator inverse could not be bracketed on [min x, max x]");
  }
  const double tol = 1e-15 * in.hi;
  return clamp_to(in, numerics::brent(phi, in.lo, in.hi, flo, fhi, tol).root);
}

double quasideviation_mean(std::span<const double> x, std::span<const double> lam,
                           const QuasideviationKernel& E, double tol) {
  if (!(tol > 0.0)) {
    throw DomainError("tolerance must be positive");
  }
  const Prepared in = prepare(x, lam);
  if (in.lo == in.hi) {
    return in.lo;
  }
  auto phi = [&](double y) {
    numerics::CompensatedSum acc;
    for (std::size_t i = 0; i < in.x.size(); ++i) {
      acc.add(in.w[i] * E.eval(in.x[i], y));
    }
    return acc.value();
  };
  const double flo = phi(in.lo);
  const double fhi = phi(in.hi);
  if (std::isnan(flo) || std::isnan(fhi) || flo < 0.0 || fhi > 0.0) {
    throw BracketError("kernel violates the sign condition at the bracket [min x, max x]");
  }
  const auto r = numerics::brent(phi, in.lo, in.hi, flo, fhi, tol);
  return clamp_to(in, r.root);
}

double homogeneous_devmean(std::span<const double> x, std::span<const double> lam,
                           const GeneratorFunction& f, double tol) {
  return quasideviation_mean(x, lam, homogeneous_kernel(f), tol);
}

double evaluate(const MeanSpec& spec, std::span<const double> x, std::span<const double> lam,
                std::optional<double> tol) {
  const double t = tol.value_or(default_mean_tol(x));
  return std::visit(
      overloaded{
          [&](const mean::Power& m) { return power_mean(x, lam, m.p); },
          [&](const mean::QuasiArithmetic& m) { return quasiarithmetic_mean(x, lam, m.g); },
          [&](const mean::Gini& m) { return gini_mean(x, lam, m.p, m.q); },
          [&](const mean::Deviation& m) { return quasideviation_mean(x, lam, m.E, t); },
          [&](const mean::HomogeneousDeviation& m) {
            return homogeneous_devmean(x, lam, m.f, t);
          },
      },
      spec);
}

std::string describe(const MeanSpec& spec) {
  return std::visit(
      overloaded{
          [](const mean::Power& m) { return "power:p=" + numerics::shortest(m.p); },
          [](const mean::QuasiArithmetic& m) { return "qa:g=" + m.g.name; },
          [](const mean::Gini& m) {
            return "gini:p=" + numerics::shortest(m.p) + ",q=" + numerics::shortest(m.q);
          },
          [](const mean::Deviation& m) { return "deviation:E=" + m.E.name; },
          [](const mean::HomogeneousDeviation& m) { return "devmean:f=" + m.f.name; },
      },
      spec);
}

bool is_homogeneous(const MeanSpec& spec) {
  return std::visit(overloaded{
                        [](const mean::Power&) { return true; },
                        [](const mean::Gini&) { return true; },
                        [](const mean::HomogeneousDeviation&) { return true; },
                        [](const mean::QuasiArithmetic& m) {
                          return m.g.family == GeneratorFamily::Pi ||
                                 m.g.family == GeneratorFamily::Log;
                        },
                        [](const mean::Deviation&) { return false; },
                    },
                    spec);
}

// --------------------------------------------------------------- diagnostics

namespace {
std::vector<double> probe_grid(std::size_t n, double lo, double hi) {
  std::vector<double> g(n);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  return g;
}
}  // namespace

GeneratorDiagnostics validate(const GeneratorFunction& f) {
  GeneratorDiagnostics out;
  const auto grid = probe_grid(64, 1e-3, 1e3);
  if (f.declared_sign_property) {
    if (std::abs(f.eval(1.0)) > 1e-14) {
      out.sign_property_ok = false;
      out.sign_violation_at = 1.0;
    }
    for (double u : grid) {
      const double v = f.eval(u);
      const bool ok = (u < 1.0 && v < 0.0) || (u > 1.0 && v > 0.0) || (u == 1.0);
      if (!ok && out.sign_property_ok) {
        out.sign_property_ok = false;
        out.sign_violation_at = u;
      }
    }
  }
  if (f.declared_concave) {
    for (std::size_t i = 0; i < grid.size() && out.concavity_ok; ++i) {
      for (std::size_t j = i + 1; j < grid.size(); ++j) {
        const double a = grid[i];
        const double b = grid[j];
        const double fa = f.eval(a);
        const double fb = f.eval(b);
        const double mid = f.eval(0.5 * (a + b));
        const double slack = 1e-12 * (std::abs(fa) + std::abs(fb) + 1.0);
        if (mid < 0.5 * (fa + fb) - slack) {
          out.concavity_ok = false;
          out.concavity_violation_at = std::make_pair(a, b);
          break;
        }
      }
    }
  }
  return out;
}

KernelDiagnostics validate(const QuasideviationKernel& E) {
  KernelDiagnostics out;
  const auto grid = probe_grid(16, 1e-2, 1e2);
  for (double x : grid) {
    for (double y : grid) {
      const double v = E.eval(x, y);
      const int s = (v > 0) - (v < 0);
      const int want = (x > y) - (x < y);
      if (s != want) {
        out.sign_ok = false;
      }
    }
  }
  // (b): on a dense y-scan, one step far larger than both neighbours is a jump.
  const auto fine = probe_grid(2048, 1e-2, 1e2);
  for (double x : grid) {
    std::vector<double> d(fine.size() - 1);
    for (std::size_t k = 0; k + 1 < fine.size(); ++k) {
      d[k] = std::abs(E.eval(x, fine[k + 1]) - E.eval(x, fine[k]));
    }
    for (std::size_t k = 1; k + 1 < d.size(); ++k) {
      const double floor = 1e-9 * (1.0 + std::abs(E.eval(x, fine[k])));
      if (d[k] > 50.0 * (d[k - 1] + d[k + 1]) + floor) {
        out.continuity_ok = false;
      }
    }
  }
  // (c): t -> E(y, t) / E(x, t) strictly increasing on (x, y).
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double x = grid[i];
    const double y = grid[i + 1 < grid.size() ? i + 1 : i];
    double prev = -std::numeric_limits<double>::infinity();
    for (int k = 1; k < 16; ++k) {
      const double t = x + (y - x) * k / 16.0;
      const double ratio = E.eval(y, t) / E.eval(x, t);
      if (!(ratio > prev)) {
        out.ratio_monotone_ok = false;
      }
      prev = ratio;
    }
  }
  return out;
}

}  // namespace hardy

#include "hardy/constants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hardy/errors.hpp"
#include "hardy/homogenize.hpp"
#include "hardy/numerics.hpp"

namespace hardy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kTermCap = 1'000'000;
constexpr double kBracketCap = 1e9;

using numerics::shortest;

void check_eta(double eta) {
  if (!(eta >= 0.0 && eta < 1.0)) {
    throw DomainError("eta must lie in [0, 1), got " + shortest(eta));
  }
}

// (1 - eta)^(1 - 1/eta), the r = 0 branch for eta > 0.
double log_branch(double eta) { return std::exp(std::log1p(-eta) * (1.0 - 1.0 / eta)); }

numerics::QuadratureResult integrate(const std::function<double(double)>& g, double a, double b,
                                     double abs_tol, double edge_tol) {
  numerics::TanhSinhOptions opts;
  opts.abs_tol = abs_tol;
  opts.edge_tol = edge_tol;
  return numerics::tanh_sinh(g, a, b, opts);
}

// Quadrature that only has to be accurate enough for a bound: the result is
// accepted unless the endpoint behaviour signals divergence.
bool diverges(const numerics::QuadratureResult& r, double edge_tol) {
  return !std::isfinite(r.value) || r.edge_term > edge_tol;
}

}  // namespace

std::string_view to_string(ConstantMethod m) {
  switch (m) {
    case ConstantMethod::ClosedForm:
      return "ClosedForm";
    case ConstantMethod::RootSolvedIntegral:
      return "RootSolvedIntegral";
    case ConstantMethod::RootSolvedSeries:
      return "RootSolvedSeries";
  }
  return "?";
}

HardyConstantResult HardyConstantResult::infinity(ConstantMethod method, double eta) {
  HardyConstantResult r;
  r.value = kInf;
  r.lo = kInf;
  r.hi = kInf;
  r.method = method;
  r.eta = eta;
  r.infinite = true;
  return r;
}

HardyConstantResult HardyConstantResult::closed(double value, double eta) {
  HardyConstantResult r;
  r.value = value;
  r.lo = value;
  r.hi = value;
  r.eta = eta;
  return r;
}

double classical_C(double p) {
  if (std::isnan(p)) {
    throw DomainError("p is NaN");
  }
  if (p == -kInf) {
    return 1.0;
  }
  if (p >= 1.0) {
    return kInf;
  }
  if (p == 0.0) {
    return std::exp(1.0);
  }
  return std::exp(-std::log1p(-p) / p);
}

double C_of(double r, double eta) {
  if (std::isnan(r) || r >= 1.0) {
    throw DomainError("C(r, eta) needs r < 1, got r=" + shortest(r));
  }
  check_eta(eta);
  if (r == -kInf) {
    return 1.0;
  }
  if (eta == 0.0) {
    return classical_C(r);
  }
  if (r == 0.0) {
    return log_branch(eta);
  }
  // ln(eta / (1 - (1-eta)^(1-r))), written so it stays accurate as r -> 0.
  const double l = std::log1p(-eta);
  const double log_base = -std::log1p(-(1.0 - eta) * std::expm1(-r * l) / eta);
  return std::exp(log_base / r);
}

double gini_constant(double p, double q, double eta) {
  if (!std::isfinite(p) || !std::isfinite(q)) {
    throw DomainError("Gini parameters must be finite");
  }
  check_eta(eta);
  if (!(std::min(p, q) <= 0.0 && std::max(p, q) >= 0.0 && std::max(p, q) < 1.0)) {
    throw DomainError("Gini constant needs min(p,q) <= 0 <= max(p,q) < 1, got p=" + shortest(p) +
                      ", q=" + shortest(q));
  }
  if (p == q) {  // both zero
    return eta == 0.0 ? std::exp(1.0) : log_branch(eta);
  }
  if (eta == 0.0) {
    return std::exp((std::log1p(-q) - std::log1p(-p)) / (p - q));
  }
  const double l = std::log1p(-eta);
  const double a = -std::expm1((1.0 - q) * l);
  const double b = -std::expm1((1.0 - p) * l);
  return std::exp((std::log(a) - std::log(b)) / (p - q));
}

double reciprocal_integral(const GeneratorFunction& f, double c) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw DomainError("upper limit must be positive and finite");
  }
  const auto r = integrate([&f](double x) { return f(1.0 / x); }, 0.0, c, 1e-12, 1e-9);
  if (diverges(r, 1e-9)) {
    throw NotIntegrable(f.name + "(1/x) is not integrable at 0 (edge term " +
                        shortest(r.edge_term) + ")");
  }
  return r.value;
}

SeriesEval F_eval(double x, double q, const GeneratorFunction& f, double tol) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("F(x, q) needs x > 0");
  }
  if (!(q > 0.0 && q < 1.0)) {
    throw DomainError("F(x, q) needs q in (0, 1)");
  }
  if (!(tol > 0.0)) {
    throw DomainError("tolerance must be positive");
  }
  if (f.integrable_reciprocal == false) {
    throw TailBoundFailure(f.name + "(1/x) is declared non-integrable; the series diverges");
  }
  const double lq = std::log(q);
  const double scale = 1.0 / (1.0 - q);
  const double qtol = 0.01 * tol * (1.0 - q);

  auto tail = [&](std::size_t k) {
    const double s = std::exp(static_cast<double>(k) * lq);
    if (!(s > 0.0)) {
      throw TailBoundFailure("q^K underflows before the tail bound closes");
    }
    const auto r = integrate([&](double t) { return f(x / t); }, 0.0, s, qtol, 1e-9);
    if (diverges(r, 1e-9)) {
      throw TailBoundFailure(f.name + "(x/t) is not integrable at t=0 (edge term " +
                             shortest(r.edge_term) + ")");
    }
    // The remainder is nonnegative once x q^-K >= 1. Quadrature error and the
    // mass beyond the outermost nodes are added on top.
    return scale * (std::max(r.value, 0.0) + r.error_estimate + r.edge_term);
  };

  std::size_t k = 1;
  if (x < 1.0) {
    k = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::log(x) / lq)));
  }
  double bound = tail(k);
  while (bound >= tol) {
    k += std::max<std::size_t>(8, k / 2);
    if (k > kTermCap) {
      throw TailBoundFailure("tail bound still " + shortest(bound) + " after " +
                             std::to_string(kTermCap) + " terms");
    }
    bound = tail(k);
  }

  numerics::CompensatedSum sum;
  for (std::size_t j = 0; j < k; ++j) {
    const double lj = static_cast<double>(j) * lq;
    const double term = std::exp(lj) * f(x * std::exp(-lj));
    if (!std::isfinite(term)) {
      throw TailBoundFailure("series term " + std::to_string(j) + " is not finite");
    }
    sum += term;
  }
  return SeriesEval{sum.value(), bound, k};
}

SeriesBounds F_bounds(double x, double q, const GeneratorFunction& f) {
  if (!(x > 0.0) || !(q > 0.0 && q < 1.0)) {
    throw DomainError("F bounds need x > 0 and q in (0, 1)");
  }
  auto g = [&](double t) { return f(x / t); };
  const auto lower = integrate(g, 0.0, 1.0 / q, 1e-13, 1e-9);
  const auto upper = integrate(g, 0.0, 1.0, 1e-13, 1e-9);
  if (diverges(lower, 1e-9) || diverges(upper, 1e-9)) {
    throw NotIntegrable(f.name + "(x/t) is not integrable at t=0");
  }
  return SeriesBounds{q / (1.0 - q) * lower.value, upper.value / (1.0 - q)};
}

double F_root(const GeneratorFunction& f, double q, double tol) {
  auto F = [&](double x) { return F_eval(x, q, f, 1e-15).partial; };
  double hi = 1.0;
  double fhi = F(hi);
  if (!(fhi > 0.0)) {
    throw NoBracket("F(1, q) is not positive");
  }
  double lo = q;
  double flo = F(lo);
  while (flo > 0.0) {
    hi = lo;
    fhi = flo;
    lo *= q;
    if (lo < 1.0 / kBracketCap) {
      throw NoBracket("F(., q) has no sign change above " + shortest(lo));
    }
    flo = F(lo);
  }
  return numerics::brent(F, lo, hi, flo, fhi, tol).root;
}

HardyConstantResult solve_cef(const GeneratorFunction& f, double eta, double tol) {
  check_eta(eta);
  if (!(tol > 0.0)) {
    throw DomainError("tolerance must be positive");
  }
  if (f.integrable_reciprocal == false) {
    throw NotIntegrable(f.name + "(1/x) is declared non-integrable on (0, 1]");
  }
  const bool series = eta > 0.0;
  std::function<double(double)> phi;
  if (series) {
    const double q = 1.0 - eta;
    phi = [&f, q](double c) { return F_eval(1.0 / c, q, f, 1e-15).partial; };
  } else {
    phi = [&f](double c) { return reciprocal_integral(f, c); };
  }

  double lo = 1.0;
  double flo = phi(lo);
  if (!(flo > 0.0)) {
    throw NoBracket("characteristic function is not positive at c=1");
  }
  double hi = 2.0;
  double fhi = phi(hi);
  while (fhi > 0.0) {
    lo = hi;
    flo = fhi;
    hi *= 2.0;
    if (hi > kBracketCap) {
      throw NoBracket("no sign change below c=" + shortest(kBracketCap));
    }
    fhi = phi(hi);
  }
  const auto root = numerics::brent(phi, lo, hi, flo, fhi, tol);

  HardyConstantResult out;
  out.value = root.root;
  out.method = series ? ConstantMethod::RootSolvedSeries : ConstantMethod::RootSolvedIntegral;
  out.residual = root.residual;
  // Brent returns an endpoint of its final bracket; report a bracket that
  // strictly contains the iterate and still contains the root.
  const double half = std::max(root.hi - root.lo,
                               std::nextafter(root.root, kInf) - root.root);
  out.lo = root.root - half;
  out.hi = root.root + half;
  out.eta = eta;
  return out;
}

double chi_f(const GeneratorFunction& f, double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("chi_f needs x > 0");
  }
  const double h = 1e-5 * x;
  double d1 = 0.0;
  double d2 = 0.0;
  if (f.d1) {
    d1 = f.d1(x);
    d2 = f.d2 ? f.d2(x) : (f.d1(x + h) - f.d1(x - h)) / (2.0 * h);
  } else if (f.eval) {
    const double fp = f.eval(x + h);
    const double f0 = f.eval(x);
    const double fm = f.eval(x - h);
    d1 = (fp - fm) / (2.0 * h);
    d2 = f.d2 ? f.d2(x) : (fp - 2.0 * f0 + fm) / (h * h);
  } else {
    throw DerivativeUnavailable("no derivative and no function to difference");
  }
  if (!std::isfinite(d1) || !std::isfinite(d2)) {
    throw DerivativeUnavailable("derivatives of " + f.name + " are not finite at x=" +
                                shortest(x));
  }
  if (d1 == 0.0) {
    throw ZeroDerivative(f.name + "' vanishes at x=" + shortest(x));
  }
  return x * d2 / d1 + 1.0;
}

double detect_chi_limit(const GeneratorFunction& f, const LimitProbe& probe) {
  std::vector<double> chi;
  for (int j = probe.first_exponent; j <= probe.last_exponent; ++j) {
    chi.push_back(chi_f(f, std::pow(10.0, -j)));
    const auto n = chi.size();
    if (n >= 3) {
      const double lo = std::min({chi[n - 3], chi[n - 2], chi[n - 1]});
      const double hi = std::max({chi[n - 3], chi[n - 2], chi[n - 1]});
      if (hi - lo <= probe.agreement) {
        return chi[n - 1];
      }
    }
  }
  throw LimitNotDetected("chi_f has not settled by x=1e-" + std::to_string(probe.last_exponent) +
                         (chi.empty() ? std::string{} : ", last value " + shortest(chi.back())));
}

HardyConstantResult qa_constant(const GeneratorFunction& f, double eta, const LimitProbe& probe) {
  check_eta(eta);
  const double p = detect_chi_limit(f, probe);
  if (p >= 1.0) {
    throw PGeqOne("limit of chi_f at 0+ is " + shortest(p) + " >= 1");
  }
  return HardyConstantResult::closed(C_of(p, eta), eta);
}

HardyConstantResult deviation_constant(const QuasideviationKernel& E, double eta,
                                       bool integrable_reciprocal, double tol) {
  const auto f = limit_generator(E, integrable_reciprocal, tol);
  return solve_cef(f, eta, std::max(tol, 1e-12));
}

namespace {

ConstantMethod root_method(double eta) {
  return eta > 0.0 ? ConstantMethod::RootSolvedSeries : ConstantMethod::RootSolvedIntegral;
}

bool gini_region(double p, double q) { return std::min(p, q) <= 0.0 && std::max(p, q) >= 0.0; }

HardyConstantResult closed_for(const MeanSpec& spec, double eta) {
  check_eta(eta);
  if (const auto* m = std::get_if<mean::Power>(&spec)) {
    if (m->p >= 1.0) {
      return HardyConstantResult::infinity(ConstantMethod::ClosedForm, eta);
    }
    return HardyConstantResult::closed(C_of(m->p, eta), eta);
  }
  if (const auto* m = std::get_if<mean::Gini>(&spec)) {
    if (!gini_region(m->p, m->q)) {
      throw DomainError("no closed form for Gini means outside min(p,q) <= 0 <= max(p,q)");
    }
    if (std::max(m->p, m->q) >= 1.0) {
      return HardyConstantResult::infinity(ConstantMethod::ClosedForm, eta);
    }
    return HardyConstantResult::closed(gini_constant(m->p, m->q, eta), eta);
  }
  if (const auto* m = std::get_if<mean::QuasiArithmetic>(&spec)) {
    try {
      return qa_constant(m->g, eta);
    } catch (const PGeqOne&) {
      return HardyConstantResult::infinity(ConstantMethod::ClosedForm, eta);
    }
  }
  if (const auto* m = std::get_if<mean::HomogeneousDeviation>(&spec)) {
    const auto& f = m->f;
    switch (f.family) {
      case GeneratorFamily::PowerP:
        return closed_for(mean::Power{f.p}, eta);
      case GeneratorFamily::Log:
        return closed_for(mean::Power{0.0}, eta);
      case GeneratorFamily::GiniPQ:
        return closed_for(mean::Gini{f.p, f.q}, eta);
      default:
        break;
    }
    throw DomainError("no closed form for deviation mean with f=" + f.name);
  }
  throw DomainError("no closed form for " + describe(spec));
}

HardyConstantResult root_for(const MeanSpec& spec, double eta, double tol) {
  check_eta(eta);
  GeneratorFunction f;
  if (const auto* m = std::get_if<mean::Power>(&spec)) {
    if (!std::isfinite(m->p)) {
      throw DomainError("no generator for the power mean with p=" + shortest(m->p));
    }
    f = power_generator(m->p);
  } else if (const auto* m = std::get_if<mean::Gini>(&spec)) {
    if (!gini_region(m->p, m->q)) {
      throw DomainError("Gini generator is not concave outside min(p,q) <= 0 <= max(p,q)");
    }
    f = gini_generator(m->p, m->q);
  } else if (const auto* m = std::get_if<mean::QuasiArithmetic>(&spec)) {
    const double p = detect_chi_limit(m->g);
    if (p >= 1.0) {
      return HardyConstantResult::infinity(root_method(eta), eta);
    }
    f = power_generator(p);
  } else if (const auto* m = std::get_if<mean::HomogeneousDeviation>(&spec)) {
    f = m->f;
  } else {
    const auto& E = std::get<mean::Deviation>(spec).E;
    const auto h = limit_generator(E, true);
    return solve_cef(h, eta, tol);
  }
  if (f.integrable_reciprocal == false) {
    return HardyConstantResult::infinity(root_method(eta), eta);
  }
  return solve_cef(f, eta, tol);
}

}  // namespace

HardyConstantResult constant_for(const MeanSpec& spec, double eta, ConstantRoute route,
                                 double tol) {
  switch (route) {
    case ConstantRoute::Closed:
      return closed_for(spec, eta);
    case ConstantRoute::Root:
      return root_for(spec, eta, tol);
    case ConstantRoute::Auto:
      if (std::holds_alternative<mean::Power>(spec) || std::holds_alternative<mean::Gini>(spec) ||
          std::holds_alternative<mean::QuasiArithmetic>(spec)) {
        return closed_for(spec, eta);
      }
      return root_for(spec, eta, tol);
  }
  throw DomainError("unknown route");
}

}  // namespace hardy

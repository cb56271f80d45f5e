#include "hardy/homogenize.hpp"

#include <algorithm>
#include <cmath>

#include "hardy/errors.hpp"
#include "hardy/numerics.hpp"

namespace hardy {

namespace {

constexpr int kLadderSteps = 20;
constexpr double kLadderBase = 4.0;

struct LadderFit {
  std::vector<double> extrapolants;
  double value = 0.0;
  double spread = 0.0;
  bool converged = false;
};

// One Richardson step on values sampled at t_k = 4^-k, then the first triple
// of successive extrapolants agreeing within tolerance(value).
template <class Tol>
LadderFit fit_ladder(const std::vector<double>& v, Tol tolerance) {
  LadderFit out;
  for (std::size_t k = 0; k + 1 < v.size(); ++k) {
    out.extrapolants.push_back((kLadderBase * v[k + 1] - v[k]) / (kLadderBase - 1.0));
  }
  const auto& r = out.extrapolants;
  for (std::size_t k = 0; k + 2 < r.size(); ++k) {
    const double lo = std::min({r[k], r[k + 1], r[k + 2]});
    const double hi = std::max({r[k], r[k + 1], r[k + 2]});
    out.spread = hi - lo;
    out.value = r[k + 2];
    if (std::isfinite(out.spread) && out.spread <= tolerance(out.value)) {
      out.converged = true;
      return out;
    }
  }
  return out;
}

std::vector<double> probe_grid() {
  std::vector<double> g(64);
  const double a = std::log(1e-3);
  const double b = std::log(1e3);
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = std::exp(a + (b - a) * static_cast<double>(i) / 63.0);
  }
  return g;
}

}  // namespace

HomogenizationEstimate homogenize(const MeanSpec& spec, std::span<const double> x,
                                  std::span<const double> lam, double tol) {
  if (!(tol > 0.0)) {
    throw DomainError("tolerance must be positive");
  }
  HomogenizationEstimate out;
  std::vector<double> scaled(x.begin(), x.end());
  std::vector<double> values;
  double t = 1.0;
  for (int k = 1; k <= kLadderSteps; ++k) {
    t /= kLadderBase;
    for (std::size_t i = 0; i < x.size(); ++i) {
      scaled[i] = t * x[i];
    }
    const double v = evaluate(spec, scaled, lam) / t;
    out.t_ladder.emplace_back(t, v);
    values.push_back(v);
  }
  auto fit = fit_ladder(values, [tol](double) { return tol; });
  out.extrapolants = std::move(fit.extrapolants);
  out.value = fit.value;
  out.spread = fit.spread;
  out.converged = fit.converged;
  return out;
}

double diagonal_fd_step(double y) { return 1e-6 * y; }

double diagonal_derivative(const QuasideviationKernel& E, double y) {
  if (E.d2_diag) {
    return E.d2_diag(y);
  }
  const double h = diagonal_fd_step(y);
  return (E.eval(y, y + h) - E.eval(y, y - h)) / (2.0 * h);
}

QuasideviationKernel normalize_kernel(const QuasideviationKernel& E) {
  const auto grid = probe_grid();
  for (double y : grid) {
    const double d = diagonal_derivative(E, y);
    if (!(d < 0.0) || !std::isfinite(d)) {
      throw NotNormalizable("d2E(y, y) = " + numerics::shortest(d) +
                            " is not strictly negative at y=" + numerics::shortest(y));
    }
  }
  QuasideviationKernel out;
  out.eval = [E](double x, double y) { return E.eval(x, y) / -diagonal_derivative(E, y); };
  out.name = "(" + E.name + ")*";
  for (double y : grid) {
    const double d = diagonal_derivative(out, y);
    if (std::abs(d + 1.0) > 1e-6) {
      throw NotNormalizable("normalized kernel has diagonal derivative " + numerics::shortest(d) +
                            " at y=" + numerics::shortest(y));
    }
  }
  return out;
}

double h_of_kernel(const QuasideviationKernel& normalized, double x, double tol) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("h_E needs a positive argument");
  }
  std::vector<double> values;
  double t = 1.0;
  for (int k = 1; k <= kLadderSteps; ++k) {
    t /= kLadderBase;
    values.push_back(normalized.eval(x * t, t) / t);
  }
  const auto fit =
      fit_ladder(values, [tol](double v) { return tol * std::max(1.0, std::abs(v)); });
  if (!fit.converged) {
    throw NoConvergence("t^-1 E*(x t, t) does not settle at x=" + numerics::shortest(x) +
                        " (spread " + numerics::shortest(fit.spread) + ")");
  }
  return fit.value;
}

GeneratorFunction limit_generator(const QuasideviationKernel& E, bool integrable_reciprocal,
                                  double tol) {
  auto normalized = normalize_kernel(E);
  GeneratorFunction f;
  f.eval = [normalized, tol](double u) {
    if (u == 1.0) {
      return 0.0;
    }
    return h_of_kernel(normalized, u, tol);
  };
  f.declared_concave = true;
  f.declared_sign_property = true;
  f.integrable_reciprocal = integrable_reciprocal;
  f.family = GeneratorFamily::Custom;
  f.name = "h[" + E.name + "]";
  return f;
}

}  // namespace hardy

#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "hardy/means.hpp"

namespace hardy {

enum class ConstantMethod { ClosedForm, RootSolvedIntegral, RootSolvedSeries };

std::string_view to_string(ConstantMethod m);

/// A sharp lambda-Hardy constant. `infinite` is the explicit marker for
/// means that are not lambda-Hardy; `value` is then +inf.
struct HardyConstantResult {
  double value = 0.0;
  ConstantMethod method = ConstantMethod::ClosedForm;
  double residual = 0.0;  // characteristic function at the root
  double lo = 0.0;        // bracket around the root (root-solved only)
  double hi = 0.0;
  double eta = 0.0;
  bool infinite = false;

  static HardyConstantResult infinity(ConstantMethod method, double eta);
  static HardyConstantResult closed(double value, double eta);
};

/// Truncated series with a rigorous bound on the (nonnegative) remainder:
/// the true sum lies in [partial - tail_bound, partial + tail_bound].
struct SeriesEval {
  double partial = 0.0;
  double tail_bound = 0.0;
  std::size_t terms_used = 0;
};

/// Two-sided integral bounds on F(x, q):
///   q/(1-q) int_0^{1/q} f(x/t) dt <= F(x, q) <= 1/(1-q) int_0^1 f(x/t) dt.
struct SeriesBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Classical unweighted constant: 1 at -inf, (1-p)^(-1/p), e at 0, +inf on [1, inf].
double classical_C(double p);

/// C(r, eta) for r < 1 (r = -inf allowed, giving 1) and eta in [0, 1).
double C_of(double r, double eta);

/// Sharp constant of the Gini mean G_{p,q}; needs min(p,q) <= 0 <= max(p,q) < 1.
double gini_constant(double p, double q, double eta);

/// int_0^c f(1/x) dx by tanh-sinh. Throws NotIntegrable when the quadrature
/// detects a non-integrable endpoint singularity.
double reciprocal_integral(const GeneratorFunction& f, double c);

/// F(x, q) = sum_{k>=0} q^k f(q^-k x), truncated once the integral bound on
/// the remainder, 1/(1-q) int_0^{q^K} f(x/t) dt, drops below tol.
/// Throws TailBoundFailure when the bound cannot be closed within 10^6 terms
/// or the remainder integral diverges.
SeriesEval F_eval(double x, double q, const GeneratorFunction& f, double tol);

SeriesBounds F_bounds(double x, double q, const GeneratorFunction& f);

/// The unique zero x(q) in (0, 1) of F(., q).
double F_root(const GeneratorFunction& f, double q, double tol = 1e-14);

/// Root c of int_0^c f(1/x) dx = 0 (eta = 0) or F(1/c, 1 - eta) = 0
/// (eta > 0), bracketed from (1, 2) by doubling.
HardyConstantResult solve_cef(const GeneratorFunction& f, double eta, double tol = 1e-12);

/// x f''(x) / f'(x) + 1, with central differences (step 1e-5 x) for missing
/// derivatives.
double chi_f(const GeneratorFunction& f, double x);

struct LimitProbe {
  int first_exponent = 1;   // chi evaluated at 10^-j
  int last_exponent = 12;
  double agreement = 1e-6;  // three successive values within this
};

/// lim_{x->0+} chi_f(x) by the probe ladder; throws LimitNotDetected.
double detect_chi_limit(const GeneratorFunction& f, const LimitProbe& probe = {});

/// C(p, eta) with p the detected limit of chi_f at 0+. Throws PGeqOne when p >= 1.
HardyConstantResult qa_constant(const GeneratorFunction& f, double eta,
                                const LimitProbe& probe = {});

/// Constant of a general quasideviation mean via f = h_E.
HardyConstantResult deviation_constant(const QuasideviationKernel& E, double eta,
                                       bool integrable_reciprocal, double tol = 1e-10);

enum class ConstantRoute { Closed, Root, Auto };

/// Family dispatch. Closed: power/gini closed forms, qa via qa_constant,
/// devmean with a named f via its closed form. Root: solve_cef on the
/// generator of the family. Auto: closed for power/gini/qa, root otherwise.
/// Means that are not Hardy yield the infinite marker.
HardyConstantResult constant_for(const MeanSpec& spec, double eta, ConstantRoute route,
                                 double tol = 1e-12);

}  // namespace hardy

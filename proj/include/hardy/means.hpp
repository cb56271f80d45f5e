#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace hardy {

enum class GeneratorFamily { PowerP, Log, GiniPQ, Pi, Exp, Custom };

/// A real function on (0, inf) used either as f in E(x, y) = f(x / y) or as a
/// quasiarithmetic generator. Derivatives and inverse are optional.
struct GeneratorFunction {
  std::function<double(double)> eval;
  std::function<double(double)> d1;
  std::function<double(double)> d2;
  std::function<double(double)> inverse;
  bool declared_concave = false;
  bool declared_sign_property = false;  // sign(f(x)) = sign(x - 1)
  /// Whether x -> f(1/x) is integrable over (0, 1]; empty when unknown.
  std::optional<bool> integrable_reciprocal;
  GeneratorFamily family = GeneratorFamily::Custom;
  double p = 0.0;
  double q = 0.0;
  std::string name;

  double operator()(double x) const { return eval(x); }
};

/// f_p(u) = (u^p - 1) / p, with f_0 = ln.
GeneratorFunction power_generator(double p);
GeneratorFunction log_generator();
/// f(u) = (u^p - u^q) / (p - q), with u^p ln u when p == q.
GeneratorFunction gini_generator(double p, double q);
/// pi_p(x) = x^p (p != 0), pi_0 = ln; the quasiarithmetic generator of P_p.
GeneratorFunction pi_generator(double p);
GeneratorFunction exp_generator();

/// E(x, y) on (0, inf)^2 with sign(E(x, y)) = sign(x - y).
struct QuasideviationKernel {
  std::function<double(double, double)> eval;
  /// x -> d/dy E(x, y) at y = x, when known analytically.
  std::function<double(double)> d2_diag;
  std::string name;

  double operator()(double x, double y) const { return eval(x, y); }
};

QuasideviationKernel difference_kernel();  // x - y
QuasideviationKernel log_ratio_kernel();   // ln(x / y)
/// E(x, y) = f(x / y); diagonal derivative -f'(1) / y when f' is known.
QuasideviationKernel homogeneous_kernel(const GeneratorFunction& f);
/// E(x, y) = g(x) - g(y).
QuasideviationKernel quasiarithmetic_kernel(const GeneratorFunction& g);

namespace mean {
struct Power {
  double p;  // may be +-inf
};
struct QuasiArithmetic {
  GeneratorFunction g;
};
struct Gini {
  double p;
  double q;
};
struct Deviation {
  QuasideviationKernel E;
};
struct HomogeneousDeviation {
  GeneratorFunction f;
};
}  // namespace mean

using MeanSpec = std::variant<mean::Power, mean::QuasiArithmetic, mean::Gini, mean::Deviation,
                              mean::HomogeneousDeviation>;

/// Short human-readable description, e.g. `power:p=0.5`.
std::string describe(const MeanSpec& spec);
/// True for families that are homogeneous of degree 1.
bool is_homogeneous(const MeanSpec& spec);

/// Absolute root tolerance used when none is given: 1e-13 * max x.
double default_mean_tol(std::span<const double> x);

double power_mean(std::span<const double> x, std::span<const double> lam, double p);
double quasiarithmetic_mean(std::span<const double> x, std::span<const double> lam,
                            const GeneratorFunction& g);
double gini_mean(std::span<const double> x, std::span<const double> lam, double p, double q);
/// Root y of sum lam_i E(x_i, y) = 0, bracketed in [min x, max x] to width <= tol.
double quasideviation_mean(std::span<const double> x, std::span<const double> lam,
                           const QuasideviationKernel& E, double tol);
double homogeneous_devmean(std::span<const double> x, std::span<const double> lam,
                           const GeneratorFunction& f, double tol);

/// Dispatches on the spec; root-solved families use `tol` (or the default).
double evaluate(const MeanSpec& spec, std::span<const double> x, std::span<const double> lam,
                std::optional<double> tol = std::nullopt);

struct GeneratorDiagnostics {
  bool sign_property_ok = true;
  bool concavity_ok = true;
  std::optional<double> sign_violation_at;
  std::optional<std::pair<double, double>> concavity_violation_at;
};

/// Spot-checks declared sign and concavity properties on a 64-point
/// log-uniform grid over [1e-3, 1e3].
GeneratorDiagnostics validate(const GeneratorFunction& f);

struct KernelDiagnostics {
  bool sign_ok = true;           // (a)
  bool continuity_ok = true;     // (b), sampled
  bool ratio_monotone_ok = true; // (c), sampled
};

/// Sampled diagnosis of the three quasideviation conditions.
KernelDiagnostics validate(const QuasideviationKernel& E);

}  // namespace hardy

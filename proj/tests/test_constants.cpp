#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "hardy/constants.hpp"
#include "hardy/errors.hpp"
#include "support.hpp"

using namespace hardy;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Independent spelling of the four branches of C(r, eta).
double oracle_C(double r, double eta) {
  if (eta == 0.0) {
    return r == 0.0 ? std::numbers::e : std::pow(1.0 - r, -1.0 / r);
  }
  if (r == 0.0) {
    return std::pow(1.0 - eta, 1.0 - 1.0 / eta);
  }
  return std::pow(eta / (1.0 - std::pow(1.0 - eta, 1.0 - r)), 1.0 / r);
}

double oracle_gini(double p, double q, double eta) {
  if (p == q) {
    // Only p = q = 0 is admissible.
    return eta == 0.0 ? std::numbers::e : std::pow(1.0 - eta, 1.0 - 1.0 / eta);
  }
  if (eta == 0.0) {
    return std::pow((1.0 - q) / (1.0 - p), 1.0 / (p - q));
  }
  return std::pow((1.0 - std::pow(1.0 - eta, 1.0 - q)) / (1.0 - std::pow(1.0 - eta, 1.0 - p)),
                  1.0 / (p - q));
}

const std::vector<double> kEtaGrid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

GeneratorFunction sqrt_generator() { return power_generator(0.5); }

}  // namespace

TEST_CASE("classical constant table") {
  CHECK(classical_C(-kInf) == 1.0);
  CHECK(classical_C(0.0) == doctest::Approx(std::numbers::e).epsilon(1e-15));
  CHECK(classical_C(0.5) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(classical_C(-1.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(classical_C(1.0) == kInf);
  CHECK(classical_C(3.0) == kInf);
  CHECK(classical_C(kInf) == kInf);
}

TEST_CASE("C(r, eta) examples and branches") {
  CHECK(C_of(0.5, 0.0) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(C_of(0.0, 0.5) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(C_of(0.0, 0.0) == doctest::Approx(std::numbers::e).epsilon(1e-15));
  const double half = 0.5 / (1.0 - 1.0 / std::sqrt(2.0));
  CHECK(C_of(0.5, 0.5) == doctest::Approx(half * half).epsilon(1e-14));
  CHECK(C_of(-kInf, 0.3) == 1.0);
  for (double r : {-2.0, -1.0, -0.5, -0.1, 0.0, 0.3, 0.5, 0.9}) {
    for (double eta : kEtaGrid) {
      CHECK(support::rel_err(C_of(r, eta), oracle_C(r, eta)) < 1e-12);
    }
  }
}

TEST_CASE("C(r, eta) rejects parameters outside its domain") {
  CHECK_THROWS_AS(C_of(1.0, 0.0), DomainError);
  CHECK_THROWS_AS(C_of(0.5, 1.0), DomainError);
  CHECK_THROWS_AS(C_of(0.5, -0.1), DomainError);
  CHECK_THROWS_AS(C_of(std::nan(""), 0.1), DomainError);
}

TEST_CASE("C(r, eta) increases strictly in r") {
  for (double eta : kEtaGrid) {
    double prev = 1.0;
    for (double r = -5.0; r < 0.95; r += 0.05) {
      const double c = C_of(r, eta);
      CHECK(c > prev);
      prev = c;
    }
  }
}

TEST_CASE("C(r, eta) is continuous at eta = 0") {
  for (double r : {-2.0, -1.0, -0.5, -0.1, 0.0, 0.3, 0.5, 0.9}) {
    CHECK(std::abs(C_of(r, 1e-6) - C_of(r, 0.0)) <= 1e-4);
  }
}

TEST_CASE("C(r, eta) joins smoothly across r = 0") {
  // A branch jump would show up in the second difference at r = 0.
  for (double eta : kEtaGrid) {
    for (double d : {1e-6, -1e-6}) {
      const double second = C_of(2.0 * d, eta) - 2.0 * C_of(d, eta) + C_of(0.0, eta);
      CHECK(std::abs(second) <= 1e-9);
    }
  }
}

TEST_CASE("Gini constant examples and symmetry") {
  CHECK(gini_constant(0.0, 0.0, 0.0) == doctest::Approx(std::numbers::e).epsilon(1e-15));
  CHECK(gini_constant(0.5, -0.5, 0.0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(gini_constant(0.0, -1.0, 0.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(gini_constant(0.0, -1.0, 0.0) == doctest::Approx(C_of(-1.0, 0.0)).epsilon(1e-14));
  for (double eta : kEtaGrid) {
    for (auto [p, q] : std::vector<std::pair<double, double>>{
             {0.5, -0.5}, {0.9, -2.0}, {0.3, 0.0}, {0.0, -1.5}, {0.0, 0.0}}) {
      CHECK(support::rel_err(gini_constant(p, q, eta), gini_constant(q, p, eta)) < 1e-14);
      CHECK(support::rel_err(gini_constant(p, q, eta), oracle_gini(p, q, eta)) < 1e-12);
    }
    for (double p : {-1.0, 0.0, 0.4}) {
      CHECK(support::rel_err(gini_constant(p, 0.0, eta), C_of(p, eta)) < 1e-14);
    }
  }
  CHECK_THROWS_AS(gini_constant(0.5, 0.2, 0.0), DomainError);
  CHECK_THROWS_AS(gini_constant(1.0, -1.0, 0.0), DomainError);
  CHECK_THROWS_AS(gini_constant(-0.5, -0.2, 0.0), DomainError);
}

TEST_CASE("series F: examples") {
  const auto ln = log_generator();
  const auto at_one = F_eval(1.0, 0.5, ln, 1e-13);
  CHECK(std::abs(at_one.partial - 2.0 * std::numbers::ln2) <= 1e-12);
  CHECK(at_one.tail_bound <= 1e-13);
  CHECK(at_one.terms_used > 10);

  CHECK(std::abs(F_eval(0.5, 0.5, ln, 1e-14).partial) <= 1e-13);
  CHECK(std::abs(F_root(ln, 0.5) - 0.5) <= 1e-10);

  GeneratorFunction shifted;
  shifted.eval = [](double u) { return u - 1.0; };
  shifted.integrable_reciprocal = true;  // a false claim the quadrature must catch
  CHECK_THROWS_AS(F_eval(1.0, 0.5, shifted, 1e-10), TailBoundFailure);
  CHECK_THROWS_AS(F_eval(1.0, 0.5, power_generator(1.0), 1e-10), TailBoundFailure);
}

TEST_CASE("series F for ln matches its closed form") {
  // F(x, q) = ln x / (1 - q) - ln q * q / (1 - q)^2.
  support::Gen gen(31);
  const auto ln = log_generator();
  for (int trial = 0; trial < 200; ++trial) {
    const double x = gen.uniform(1e-3, 1.0);
    const double q = gen.uniform(0.05, 0.95);
    const double expected = std::log(x) / (1.0 - q) - std::log(q) * q / ((1.0 - q) * (1.0 - q));
    const auto got = F_eval(x, q, ln, 1e-12);
    CHECK(std::abs(got.partial - expected) <= got.tail_bound + 1e-11 * (1.0 + std::abs(expected)));
  }
}

TEST_CASE("series F lies between its integral bounds") {
  support::Gen gen(32);
  for (const auto& f : {log_generator(), sqrt_generator(), gini_generator(0.5, -0.5)}) {
    for (int trial = 0; trial < 50; ++trial) {
      const double x = gen.uniform(1e-3, 1.0);
      const double q = gen.uniform(0.05, 0.95);
      const auto s = F_eval(x, q, f, 1e-12);
      const auto b = F_bounds(x, q, f);
      CHECK(b.lower <= b.upper);
      CHECK(s.partial >= b.lower - s.tail_bound - 1e-9);
      CHECK(s.partial <= b.upper + s.tail_bound + 1e-9);
    }
  }
}

TEST_CASE("sampled sums sit between the integral comparisons") {
  // phi(x) = f(1/(c x)) with closed-form integrals for f = ln and f = 2(sqrt u - 1).
  auto sum_from_one = [](auto phi, double q) {
    double s = 0.0;
    double qk = q;
    for (int k = 1; k < 4000 && qk > 0.0; ++k, qk *= q) {
      s += qk * phi(qk);
    }
    return s;
  };
  support::Gen gen(33);
  for (int trial = 0; trial < 200; ++trial) {
    const double c = gen.uniform(1.0, 8.0);
    const double q = gen.uniform(0.05, 0.9);
    {
      auto phi = [c](double x) { return -std::log(c * x); };
      auto integral = [c](double a) { return a * (1.0 - std::log(c * a)); };
      const double s = sum_from_one(phi, q);
      CHECK(q / (1.0 - q) * integral(1.0) <= s + 1e-12);
      CHECK(s <= integral(q) / (1.0 - q) + 1e-12);
    }
    {
      auto phi = [c](double x) { return 2.0 * (1.0 / std::sqrt(c * x) - 1.0); };
      auto integral = [c](double a) { return 2.0 * (2.0 * std::sqrt(a / c) - a); };
      const double s = sum_from_one(phi, q);
      CHECK(q / (1.0 - q) * integral(1.0) <= s + 1e-9);
      CHECK(s <= integral(q) / (1.0 - q) + 1e-9);
    }
  }
}

TEST_CASE("reciprocal integral") {
  // int_0^c -ln x dx = c (1 - ln c)
  for (double c : {0.5, 1.0, 2.0, std::numbers::e, 5.0}) {
    CHECK(std::abs(reciprocal_integral(log_generator(), c) - c * (1.0 - std::log(c))) < 1e-12);
  }
  CHECK_THROWS_AS(reciprocal_integral(power_generator(1.0), 2.0), NotIntegrable);
}

TEST_CASE("root-solved constant examples") {
  const auto e = solve_cef(log_generator(), 0.0);
  CHECK(std::abs(e.value - std::numbers::e) < 1e-10);
  CHECK(e.method == ConstantMethod::RootSolvedIntegral);
  CHECK(e.lo < e.value);
  CHECK(e.value < e.hi);

  CHECK(std::abs(solve_cef(sqrt_generator(), 0.0).value - 4.0) < 1e-10);

  const auto g = solve_cef(gini_generator(0.5, -0.5), 0.5);
  CHECK(g.method == ConstantMethod::RootSolvedSeries);
  CHECK(std::abs(g.value - gini_constant(0.5, -0.5, 0.5)) < 1e-10);
}

TEST_CASE("root solver agrees with the power closed form") {
  for (double p : {-2.0, -1.0, -0.5, -0.1, 0.0, 0.3, 0.5, 0.9}) {
    for (double eta : kEtaGrid) {
      const auto r = solve_cef(power_generator(p), eta);
      INFO("p=" << p << " eta=" << eta);
      CHECK(std::abs(r.value - C_of(p, eta)) <= 1e-8);
      CHECK(r.value > 1.0);
      CHECK(r.lo < r.value);
      CHECK(r.value < r.hi);
      CHECK(r.eta == eta);
    }
  }
}

TEST_CASE("root solver agrees with the Gini closed form") {
  for (auto [p, q] : std::vector<std::pair<double, double>>{
           {-1.0, 0.5}, {-0.5, 0.5}, {-2.0, 0.9}, {-0.5, 0.0}, {-0.3, 0.2}}) {
    for (double eta : {0.0, 0.3, 0.5, 0.8}) {
      INFO("p=" << p << " q=" << q << " eta=" << eta);
      CHECK(std::abs(solve_cef(gini_generator(p, q), eta).value - gini_constant(p, q, eta)) <=
            1e-8);
    }
  }
}

TEST_CASE("root solver errors") {
  auto f = log_generator();
  f.integrable_reciprocal = false;
  CHECK_THROWS_AS(solve_cef(f, 0.0), NotIntegrable);

  GeneratorFunction negative;  // never changes sign, so no constant exists
  negative.eval = [](double u) { return -1.0 / (1.0 + u); };
  negative.integrable_reciprocal = true;
  CHECK_THROWS_AS(solve_cef(negative, 0.0), NoBracket);
  CHECK_THROWS_AS(solve_cef(log_generator(), 1.0), DomainError);
}

TEST_CASE("chi examples") {
  GeneratorFunction square;
  square.eval = [](double u) { return u * u; };
  // Second differences at step 1e-5 x carry roundoff of order 1e-6.
  for (double x : {0.01, 1.0, 3.0, 100.0}) {
    CHECK(std::abs(chi_f(square, x) - 2.0) < 1e-5);
    CHECK(std::abs(chi_f(log_generator(), x)) < 1e-12);
  }
  CHECK(std::abs(chi_f(pi_generator(0.5), 7.0) - 0.5) < 1e-12);

  GeneratorFunction root;  // numeric derivatives only
  root.eval = [](double u) { return std::sqrt(u); };
  CHECK(std::abs(chi_f(root, 7.0) - 0.5) < 1e-5);

  GeneratorFunction flat;
  flat.eval = [](double) { return 3.0; };
  CHECK_THROWS_AS(chi_f(flat, 2.0), ZeroDerivative);

  GeneratorFunction empty;
  CHECK_THROWS_AS(chi_f(empty, 2.0), DerivativeUnavailable);
}

TEST_CASE("quasiarithmetic constant examples") {
  GeneratorFunction cube_root;
  cube_root.eval = [](double u) { return std::cbrt(u); };
  cube_root.d1 = [](double u) { return std::cbrt(u) / (3.0 * u); };
  cube_root.d2 = [](double u) { return -2.0 * std::cbrt(u) / (9.0 * u * u); };
  const auto c = qa_constant(cube_root, 0.0);
  CHECK(c.method == ConstantMethod::ClosedForm);
  CHECK(std::abs(c.value - 3.375) < 1e-9);
  CHECK(std::abs(qa_constant(log_generator(), 0.5).value - 2.0) < 1e-12);

  CHECK_THROWS_AS(qa_constant(pi_generator(1.5), 0.0), PGeqOne);

  GeneratorFunction wobble;  // chi_f oscillates near 0
  wobble.eval = [](double u) { return u * (2.0 + std::sin(std::log(u))); };
  CHECK_THROWS_AS(qa_constant(wobble, 0.0), LimitNotDetected);
}

TEST_CASE("quasiarithmetic constant for exp-like generators near 0") {
  // chi of x + x^2 tends to 1 at 0+.
  GeneratorFunction g;
  g.eval = [](double u) { return u + u * u; };
  g.d1 = [](double u) { return 1.0 + 2.0 * u; };
  g.d2 = [](double) { return 2.0; };
  CHECK(std::abs(detect_chi_limit(g) - 1.0) < 1e-6);
}

TEST_CASE("deviation constant through the limit function") {
  const auto r = deviation_constant(log_ratio_kernel(), 0.5, true);
  CHECK(std::abs(r.value - 2.0) < 1e-8);
  QuasideviationKernel sq;
  sq.eval = [](double x, double y) { return x * x - y * y; };
  // h = (x^2 - 1) / 2, so h(1/x) is not integrable at 0.
  CHECK_THROWS_AS(deviation_constant(sq, 0.0, false), NotIntegrable);
}

TEST_CASE("family dispatch: closed and root routes agree") {
  const std::vector<MeanSpec> specs{mean::Power{0.5},
                                    mean::Power{-1.0},
                                    mean::Power{0.0},
                                    mean::Gini{0.5, -0.5},
                                    mean::Gini{0.0, 0.0},
                                    mean::QuasiArithmetic{pi_generator(0.5)},
                                    mean::HomogeneousDeviation{log_generator()},
                                    mean::HomogeneousDeviation{power_generator(-0.5)},
                                    mean::HomogeneousDeviation{gini_generator(0.3, -0.6)}};
  for (const auto& spec : specs) {
    for (double eta : {0.0, 0.25, 0.5, 0.75}) {
      INFO(describe(spec) << " eta=" << eta);
      const auto closed = constant_for(spec, eta, ConstantRoute::Closed);
      const auto root = constant_for(spec, eta, ConstantRoute::Root);
      CHECK(closed.method == ConstantMethod::ClosedForm);
      CHECK(root.method != ConstantMethod::ClosedForm);
      CHECK(std::abs(closed.value - root.value) <= 1e-8);
    }
  }
}

TEST_CASE("family dispatch marks non-Hardy means as infinite") {
  for (auto route : {ConstantRoute::Closed, ConstantRoute::Root, ConstantRoute::Auto}) {
    const auto r = constant_for(mean::Power{1.0}, 0.0, route);
    CHECK(r.infinite);
    CHECK(r.value == kInf);
  }
  CHECK(constant_for(mean::Power{kInf}, 0.3, ConstantRoute::Auto).infinite);
  CHECK(constant_for(mean::Power{-kInf}, 0.3, ConstantRoute::Auto).value == 1.0);
  CHECK(constant_for(mean::QuasiArithmetic{pi_generator(2.0)}, 0.0, ConstantRoute::Closed).infinite);
}

TEST_CASE("every finite constant exceeds 1") {
  for (double p : {-10.0, -1.0, 0.0, 0.5, 0.99}) {
    for (double eta : kEtaGrid) {
      CHECK(C_of(p, eta) > 1.0);
    }
  }
}

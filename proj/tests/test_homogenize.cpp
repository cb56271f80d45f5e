#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "hardy/errors.hpp"
#include "hardy/homogenize.hpp"
#include "support.hpp"

using namespace hardy;
using support::rel_err;

namespace {

QuasideviationKernel square_difference_kernel() {
  QuasideviationKernel E;
  E.eval = [](double x, double y) { return x * x - y * y; };
  E.name = "x^2-y^2";
  return E;
}

// x - y plus a quadratic term that disappears under t -> 0 rescaling.
QuasideviationKernel perturbed_difference() {
  QuasideviationKernel E;
  E.eval = [](double x, double y) {
    const double d = x - y;
    return d + d * d * std::min({x, y, 1.0});
  };
  E.name = "perturbed";
  return E;
}

}  // namespace

TEST_CASE("homogenize examples") {
  const std::vector<double> x14{1.0, 4.0};
  const std::vector<double> one1{1.0, 1.0};

  const auto p = homogenize(mean::Power{0.5}, x14, one1, 1e-10);
  CHECK(p.converged);
  CHECK(p.value == doctest::Approx(2.25).epsilon(1e-12));
  CHECK(p.spread <= 1e-10);
  CHECK(p.t_ladder.size() >= 3);
  CHECK(p.t_ladder.front().first == 0.25);

  const auto g = homogenize(mean::Gini{0.5, -0.5}, x14, one1, 1e-10);
  CHECK(g.converged);
  CHECK(g.value == doctest::Approx(2.0).epsilon(1e-12));

  const auto d = homogenize(mean::Deviation{perturbed_difference()}, std::vector<double>{1.0, 2.0},
                            one1, 1e-8);
  CHECK(d.converged);
  CHECK(std::abs(d.value - 1.5) < 1e-7);
}

TEST_CASE("the ladder of a non-homogeneous mean really moves") {
  // Plain M(1, 2) for the perturbed kernel differs from its homogenization.
  const std::vector<double> x{1.0, 2.0};
  const std::vector<double> lam{1.0, 1.0};
  const double m = evaluate(mean::Deviation{perturbed_difference()}, x, lam, 1e-14);
  CHECK(std::abs(m - 1.5) > 1e-3);
  const auto d = homogenize(mean::Deviation{perturbed_difference()}, x, lam, 1e-8);
  CHECK(std::abs(d.t_ladder.front().second - 1.5) > std::abs(d.t_ladder.back().second - 1.5));
}

TEST_CASE("homogeneous means are their own homogenization") {
  support::Gen gen(11);
  const std::vector<MeanSpec> specs{mean::Power{0.5}, mean::Power{-1.0}, mean::Gini{0.3, -0.8},
                                    mean::HomogeneousDeviation{power_generator(0.5)}};
  for (const auto& spec : specs) {
    for (int trial = 0; trial < 50; ++trial) {
      const auto s = gen.sample(6, 0.1, 10.0);
      const auto h = homogenize(spec, s.x, s.lam, 1e-9);
      CHECK(h.converged);
      CHECK(std::abs(h.value - evaluate(spec, s.x, s.lam, 1e-14)) <= 1e-9 * h.value);
    }
  }
}

TEST_CASE("a concave mean lies below its homogenization") {
  // Quasiarithmetic mean generated by the concave function ln(1 + u);
  // the generator is concave so the mean is Jensen concave.
  GeneratorFunction g;
  g.eval = [](double u) { return std::log1p(u); };
  g.inverse = [](double v) { return std::expm1(v); };
  const MeanSpec spec = mean::QuasiArithmetic{g};
  support::Gen gen(12);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = gen.sample(6, 0.1, 10.0);
    const double tol = 1e-8;
    const auto h = homogenize(spec, s.x, s.lam, tol);
    CHECK(h.converged);
    CHECK(evaluate(spec, s.x, s.lam) <= h.value + tol);
    // The limit of ln(1 + t u) / t is u, so the homogenization is arithmetic.
    CHECK(std::abs(h.value - power_mean(s.x, s.lam, 1.0)) < 1e-6 * h.value);
  }
}

TEST_CASE("a ladder that never settles is reported, not thrown") {
  // M(t x) / t oscillates with log t, so liminf and limsup differ.
  GeneratorFunction g;
  g.eval = [](double u) { return u * (2.0 + std::sin(std::log(u))); };
  const MeanSpec spec = mean::QuasiArithmetic{g};
  const auto h = homogenize(spec, std::vector<double>{1.0, 9.0}, std::vector<double>{1.0, 1.0},
                            1e-12);
  CHECK_FALSE(h.converged);
  CHECK(h.t_ladder.size() == 20);
}

TEST_CASE("normalization examples") {
  const auto d = normalize_kernel(difference_kernel());
  const auto sq = normalize_kernel(square_difference_kernel());
  const auto lg = normalize_kernel(log_ratio_kernel());
  support::Gen gen(13);
  for (int trial = 0; trial < 1000; ++trial) {
    const double x = gen.log_uniform(1e-2, 1e2);
    const double y = gen.log_uniform(1e-2, 1e2);
    CHECK(std::abs(d(x, y) - (x - y)) <= 1e-12 * std::max(x, y));
    CHECK(rel_err(sq(x, y), (x * x - y * y) / (2.0 * y)) < 1e-8);
    CHECK(rel_err(lg(x, y), y * std::log(x / y)) < 1e-12);
  }
}

TEST_CASE("normalized kernels have unit negative slope on the diagonal") {
  for (const auto& E : {difference_kernel(), square_difference_kernel(), log_ratio_kernel(),
                        perturbed_difference()}) {
    const auto n = normalize_kernel(E);
    for (double y : {1e-2, 0.3, 1.0, 7.0, 1e2}) {
      CHECK(std::abs(diagonal_derivative(n, y) + 1.0) < 1e-6);
    }
  }
}

TEST_CASE("normalizing twice changes nothing") {
  for (const auto& E : {difference_kernel(), square_difference_kernel(), log_ratio_kernel(),
                        perturbed_difference()}) {
    const auto once = normalize_kernel(E);
    const auto twice = normalize_kernel(once);
    for (double x : {1e-2, 0.2, 1.0, 3.0, 50.0}) {
      for (double y : {1e-2, 0.5, 1.0, 4.0, 1e2}) {
        CHECK(std::abs(once(x, y) - twice(x, y)) <= 1e-8 * std::max(1.0, std::abs(once(x, y))));
      }
    }
  }
}

TEST_CASE("kernels increasing in y are not normalizable") {
  QuasideviationKernel up;
  up.eval = [](double x, double y) { return x - y + 2.0 * (y - 1.0) * (y - 1.0) * (y - 1.0); };
  CHECK_THROWS_AS(normalize_kernel(up), NotNormalizable);
}

TEST_CASE("finite-difference step scales with y") {
  CHECK(diagonal_fd_step(1.0) == 1e-6);
  CHECK(diagonal_fd_step(1e-3) == doctest::Approx(1e-9));
  QuasideviationKernel numeric;  // x^2 - y^2 without an analytic derivative
  numeric.eval = [](double x, double y) { return x * x - y * y; };
  for (double y : {1e-3, 1.0, 1e3}) {
    CHECK(rel_err(diagonal_derivative(numeric, y), -2.0 * y) < 1e-8);
  }
}

TEST_CASE("limit function examples") {
  const auto lg = normalize_kernel(log_ratio_kernel());
  CHECK(std::abs(h_of_kernel(lg, std::numbers::e, 1e-12) - 1.0) < 1e-10);
  const auto d = normalize_kernel(difference_kernel());
  CHECK(std::abs(h_of_kernel(d, 1.0, 1e-12)) < 1e-12);
  CHECK(std::abs(h_of_kernel(d, 3.0, 1e-12) - 2.0) < 1e-12);
}

TEST_CASE("limit function of f(x/y) y is f") {
  const auto f = power_generator(0.5);
  QuasideviationKernel E;
  E.eval = [f](double x, double y) { return f(x / y) * y; };
  for (double x : {0.05, 0.4, 1.0, 2.5, 30.0}) {
    CHECK(std::abs(h_of_kernel(E, x, 1e-12) - f(x)) < 1e-10 * std::max(1.0, std::abs(f(x))));
  }
}

TEST_CASE("limit functions carry the sign of x - 1") {
  for (const auto& E : {difference_kernel(), square_difference_kernel(), log_ratio_kernel(),
                        perturbed_difference()}) {
    const auto n = normalize_kernel(E);
    for (double x : {0.1, 0.5, 1.0, 2.0, 10.0}) {
      const double h = h_of_kernel(n, x, 1e-10);
      if (x == 1.0) {
        CHECK(std::abs(h) < 1e-9);
      } else {
        CHECK((h > 0) == (x > 1.0));
      }
    }
  }
}

TEST_CASE("limit function of the square-difference kernel is (x^2 - 1) / 2") {
  const auto n = normalize_kernel(square_difference_kernel());
  for (double x : {0.1, 0.5, 2.0, 10.0}) {
    CHECK(rel_err(h_of_kernel(n, x, 1e-10), (x * x - 1.0) / 2.0) < 1e-7);
  }
}

TEST_CASE("limit generator wraps h pointwise") {
  const auto g = limit_generator(log_ratio_kernel(), true);
  CHECK(g.integrable_reciprocal == true);
  CHECK(std::abs(g(std::numbers::e) - 1.0) < 1e-9);
  CHECK(std::abs(g(0.25) - std::log(0.25)) < 1e-9);
}

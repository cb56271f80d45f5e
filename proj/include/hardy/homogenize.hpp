#pragma once

#include <span>
#include <utility>
#include <vector>

#include "hardy/means.hpp"

namespace hardy {

/// Estimate of lim_{t->0+} M(t x, lambda) / t from a geometric ladder.
struct HomogenizationEstimate {
  double value = 0.0;
  std::vector<std::pair<double, double>> t_ladder;  // (t, M(t x, lambda) / t)
  std::vector<double> extrapolants;                 // one Richardson step
  bool converged = false;
  double spread = 0.0;  // max - min over the accepted triple
};

/// Ladder t_k = 4^-k (k = 1..20), Richardson extrapolation (4 v_{k+1} - v_k) / 3,
/// accepted at the first three successive extrapolants agreeing within tol.
/// A ladder that never settles is returned with converged = false; the
/// lower and upper homogenizations may then differ.
HomogenizationEstimate homogenize(const MeanSpec& spec, std::span<const double> x,
                                  std::span<const double> lam, double tol);

/// Central-difference step used for d/dy E(x, y) at y = x.
double diagonal_fd_step(double y);

/// x -> d/dy E(x, y)|_{y=x}, analytic when the kernel provides it.
double diagonal_derivative(const QuasideviationKernel& E, double y);

/// E*(x, y) = E(x, y) / (-d2E(y, y)). Throws NotNormalizable when the diagonal
/// derivative is not strictly negative on the probe grid; the returned
/// kernel's diagonal derivative is spot-checked to be -1 within 1e-6.
QuasideviationKernel normalize_kernel(const QuasideviationKernel& E);

/// h_E(x) = lim_{t->0+} E*(x t, t) / t for a normalized kernel, by the same
/// ladder as homogenize. Throws NoConvergence.
double h_of_kernel(const QuasideviationKernel& normalized, double x, double tol);

/// h_E as a generator function (evaluated pointwise through the ladder),
/// for use with the Hardy-constant solvers. The caller declares
/// integrability of x -> h_E(1/x) on (0, 1].
GeneratorFunction limit_generator(const QuasideviationKernel& E, bool integrable_reciprocal,
                                  double tol = 1e-10);

}  // namespace hardy

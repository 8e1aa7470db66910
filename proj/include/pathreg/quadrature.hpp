#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace pathreg::quad {

/// Nodes and weights of a rule on [-1, 1].
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule with `points` nodes.
const Rule& gauss_legendre(std::size_t points);

/// Gauss-Jacobi rule for the weight (1-x)^alpha (1+x)^beta on [-1, 1],
/// computed by Golub-Welsch. Requires alpha, beta > -1.
Rule gauss_jacobi(std::size_t points, double alpha, double beta);

/// Integral of v^a (v + d)^b over v in [0, m], with a > -1, d >= 0, m >= 0.
///
/// The v^a endpoint singularity is absorbed by a Gauss-Jacobi panel on
/// [0, min(d, m)]; the remainder is covered by Gauss-Legendre panels that
/// grow geometrically away from the near singularity of (v + d)^b at -d.
/// Nonnegative integer b is expanded binomially and integrated exactly.
double power_pair_integral(double a, double b, double m, double d);

/// Integral of f over [lo, hi] with Gauss-Legendre panels graded
/// geometrically towards each point in `singular` (integrable endpoint or
/// interior singularities, kinks).
double graded_integral(const std::function<double(double)>& f, double lo, double hi,
                       std::span<const double> singular);

}  // namespace pathreg::quad

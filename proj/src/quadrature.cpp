#include "pathreg/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "pathreg/errors.hpp"

namespace pathreg::quad {

namespace {

constexpr std::size_t kPanelPoints = 16;

double binomial(double n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r *= (n - k + i) / i;
  return r;
}

// Integral of f over [lo, hi] with a single Gauss-Legendre panel.
template <class F>
double gl_panel(const F& f, double lo, double hi) {
  const Rule& rule = gauss_legendre(kPanelPoints);
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return half * sum;
}

}  // namespace

Rule gauss_jacobi(std::size_t points, double alpha, double beta) {
  if (points == 0) throw DomainError("gauss_jacobi: need at least one node");
  if (!(alpha > -1.0) || !(beta > -1.0)) throw DomainError("gauss_jacobi: exponents must exceed -1");

  const double ab = alpha + beta;
  Eigen::VectorXd diag(points);
  Eigen::VectorXd sub(points > 1 ? points - 1 : 1);
  for (std::size_t k = 0; k < points; ++k) {
    const double n = static_cast<double>(k);
    const double s = 2.0 * n + ab;
    if (k == 0) {
      diag[0] = (beta - alpha) / (ab + 2.0);
    } else {
      diag[k] = (beta * beta - alpha * alpha) / (s * (s + 2.0));
    }
    if (k + 1 < points) {
      const double m = n + 1.0;
      const double t = 2.0 * m + ab;
      const double b = 4.0 * m * (m + alpha) * (m + beta) * (m + ab) / (t * t * (t + 1.0) * (t - 1.0));
      sub[k] = std::sqrt(b);
    }
  }

  Rule rule;
  rule.nodes.resize(points);
  rule.weights.resize(points);
  const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(alpha + 1.0) + std::lgamma(beta + 1.0) -
                              std::lgamma(ab + 2.0));
  if (points == 1) {
    rule.nodes[0] = diag[0];
    rule.weights[0] = mu0;
    return rule;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw NumericalError("gauss_jacobi: eigensolver failed");
  for (std::size_t i = 0; i < points; ++i) {
    rule.nodes[i] = solver.eigenvalues()[static_cast<Eigen::Index>(i)];
    const double v0 = solver.eigenvectors()(0, static_cast<Eigen::Index>(i));
    rule.weights[i] = mu0 * v0 * v0;
  }
  return rule;
}

const Rule& gauss_legendre(std::size_t points) {
  static std::mutex mutex;
  static std::map<std::size_t, Rule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(points);
  if (it == cache.end()) it = cache.emplace(points, gauss_jacobi(points, 0.0, 0.0)).first;
  return it->second;
}

namespace {

const Rule& cached_jacobi_left(double beta) {
  static std::mutex mutex;
  static std::map<double, Rule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(beta);
  if (it == cache.end()) it = cache.emplace(beta, gauss_jacobi(kPanelPoints, 0.0, beta)).first;
  return it->second;
}

}  // namespace

double power_pair_integral(double a, double b, double m, double d) {
  if (!(a > -1.0)) throw DomainError("power_pair_integral: exponent a must exceed -1");
  if (m < 0.0 || d < 0.0) throw DomainError("power_pair_integral: negative range or offset");
  if (m == 0.0) return 0.0;
  if (d == 0.0) {
    if (!(a + b > -1.0)) throw DomainError("power_pair_integral: divergent integral at d = 0");
    return std::pow(m, a + b + 1.0) / (a + b + 1.0);
  }

  // (v + d)^b with b a small nonnegative integer: expand binomially.
  if (b >= 0.0 && b <= 12.0 && b == std::floor(b)) {
    const int bi = static_cast<int>(b);
    double sum = 0.0;
    for (int k = 0; k <= bi; ++k) {
      sum += binomial(b, k) * std::pow(d, b - k) * std::pow(m, a + k + 1.0) / (a + k + 1.0);
    }
    return sum;
  }

  // Gauss-Jacobi panel on [0, L] with weight v^a.
  const double first = std::min(d, m);
  const Rule& rule = cached_jacobi_left(a);
  const double half = 0.5 * first;
  const double scale = std::pow(half, a + 1.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double v = half * (1.0 + rule.nodes[i]);
    sum += rule.weights[i] * std::pow(v + d, b);
  }
  sum *= scale;

  // Panels [x, 4x] beyond d; both singularities stay at relative distance >= 1.
  double lo = first;
  while (lo < m) {
    const double hi = std::min(4.0 * lo, m);
    sum += gl_panel([a, b, d](double v) { return std::pow(v, a) * std::pow(v + d, b); }, lo, hi);
    lo = hi;
  }
  return sum;
}

double graded_integral(const std::function<double(double)>& f, double lo, double hi,
                       std::span<const double> singular) {
  if (!(hi > lo)) return 0.0;
  std::vector<double> cuts{lo, hi};
  for (double s : singular) {
    if (s > lo && s < hi) cuts.push_back(s);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  auto is_singular = [&](double x) {
    return std::any_of(singular.begin(), singular.end(), [x](double s) { return s == x; });
  };

  constexpr double kRatio = 0.25;
  constexpr double kFloor = 1e-15;
  double total = 0.0;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double a = cuts[c];
    const double b = cuts[c + 1];
    const bool left = is_singular(a);
    const bool right = is_singular(b);
    if (!left && !right) {
      total += gl_panel(f, a, b);
      continue;
    }
    // Grade towards the singular end(s), splitting at the midpoint if both are.
    auto grade = [&](double from, double to) {
      // `from` is the singular end; panels shrink geometrically towards it.
      const double length = std::abs(to - from);
      const double dir = to > from ? 1.0 : -1.0;
      double outer = length;
      double sum = 0.0;
      while (outer > kFloor * std::max(1.0, std::abs(from))) {
        const double inner = outer * kRatio;
        const double x0 = from + dir * inner;
        const double x1 = from + dir * outer;
        sum += gl_panel(f, std::min(x0, x1), std::max(x0, x1));
        outer = inner;
      }
      return sum;
    };
    if (left && right) {
      const double mid = 0.5 * (a + b);
      total += grade(a, mid) + grade(b, mid);
    } else if (left) {
      total += grade(a, b);
    } else {
      total += grade(b, a);
    }
  }
  return total;
}

}  // namespace pathreg::quad

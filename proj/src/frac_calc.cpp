#include "pathreg/frac_calc.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "pathreg/errors.hpp"
#include "pathreg/quadrature.hpp"

namespace pathreg {

namespace {

// F_i = scale * (head[i] f_0 + first[i] f_1 + sum_{2<=j<i} body[i-j] f_j + f_i) for i >= 2,
// F_1 = scale * (head[1] f_0 + first[1] f_1).
// Cells past the first interpolate f linearly; for mu < 1 the first cell uses
// f_0 + (f_1 - f_0) (s/h)^{1-mu}, which is exact for the leading term of a fractional derivative.
struct StageWeights {
  double scale;
  std::vector<double> head;
  std::vector<double> first;
  std::vector<double> body;
};

StageWeights stage_weights(std::size_t n, double h, double mu) {
  StageWeights w;
  w.scale = std::pow(h, mu) / std::tgamma(mu + 2.0);
  w.head.assign(n + 1, 0.0);
  w.first.assign(n + 1, 0.0);
  w.body.assign(n + 1, 0.0);
  const double e = mu + 1.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double x = static_cast<double>(i);
    w.head[i] = std::pow(x - 1.0, e) - (x - mu - 1.0) * std::pow(x, mu);
    w.body[i] = std::pow(x + 1.0, e) - 2.0 * std::pow(x, e) + std::pow(x - 1.0, e);
    w.first[i] = (i == 1) ? 1.0 : w.body[i - 1];
  }
  if (mu >= 1.0) return w;

  const double nu = 1.0 - mu;
  const double norm = mu * (mu + 1.0);
  const quad::Rule rule = quad::gauss_jacobi(24, 0.0, nu);
  for (std::size_t i = 1; i <= n; ++i) {
    const double x = static_cast<double>(i);
    // Integrals over the first cell (in units of h) of (i - s)^{mu-1} times 1, s and s^nu.
    const double ones = (std::pow(x, mu) - std::pow(x - 1.0, mu)) / mu;
    const double linear = x * ones - (std::pow(x, e) - std::pow(x - 1.0, e)) / e;
    double power = 0.0;
    if (i == 1) {
      power = std::exp(std::lgamma(nu + 1.0) + std::lgamma(mu) - std::lgamma(nu + mu + 1.0));
    } else {
      // s = (1 + y)/2 maps the Jacobi weight (1 + y)^nu onto s^nu up to 2^{-nu-1}.
      for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const double s = 0.5 * (1.0 + rule.nodes[k]);
        power += rule.weights[k] * std::pow(x - s, mu - 1.0);
      }
      power *= std::pow(2.0, -nu - 1.0);
    }
    w.head[i] += norm * ((ones - power) - (ones - linear));
    w.first[i] += norm * (power - linear);
  }
  return w;
}

std::vector<double> apply_stage(const std::vector<double>& f, double h, double mu) {
  const std::size_t n = f.size() - 1;
  const StageWeights w = stage_weights(n, h, mu);
  std::vector<double> out(n + 1, 0.0);
  for (std::size_t i = 1; i <= n; ++i) {
    double sum = w.head[i] * f[0] + w.first[i] * f[1];
    if (i >= 2) {
      for (std::size_t j = 2; j < i; ++j) sum += w.body[i - j] * f[j];
      sum += f[i];
    }
    out[i] = w.scale * sum;
  }
  return out;
}

// Coefficients c with f_0 = sum_k c_k f_{k+1}, from a local model through t_1..t_K.
std::vector<double> extrapolation_rule(double mu) {
  const double nu = 1.0 - mu;
  if (nu < 0.05) return {2.0, -1.0};
  // Model a + b t^nu + c t through t = 1, 2, 3 (units of h); f_0 = a.
  Eigen::Matrix3d v;
  for (int r = 0; r < 3; ++r) {
    const double t = r + 1.0;
    v(r, 0) = 1.0;
    v(r, 1) = std::pow(t, nu);
    v(r, 2) = t;
  }
  const Eigen::Vector3d row = v.transpose().partialPivLu().solve(Eigen::Vector3d(1.0, 0.0, 0.0));
  return {row[0], row[1], row[2]};
}

// Solves apply_stage(f) = F for f.
std::vector<double> invert_stage(const std::vector<double>& F, double h, double mu, std::optional<double> f0) {
  const std::size_t n = F.size() - 1;
  const StageWeights w = stage_weights(n, h, mu);
  std::vector<double> f(n + 1, 0.0);
  auto coeff = [&](std::size_t i, std::size_t j) {
    if (j == 0) return w.head[i];
    if (j == 1) return w.first[i];
    if (j == i) return 1.0;
    return j < i ? w.body[i - j] : 0.0;
  };
  std::size_t start = 1;
  if (f0) {
    f[0] = *f0;
  } else {
    const std::vector<double> c = extrapolation_rule(mu);
    const std::size_t k = c.size();
    if (n < k) throw NumericalError("frac_derivative: grid too coarse to fix f(t_0)");
    Eigen::MatrixXd a(k, k);
    Eigen::VectorXd b(k);
    for (std::size_t i = 1; i <= k; ++i) {
      b[i - 1] = F[i] / w.scale;
      for (std::size_t j = 1; j <= k; ++j) a(i - 1, j - 1) = coeff(i, j) + coeff(i, 0) * c[j - 1];
    }
    const auto lu = a.fullPivLu();
    if (!lu.isInvertible()) throw NumericalError("frac_derivative: singular leading system");
    const Eigen::VectorXd head = lu.solve(b);
    for (std::size_t j = 1; j <= k; ++j) {
      f[j] = head[j - 1];
      f[0] += c[j - 1] * head[j - 1];
    }
    start = k + 1;
  }
  for (std::size_t i = start; i <= n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < i; ++j) sum += coeff(i, j) * f[j];
    f[i] = (F[i] / w.scale - sum) / coeff(i, i);
  }
  return f;
}

void check_order(double order) {
  if (!(std::isfinite(order) && order > 0.0)) throw DomainError("fractional order must be positive and finite");
}

// Integer orders are repeated trapezoid steps; other orders are equal steps of at most 1/2,
// which keeps the discrete inverse well conditioned.
std::vector<double> stages(double order) {
  const double whole = std::round(order);
  if (whole >= 1.0 && order == whole) return std::vector<double>(static_cast<std::size_t>(whole), 1.0);
  const double count = std::ceil(order / 0.5);
  return std::vector<double>(static_cast<std::size_t>(count), order / count);
}

}  // namespace

SamplePath frac_integral(const SamplePath& f, double order) {
  check_order(order);
  const double h = f.grid.spacing();
  std::vector<double> v = f.values;
  for (double mu : stages(order)) v = apply_stage(v, h, mu);
  return SamplePath(f.grid, std::move(v));
}

SamplePath frac_derivative(const SamplePath& F, double order, std::optional<double> f0) {
  check_order(order);
  const double h = F.grid.spacing();
  const std::vector<double> steps = stages(order);
  std::vector<double> v = F.values;
  v[0] = 0.0;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const bool last = k + 1 == steps.size();
    v = invert_stage(v, h, steps[k], last ? f0 : std::optional<double>(0.0));
  }
  for (double x : v) {
    if (!std::isfinite(x)) throw NumericalError("frac_derivative: non-finite result");
  }
  return SamplePath(F.grid, std::move(v));
}

double semigroup_check(const SamplePath& f, double a, double b) {
  const SamplePath iterated = frac_integral(frac_integral(f, a), b);
  const SamplePath direct = frac_integral(f, a + b);
  double worst = 0.0;
  for (std::size_t i = 0; i < direct.values.size(); ++i) {
    worst = std::max(worst, std::abs(iterated.values[i] - direct.values[i]));
  }
  return worst;
}

}  // namespace pathreg

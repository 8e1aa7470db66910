#include <cmath>
#include <numbers>

#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "pathreg/detail/spectral_sums.hpp"
#include "pathreg/errors.hpp"
#include "pathreg/spectral.hpp"

namespace pathreg {

namespace {

// Phi(-z) / phi(z) for z >= 0.
double upper_mills(double z) {
  if (z < 5.0) return 0.5 * std::erfc(z / std::numbers::sqrt2) / std::exp(-0.5 * z * z) * std::sqrt(2.0 * std::numbers::pi);
  double frac = z;
  for (int k = 80; k >= 1; --k) frac = z + k / frac;
  return 1.0 / frac;
}

double log_std_normal_pdf(double w) { return -0.5 * w * w - 0.5 * std::log(2.0 * std::numbers::pi); }

// Solves K'(s) = x for s.
double saddle(const EigenSpectrum& spectrum, double x, double mean) {
  boost::math::tools::eps_tolerance<double> tol(50);
  std::uintmax_t iters = 200;
  if (x < mean) {
    auto f = [&](double t) { return std::log(detail::cumulant_sums(spectrum, -std::exp(t), false).d1 / x); };
    double lo = -40.0;
    double hi = 0.0;
    double f_lo = f(lo);
    double f_hi = f(hi);
    while (f_hi > 0.0) {
      hi += 4.0;
      if (hi > 700.0) throw NumericalError("l2_smallball: saddlepoint not bracketed");
      f_hi = f(hi);
    }
    if (!(f_lo > 0.0)) throw NumericalError("l2_smallball: saddlepoint not bracketed");
    const auto root = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi, tol, iters);
    return -std::exp(0.5 * (root.first + root.second));
  }
  const double top = 1.0 / (2.0 * spectrum.lambdas.front());
  auto s_of = [&](double v) { return -top * std::expm1(-v); };
  auto f = [&](double v) { return std::log(detail::cumulant_sums(spectrum, s_of(v), false).d1 / x); };
  double lo = 1e-12;
  double hi = 1.0;
  double f_lo = f(lo);
  double f_hi = f(hi);
  while (f_hi < 0.0) {
    hi *= 2.0;
    if (hi > 700.0) throw NumericalError("l2_smallball: saddlepoint not bracketed");
    f_hi = f(hi);
  }
  if (!(f_lo < 0.0)) throw NumericalError("l2_smallball: saddlepoint not bracketed");
  const auto root = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi, tol, iters);
  return s_of(0.5 * (root.first + root.second));
}

// P(sum l_k xi_k^2 <= x) = 1/2 - (1/pi) int_0^inf sin(theta(u)) / (u rho(u)) du (Imhof inversion).
// Eigenvalues with l u_max <= 0.1 enter through power sums of a Taylor expansion in u.
// Returns NaN when the integrand decays too slowly (few eigenvalues).
double inversion_cdf(const EigenSpectrum& spectrum, double x) {
  const double total = spectrum.total();
  const double width = std::numbers::pi / (0.5 * (x + total));
  constexpr double kMaxPanels = 20000.0;
  double u_max = 1.0;
  auto log_rho_retained = [&](double u) {
    double r = 0.0;
    for (double v : spectrum.lambdas) r += 0.25 * std::log1p(v * v * u * u);
    return r;
  };
  while (log_rho_retained(u_max) + std::log(u_max) < 34.0) {
    u_max *= 1.5;
    if (u_max > kMaxPanels * width) return NAN;
  }

  std::vector<double> explicit_terms;
  double s[6] = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  auto absorb = [&](double v) {
    if (!(v > 0.0)) return;
    if (v * u_max > 0.1) {
      explicit_terms.push_back(v);
      return;
    }
    double p = v;
    for (int m = 1; m <= 5; ++m, p *= v) s[m] += p;
  };
  for (double v : spectrum.lambdas) absorb(v);
  if (spectrum.tail) {
    const PowerTail& t = *spectrum.tail;
    auto k = static_cast<double>(spectrum.lambdas.size()) + 1.0;
    while (t.at(k) * u_max > 0.1) {
      explicit_terms.push_back(t.at(k));
      k += 1.0;
    }
    const double from = k - 0.5 - t.shift;
    for (int m = 1; m <= 5; ++m) {
      const double e = m * t.power;
      s[m] += std::pow(t.coeff, m) * std::pow(from, 1.0 - e) / (e - 1.0);
    }
  }

  auto integrand = [&](double u) {
    if (u == 0.0) return 0.5 * (total - x);
    const double u2 = u * u;
    double theta = 0.5 * (u * (s[1] - x) - u * u2 * s[3] / 3.0 + u * u2 * u2 * s[5] / 5.0);
    double log_rho = 0.25 * (u2 * s[2] - u2 * u2 * s[4] / 2.0);
    for (double v : explicit_terms) {
      theta += 0.5 * std::atan(v * u);
      log_rho += 0.25 * std::log1p(v * v * u2);
    }
    return std::sin(theta) / (u * std::exp(log_rho));
  };
  double integral = 0.0;
  for (double a = 0.0; a < u_max; a += width) {
    integral += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, a, a + width, 0);
  }
  return 0.5 - integral / std::numbers::pi;
}

double neg_log_cdf(const EigenSpectrum& spectrum, double x, double mean) {
  const double s = saddle(spectrum, x, mean);
  const auto c = detail::cumulant_sums(spectrum, s, true);
  const double k = -0.5 * c.log_sum;
  const double w = std::copysign(std::sqrt(std::max(0.0, 2.0 * (s * x - k))), s);
  const double u = s * std::sqrt(c.d2);
  const double l3 = c.d3 / std::pow(c.d2, 1.5);
  const double l4 = c.d4 / (c.d2 * c.d2);
  const double second =
      (l4 / 8.0 - 5.0 * l3 * l3 / 24.0) / u - 1.0 / (u * u * u) - l3 / (2.0 * u * u) + 1.0 / (w * w * w);
  const double first = 1.0 / w - 1.0 / u;
  if (s < 0.0) {
    double inner = upper_mills(-w) + first - second;
    if (!(inner > 0.0)) inner = upper_mills(-w) + first;
    if (!(inner > 0.0)) throw NumericalError("l2_smallball: saddlepoint expansion broke down");
    return -(log_std_normal_pdf(w) + std::log(inner));
  }
  const double base = 0.5 * std::erfc(-w / std::numbers::sqrt2);
  const double density = std::exp(log_std_normal_pdf(w));
  double cdf = base + density * (first - second);
  if (!(cdf > 0.0 && cdf <= 1.0)) cdf = base + density * first;
  if (!(cdf > 0.0 && cdf <= 1.0)) throw NumericalError("l2_smallball: saddlepoint expansion broke down");
  return -std::log(cdf);
}

}  // namespace

double l2_smallball(const EigenSpectrum& spectrum, double eps) {
  if (!(eps > 0.0)) throw DomainError("l2_smallball: eps must be positive");
  if (spectrum.lambdas.empty() || !(spectrum.lambdas.front() > 0.0)) {
    throw DomainError("l2_smallball: spectrum must have a positive leading eigenvalue");
  }
  const double x = eps * eps;
  const double mean = spectrum.total();
  constexpr double kInversionLimit = 11.5;
  if (x >= mean || neg_log_cdf(spectrum, x, mean) < kInversionLimit) {
    const double p = inversion_cdf(spectrum, x);
    if (p > 1e-6 && p <= 1.0) return -std::log(p);
  }
  constexpr double kBand = 1e-3;
  if (std::abs(x / mean - 1.0) < kBand) {
    // The expansion is singular at the mean; interpolate across it.
    const double xl = mean * (1.0 - kBand);
    const double xh = mean * (1.0 + kBand);
    const double yl = neg_log_cdf(spectrum, xl, mean);
    const double yh = neg_log_cdf(spectrum, xh, mean);
    return yl + (yh - yl) * (x - xl) / (xh - xl);
  }
  return neg_log_cdf(spectrum, x, mean);
}

}  // namespace pathreg

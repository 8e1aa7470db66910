#include "pathreg/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>

#include <boost/math/tools/minima.hpp>

#include "pathreg/csv.hpp"
#include "pathreg/detail/spectral_sums.hpp"
#include "pathreg/errors.hpp"
#include "pathreg/quadrature.hpp"

namespace pathreg {

namespace {

struct LineFit {
  double slope;
  double intercept;
  double sse;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit fit{sxy / sxx, 0.0, 0.0};
  fit.intercept = my - fit.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    fit.sse += r * r;
  }
  return fit;
}

void accumulate(detail::CumulantSums& acc, double lambda, double weight, double s, bool higher) {
  const double t = 1.0 - 2.0 * s * lambda;
  const double r = lambda / t;
  acc.log_sum += weight * std::log1p(-2.0 * s * lambda);
  acc.d1 += weight * r;
  if (!higher) return;
  const double r2 = r * r;
  acc.d2 += weight * 2.0 * r2;
  acc.d3 += weight * 8.0 * r2 * r;
  acc.d4 += weight * 48.0 * r2 * r2;
}

}  // namespace

double PowerTail::at(double k) const { return coeff * std::pow(k - shift, -power); }

double EigenSpectrum::total() const { return detail::cumulant_sums(*this, 0.0, false).d1; }

namespace detail {

CumulantSums cumulant_sums(const EigenSpectrum& spectrum, double s, bool higher) {
  CumulantSums acc;
  for (double l : spectrum.lambdas) accumulate(acc, l, 1.0, s, higher);
  if (!spectrum.tail) return acc;

  const PowerTail& tail = *spectrum.tail;
  const double p = tail.power;
  if (!(p > 1.0)) throw NumericalError("spectrum tail is not summable");
  const double k_last = static_cast<double>(spectrum.lambdas.size());
  // Midpoint Euler-Maclaurin: sum_{k>K} g(k) = int_{K+1/2}^inf g + g'(K+1/2)/24 + ...
  const double a = k_last + 0.5 - tail.shift;
  const double lambda_a = tail.coeff * std::pow(a, -p);
  // x = a y^{-1/(p-1)} so that lambda dx is a constant multiple of dy.
  const double jac = a / (p - 1.0);
  const double expo = p / (p - 1.0);
  auto lambda_of = [&](double y) { return lambda_a * std::pow(y, expo); };
  auto weight_of = [&](double y) { return jac * std::pow(y, -expo); };

  // Panels refine geometrically toward the scale where |s| lambda ~ 1.
  double knee = 1.0;
  if (s != 0.0) knee = std::min(1.0, std::pow(1.0 / (2.0 * std::abs(s) * lambda_a), 1.0 / expo));
  std::vector<double> breaks{1.0};
  while (breaks.back() > knee * 1e-4 && breaks.back() > 1e-280) breaks.push_back(breaks.back() / 4.0);
  breaks.push_back(0.0);

  const quad::Rule& rule = quad::gauss_legendre(16);
  for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
    const double hi = breaks[b];
    const double lo = breaks[b + 1];
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double y = mid + half * rule.nodes[q];
      accumulate(acc, lambda_of(y), half * rule.weights[q] * weight_of(y), s, higher);
    }
  }
  CumulantSums plus, minus;
  accumulate(plus, tail.at(k_last + 1.0), 1.0, s, higher);
  accumulate(minus, tail.at(k_last), 1.0, s, higher);
  acc.log_sum += (plus.log_sum - minus.log_sum) / 24.0;
  acc.d1 += (plus.d1 - minus.d1) / 24.0;
  acc.d2 += (plus.d2 - minus.d2) / 24.0;
  acc.d3 += (plus.d3 - minus.d3) / 24.0;
  acc.d4 += (plus.d4 - minus.d4) / 24.0;
  return acc;
}

}  // namespace detail

EigenSpectrum nystrom_eigen(const CovMatrix& cov, const Grid& grid, std::size_t k) {
  const std::size_t n = grid.n();
  if (static_cast<std::size_t>(cov.rows()) != n || cov.cols() != cov.rows()) {
    throw DomainError("nystrom_eigen: matrix does not match grid");
  }
  if (k == 0 || k > n) throw DomainError("nystrom_eigen: need 1 <= k <= n");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov / static_cast<double>(n), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("nystrom_eigen: eigensolver failed");
  const Eigen::VectorXd& ev = solver.eigenvalues();
  EigenSpectrum out;
  out.source_n = n;
  out.lambdas.resize(k);
  const double top = std::max(ev[ev.size() - 1], 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    const double v = ev[ev.size() - 1 - static_cast<Eigen::Index>(i)];
    out.lambdas[i] = v < 1e-14 * top ? 0.0 : v;
  }
  return out;
}

PowerTail fit_power_tail(const std::vector<double>& lambdas, std::size_t first, std::size_t last) {
  if (first < 1 || last > lambdas.size() || last < first + 2) throw DomainError("fit_power_tail: bad index range");
  std::vector<double> x, y;
  for (std::size_t k = first; k <= last; ++k) {
    if (!(lambdas[k - 1] > 0.0)) throw DomainError("fit_power_tail: nonpositive eigenvalue in range");
    x.push_back(std::log(static_cast<double>(k)));
    y.push_back(std::log(lambdas[k - 1]));
  }
  const LineFit fit = fit_line(x, y);
  return PowerTail{std::exp(fit.intercept), -fit.slope, 0.0};
}

EigenSpectrum operator_spectrum(const ProcessSpec& spec, const Grid& grid, std::size_t k) {
  return kernel_spectrum(build_cov(spec, grid), grid, k);
}

EigenSpectrum kernel_spectrum(const Eigen::MatrixXd& kernel, const Grid& grid, std::size_t k) {
  EigenSpectrum out = nystrom_eigen(kernel, grid, k);
  const auto& l = out.lambdas;
  if (k >= 8 && l.back() > 1e-12 * l.front()) {
    const PowerTail tail = fit_power_tail(l, k / 2, k);
    if (tail.power > 1.0) out.tail = tail;
  }
  return out;
}

EigenSpectrum brownian_spectrum(std::size_t count) {
  if (count == 0) throw DomainError("brownian_spectrum: count must be positive");
  EigenSpectrum out;
  const double c = 1.0 / (std::numbers::pi * std::numbers::pi);
  out.tail = PowerTail{c, 2.0, 0.5};
  out.lambdas.resize(count);
  for (std::size_t k = 1; k <= count; ++k) out.lambdas[k - 1] = out.tail->at(static_cast<double>(k));
  return out;
}

DerivedKernel derivative_kernel(const ProcessSpec& spec, const Grid& grid) {
  bool smooth = false;
  if (const auto* i = spec.get_if<Integrated>()) smooth = i->order >= 1;
  if (const auto* f = spec.get_if<FracIntegrated>()) smooth = f->order >= 1.0;
  if (!smooth) throw UnsupportedSpecError("derivative_kernel: covariance is not differentiable; " + spec.describe());
  const std::size_t n = grid.n();
  if (n < 3) throw DomainError("derivative_kernel: need n >= 3");

  const CovMatrix cov = build_cov(spec, grid);
  // Covariances including t_0 (row/column of zeros).
  auto r = [&](std::size_t i, std::size_t j) {
    return (i == 0 || j == 0) ? 0.0 : cov(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1));
  };
  const double inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
  const auto nn = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd d(nn, nn);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      if (i == j) continue;
      d(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1)) =
          (r(i, j) - r(i - 1, j) - r(i, j - 1) + r(i - 1, j - 1)) * inv_h2;
    }
  }
  for (Eigen::Index i = 0; i < nn; ++i) {
    double sum = 0.0;
    int sides = 0;
    if (i + 2 < nn) {
      sum += 2.0 * d(i, i + 1) - d(i, i + 2);
      ++sides;
    }
    if (i >= 2) {
      sum += 2.0 * d(i, i - 1) - d(i, i - 2);
      ++sides;
    }
    d(i, i) = sum / sides;
  }
  return DerivedKernel{grid, d};
}

double laplace_transform_l2(const EigenSpectrum& spectrum, double lambda) {
  if (spectrum.lambdas.empty()) throw DomainError("laplace_transform_l2: empty spectrum");
  if (!(lambda >= 0.0)) throw DomainError("laplace_transform_l2: lambda must be nonnegative");
  if (lambda == 0.0) return 1.0;
  const auto sums = detail::cumulant_sums(spectrum, -0.5 * lambda * lambda, false);
  return std::exp(-0.5 * sums.log_sum);
}

EigenRateFit eigen_rate_fit(const EigenSpectrum& spectrum, std::size_t k_min, std::size_t k_max) {
  if (k_min < 1 || k_max > spectrum.lambdas.size()) throw DomainError("eigen_rate_fit: range outside spectrum");
  if (k_max < k_min + 2) throw DomainError("eigen_rate_fit: need at least three points");
  std::vector<double> y;
  for (std::size_t k = k_min; k <= k_max; ++k) {
    if (!(spectrum.lambdas[k - 1] > 0.0)) throw DomainError("eigen_rate_fit: nonpositive eigenvalue in range");
    y.push_back(std::log(spectrum.lambdas[k - 1]));
  }
  auto design = [&](double shift) {
    std::vector<double> x;
    for (std::size_t k = k_min; k <= k_max; ++k) x.push_back(std::log(static_cast<double>(k) + shift));
    return x;
  };
  const double lo = -0.9 * static_cast<double>(k_min);
  const double hi = 4.0 * static_cast<double>(k_min);
  const auto best = boost::math::tools::brent_find_minima(
      [&](double shift) { return fit_line(design(shift), y).sse; }, lo, hi, 40);
  EigenRateFit out;
  out.shift = best.first;
  out.slope = fit_line(design(best.first), y).slope;
  out.plain_slope = fit_line(design(0.0), y).slope;
  return out;
}

void write_spectrum_csv(std::ostream& out, const EigenSpectrum& spectrum) {
  out << "k,lambda\n";
  for (std::size_t k = 0; k < spectrum.lambdas.size(); ++k) {
    out << (k + 1) << ',' << format_number(spectrum.lambdas[k]) << '\n';
  }
}

}  // namespace pathreg

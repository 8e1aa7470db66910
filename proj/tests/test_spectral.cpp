#include "doctest.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "pathreg/errors.hpp"
#include "pathreg/spectral.hpp"

using namespace pathreg;

namespace {

// Imhof inversion: P(sum_k l_k xi_k^2 > x) = 1/2 + (1/pi) int_0^inf sin(theta(u)) / (u rho(u)) du.
double imhof_cdf(const std::vector<double>& l, double x) {
  auto integrand = [&](double u) {
    if (u == 0.0) {
      double s = 0;
      for (double v : l) s += v;
      return 0.5 * (s - x);
    }
    double theta = -0.5 * x * u, log_rho = 0;
    for (double v : l) {
      theta += 0.5 * std::atan(v * u);
      log_rho += 0.25 * std::log1p(v * v * u * u);
    }
    return std::sin(theta) / (u * std::exp(log_rho));
  };
  double total = 0;
  const double period = 2 * std::numbers::pi / (0.5 * x);
  for (int i = 0; i < 4000; ++i) {
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, i * period, (i + 1) * period, 8, 1e-13);
  }
  return 1.0 - (0.5 + total / std::numbers::pi);
}

double brown(std::size_t k) {
  const double a = std::numbers::pi * (static_cast<double>(k) - 0.5);
  return 1.0 / (a * a);
}

}  // namespace

TEST_CASE("closed form Brownian spectrum") {
  const EigenSpectrum s = brownian_spectrum(200);
  REQUIRE(s.lambdas.size() == 200);
  CHECK(s.lambdas[0] == doctest::Approx(4 / (std::numbers::pi * std::numbers::pi)).epsilon(1e-15));
  CHECK(s.lambdas[199] == doctest::Approx(brown(200)).epsilon(1e-14));
  REQUIRE(s.tail.has_value());
  CHECK(s.tail->at(250) == doctest::Approx(brown(250)).epsilon(1e-14));
  // Trace of min(s, t) is int_0^1 t dt.
  CHECK(s.total() == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("Nystrom reproduces the Brownian eigenvalues") {
  const Grid grid(512);
  const EigenSpectrum s = nystrom_eigen(build_cov(ProcessSpec::brownian(), grid), grid, 20);
  for (std::size_t k = 1; k <= 10; ++k) {
    CAPTURE(k);
    CHECK(s.lambdas[k - 1] == doctest::Approx(brown(k)).epsilon(2e-3));
  }
  CHECK_THROWS_AS(nystrom_eigen(build_cov(ProcessSpec::brownian(), Grid(8)), grid, 4), DomainError);
}

TEST_CASE("operator spectrum carries a summable tail") {
  const EigenSpectrum s = operator_spectrum(ProcessSpec::integrated(ProcessSpec::brownian(), 1), Grid(512), 64);
  REQUIRE(s.tail.has_value());
  CHECK(s.tail->power == doctest::Approx(4.0).epsilon(0.05));
  // Trace of the integrated Brownian kernel: int_0^1 t^3/3 dt.
  CHECK(s.total() == doctest::Approx(1.0 / 12).epsilon(5e-3));
}

TEST_CASE("power tail fit recovers exact laws") {
  std::vector<double> l;
  for (int k = 1; k <= 60; ++k) l.push_back(3.0 * std::pow(k, -2.5));
  const PowerTail t = fit_power_tail(l, 30, 60);
  CHECK(t.power == doctest::Approx(2.5).epsilon(1e-10));
  CHECK(t.at(100) == doctest::Approx(3.0 * std::pow(100.0, -2.5)).epsilon(1e-9));
  CHECK_THROWS_AS(fit_power_tail(l, 30, 31), DomainError);
}

TEST_CASE("eigen rate fit with profiled shift") {
  EigenSpectrum s;
  for (int k = 1; k <= 50; ++k) s.lambdas.push_back(std::pow(k + 0.3, -4.0));
  const EigenRateFit fit = eigen_rate_fit(s, 5, 40);
  CHECK(fit.slope == doctest::Approx(-4.0).epsilon(1e-6));
  CHECK(fit.shift == doctest::Approx(0.3).epsilon(1e-4));
  CHECK(fit.plain_slope > -4.0);
  CHECK_THROWS_AS(eigen_rate_fit(s, 5, 6), DomainError);
}

TEST_CASE("Laplace transform identity") {
  const EigenSpectrum s = brownian_spectrum();
  for (double l : {1.0, 3.0, 10.0, 30.0}) {
    CAPTURE(l);
    CHECK(std::abs(laplace_transform_l2(s, l) - 1 / std::sqrt(std::cosh(l))) < 1e-6);
  }
  CHECK(laplace_transform_l2(s, 0.0) == 1.0);
  CHECK_THROWS_AS(laplace_transform_l2(s, -1.0), DomainError);
}

TEST_CASE("L2 small ball of a finite spectrum against Imhof inversion") {
  EigenSpectrum s;
  for (int k = 1; k <= 6; ++k) s.lambdas.push_back(1.0 / (k * k));
  for (double eps : {0.3, 0.5, 0.8}) {
    const double want = -std::log(imhof_cdf(s.lambdas, eps * eps));
    CAPTURE(eps);
    CHECK(l2_smallball(s, eps) == doctest::Approx(want).epsilon(0.02));
  }
}

TEST_CASE("L2 small ball constant of Brownian motion") {
  const EigenSpectrum s = brownian_spectrum();
  const double v = 1e-4 * l2_smallball(s, 0.01);
  CHECK(v >= 0.11875);
  CHECK(v <= 0.13125);
  CHECK(l2_smallball(s, 10.0) < 1e-6);
}

TEST_CASE("derivative kernel of integrated Brownian motion") {
  const Grid grid(64);
  const DerivedKernel dk = derivative_kernel(ProcessSpec::integrated(ProcessSpec::brownian(), 1), grid);
  // Cov of the derivative is min(s, t) evaluated at cell midpoints.
  const double h = grid.spacing();
  CHECK(dk.matrix(10, 20) == doctest::Approx(10.5 * h).epsilon(1e-6));
  CHECK(dk.matrix(30, 30) == doctest::Approx(30.5 * h).epsilon(1e-3));
  CHECK_THROWS_AS(derivative_kernel(ProcessSpec::brownian(), grid), UnsupportedSpecError);
}

TEST_CASE("spectrum csv layout") {
  EigenSpectrum s;
  s.lambdas = {0.5, 0.25};
  std::ostringstream out;
  write_spectrum_csv(out, s);
  CHECK(out.str() == "k,lambda\n1,0.5\n2,0.25\n");
}

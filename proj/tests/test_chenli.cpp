#include "doctest.h"

#include <cmath>
#include <sstream>

#include "pathreg/chenli.hpp"
#include "pathreg/errors.hpp"

using namespace pathreg;

namespace {

const ProcessSpec kBm = ProcessSpec::brownian();
const ProcessSpec kIbm = ProcessSpec::integrated(ProcessSpec::brownian(), 1);

}  // namespace

TEST_CASE("order is linked to the comparison index") {
  CHECK(ChenLiFamily{kBm, kIbm, NormSpec::sup()}.order() == 1.0);
  CHECK(ChenLiFamily{ProcessSpec::riemann_liouville(1.5), kIbm, NormSpec::sup()}.order() == 2.0);
  CHECK_THROWS_AS((ChenLiFamily{ProcessSpec::fbm(0.3), kIbm, NormSpec::sup()}.order()), DomainError);
}

TEST_CASE("derivative spectrum of integrated Brownian motion reduces to Brownian motion") {
  const EigenSpectrum s = derivative_spectrum(kIbm, 1.0, 256);
  const EigenSpectrum b = brownian_spectrum();
  for (std::size_t k = 0; k < 10; ++k) CHECK(s.lambdas[k] == b.lambdas[k]);
  // The Nystrom route through the derivative kernel agrees within discretization error.
  const DerivedKernel dk = derivative_kernel(kIbm, Grid(512));
  const EigenSpectrum n = kernel_spectrum(dk.matrix, dk.grid, 16);
  for (std::size_t k = 0; k < 5; ++k) CHECK(n.lambdas[k] == doctest::Approx(b.lambdas[k]).epsilon(5e-3));
  CHECK_THROWS_AS(derivative_spectrum(kBm, 1.0, 64), UnsupportedSpecError);
}

TEST_CASE("identical processes give a trivially satisfied inequality") {
  const ChenLiFamily family{kBm, kBm, NormSpec::sup(), 256};
  const auto r = chenli_bound(family, {0.8}, {1.0}, 20000, 4);
  REQUIRE(r.size() == 1);
  CHECK(r[0].lhs >= r[0].rhs);
  CHECK(r[0].margin > 0.0);
  CHECK(r[0].trivial);
}

TEST_CASE("integrated Brownian motion against Brownian motion") {
  const ChenLiFamily family{kBm, kIbm, NormSpec::sup(), 256};
  const std::vector<double> lambdas{1.0, 2.0, 4.0, 8.0};
  const auto results = chenli_bound(family, {0.3}, lambdas, 20000, 9);
  REQUIRE(results.size() == 4);
  for (const auto& r : results) {
    CAPTURE(r.lambda);
    CHECK(r.lhs >= r.rhs - 2 * r.lhs_stderr);
    CHECK(std::abs(r.laplace - 1 / std::sqrt(std::cosh(r.lambda))) < 1e-6);
    CHECK(r.small_ball == doctest::Approx(bm_sup_probability(r.lambda * 0.3)).epsilon(1e-14));
  }
  // lambda -> 0 sends the comparison probability to zero.
  const auto tiny = chenli_bound(family, {0.3}, {1e-3}, 20000, 9);
  CHECK(tiny[0].rhs == 0.0);
  CHECK(tiny[0].margin > 50.0);
}

TEST_CASE("right-hand side alone matches the bound record") {
  const ChenLiFamily family{kBm, kIbm, NormSpec::sup(), 128};
  const auto r = chenli_bound(family, {0.5}, {2.0}, 5000, 2);
  CHECK(chenli_rhs(family, 0.5, 2.0, 5000, 2) == doctest::Approx(r[0].rhs).epsilon(1e-14));
}

TEST_CASE("optimal D solves the first order condition") {
  // g = 2, tau = 1/2: minimizer of k D^-2 + K D is (2 k / K)^{1/3}.
  for (double k : {0.5, 1.2337, 3.0}) {
    for (double big_k : {0.25, 0.5, 2.0}) {
      CHECK(optimal_d(k, big_k, 2.0, 0.5) == doctest::Approx(std::cbrt(2 * k / big_k)).epsilon(1e-8));
    }
  }
  CHECK_THROWS_AS(optimal_d(-1.0, 1.0, 2.0, 0.5), DomainError);
}

TEST_CASE("optimal D is invariant under a common rescaling") {
  const double d = optimal_d(1.3, 0.7, 1.5, 1.5);
  CHECK(optimal_d(13.0, 7.0, 1.5, 1.5) == doctest::Approx(d).epsilon(1e-10));
  // Rescaling K alone by c moves D by c^{-1/(g+q)}.
  const double q = 1.0 / 2.0;
  CHECK(optimal_d(1.3, 0.7 * 8.0, 1.5, 1.5) == doctest::Approx(d * std::pow(8.0, -1.0 / (1.5 + q))).epsilon(1e-10));
}

TEST_CASE("optimized lambda is a local optimum of the modelled bound") {
  const ChenLiFamily family{kBm, kIbm, NormSpec::sup(), 128};
  const RateLaw bm_l2{kKappaL2, 0.5};
  for (double eps : {0.05, 0.1, 0.3}) {
    const LambdaChoice c = optimize_lambda(family, eps, bm_l2, kKappaSup, 2000, 1);
    const double at = model_neg_log_rhs(family, eps, c.lambda_star, bm_l2, kKappaSup);
    CAPTURE(eps);
    CHECK(at <= model_neg_log_rhs(family, eps, c.lambda_star / 2, bm_l2, kKappaSup));
    CHECK(at <= model_neg_log_rhs(family, eps, c.lambda_star * 2, bm_l2, kKappaSup));
    // theta = 0: pure power of eps with exponent (tau + 1/2) / (1/g + tau + 1/2) = 2/3.
    CHECK(c.lambda_star == doctest::Approx(c.d_star * std::pow(eps, -2.0 / 3.0)).epsilon(1e-12));
    CHECK(c.rhs_at_star >= 0.0);
  }
}

TEST_CASE("log factor in the optimized lambda") {
  const ChenLiFamily family{kBm, kIbm, NormSpec::sup(), 128};
  const RateLaw with_log{kKappaL2, 0.5, 1.0};
  const double eps = 0.01;
  const LambdaChoice c = optimize_lambda(family, eps, with_log, kKappaSup, 2000, 1);
  // b = -theta tau q / (g + q) = -1/6.
  CHECK(c.lambda_star == doctest::Approx(c.d_star * std::pow(eps, -2.0 / 3.0) * std::pow(-std::log(eps), -1.0 / 6.0))
                             .epsilon(1e-12));
}

TEST_CASE("remainder term: a zero perturbation changes nothing") {
  const auto x = ProcessSpec::gaussian_convolution(0.5, {0.0});
  const auto y = ProcessSpec::riemann_liouville(0.5);
  const std::vector<double> eps{0.4, 0.5, 0.6, 0.7, 0.8};
  const RemainderVerdict v = remainder_term_check(y, x, NormSpec::sup(), eps, 128, 20000, 3);
  CHECK(v.slope_x == doctest::Approx(v.slope_y).epsilon(1e-12));
  CHECK(v.pass);
}

TEST_CASE("csv layout") {
  std::ostringstream out;
  write_chenli_csv(out, {ChenLiResult{2.0, 0.5, 0.25, 0.01, 0.5, 0.25, 0.125, 12.5, false}});
  CHECK(out.str() == "lambda,eps,lhs,rhs,margin_stderr\n2,0.5,0.25,0.125,12.5\n");
}

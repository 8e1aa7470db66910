#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "pathreg/errors.hpp"
#include "pathreg/quantize.hpp"

using namespace pathreg;

TEST_CASE("trivial and two level codebooks") {
  const ScalarCodebook& one = gauss_scalar_codebook(1);
  CHECK(one.levels == std::vector<double>{0.0});
  CHECK(one.distortion == 1.0);
  const ScalarCodebook& two = gauss_scalar_codebook(2);
  const double c = std::sqrt(2 / std::numbers::pi);
  CHECK(two.levels[0] == doctest::Approx(-c).epsilon(1e-10));
  CHECK(two.levels[1] == doctest::Approx(c).epsilon(1e-10));
  CHECK(std::abs(two.distortion - (1 - 2 / std::numbers::pi)) < 1e-8);
  CHECK_THROWS_AS(gauss_scalar_codebook(0), DomainError);
}

TEST_CASE("codebooks are sorted, symmetric and improve with size") {
  double prev = 2.0;
  for (std::size_t n = 1; n <= 64; ++n) {
    const ScalarCodebook& cb = gauss_scalar_codebook(n);
    REQUIRE(cb.levels.size() == n);
    CHECK(std::is_sorted(cb.levels.begin(), cb.levels.end()));
    CHECK(cb.levels.front() == doctest::Approx(-cb.levels.back()).epsilon(1e-9));
    CHECK(cb.distortion < prev);
    prev = cb.distortion;
  }
  // Published values of the optimal Gaussian quantizer.
  CHECK(gauss_scalar_codebook(4).distortion == doctest::Approx(0.11748).epsilon(1e-4));
  CHECK(gauss_scalar_codebook(8).distortion == doctest::Approx(0.03455).epsilon(1e-3));
}

TEST_CASE("distortions agree with an independent Monte Carlo oracle") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal;
  const std::size_t n_mc = 10000000;
  for (std::size_t n : {3, 5}) {
    const auto& levels = gauss_scalar_codebook(n).levels;
    double sum = 0, sum_sq = 0;
    for (std::size_t i = 0; i < n_mc; ++i) {
      const double x = normal(rng);
      double best = INFINITY;
      for (double c : levels) best = std::min(best, (x - c) * (x - c));
      sum += best;
      sum_sq += best * best;
    }
    const double mean = sum / n_mc;
    const double se = std::sqrt((sum_sq / n_mc - mean * mean) / n_mc);
    CAPTURE(n);
    CHECK(std::abs(mean - gauss_scalar_codebook(n).distortion) < 3 * se);
  }
}

TEST_CASE("zero budget keeps a single codeword") {
  const EigenSpectrum bm = brownian_spectrum();
  const Quantizer q = product_quantizer(bm, 0.0);
  for (std::size_t n : q.levels) CHECK(n == 1);
  CHECK(q.rate() == 0.0);
  CHECK(q.distortion_sq() == doctest::Approx(0.5).epsilon(1e-10));
  const QuantError e = quant_error(q, 1000, 1);
  CHECK(e.distortion == doctest::Approx(std::sqrt(0.5)).epsilon(1e-10));
  CHECK_THROWS_AS(product_quantizer(bm, -1.0), DomainError);
}

TEST_CASE("dominant coordinate takes every level") {
  EigenSpectrum s;
  s.lambdas = {1.0, 1e-6};
  const Quantizer q = product_quantizer(s, std::log(4.0));
  CHECK(q.levels[0] == 4);
  CHECK(q.levels[1] == 1);
  CHECK(q.rate() <= std::log(4.0) + 1e-12);
}

TEST_CASE("Brownian allocation is nonincreasing and locally exchange optimal") {
  const EigenSpectrum bm = brownian_spectrum();
  const Quantizer q = product_quantizer(bm, 8.0);
  CHECK(q.rate() <= 8.0 + 1e-12);
  for (std::size_t k = 1; k < q.levels.size(); ++k) CHECK(q.levels[k] <= q.levels[k - 1]);
  // No move of one level between two coordinates that stays within budget lowers the distortion.
  const double base = q.distortion_sq();
  for (std::size_t i = 0; i < 12; ++i) {
    for (std::size_t j = 0; j < 12; ++j) {
      if (i == j || q.levels[i] == 1) continue;
      Quantizer alt = q;
      --alt.levels[i];
      ++alt.levels[j];
      if (alt.rate() > 8.0 + 1e-12) continue;
      CAPTURE(i);
      CAPTURE(j);
      CHECK(alt.distortion_sq() >= base - 1e-12);
    }
  }
}

TEST_CASE("separable nearest codeword equals brute force search") {
  EigenSpectrum s;
  s.lambdas = {0.6, 0.3, 0.15, 0.05};
  const Quantizer q = product_quantizer(s, std::log(4000.0));
  std::size_t size = 1;
  for (std::size_t n : q.levels) size *= n;
  REQUIRE(size <= 4096);
  REQUIRE(size > 100);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x;
    for (double l : s.lambdas) x.push_back(std::sqrt(l) * normal(rng));
    CHECK(separable_sq_error(q, x) == doctest::Approx(brute_force_sq_error(q, x)).epsilon(1e-14));
  }
}

TEST_CASE("Monte Carlo distortion matches the exact allocation value") {
  const EigenSpectrum bm = brownian_spectrum();
  const Quantizer q = product_quantizer(bm, 6.0);
  const QuantError e = quant_error(q, 200000, 5);
  CHECK(std::abs(e.distortion - std::sqrt(q.distortion_sq())) < 3 * e.std_err);
  const QuantError again = quant_error(q, 200000, 5);
  CHECK(again.distortion == e.distortion);
}

TEST_CASE("quantization curve is monotone") {
  std::vector<double> rates;
  for (int i = 0; i <= 8; ++i) rates.push_back(2.0 * i);
  const auto curve = quant_curve(brownian_spectrum(), rates, 20000, 3);
  for (std::size_t i = 1; i < curve.size(); ++i) {
    CHECK(curve[i].rate > curve[i - 1].rate);
    CHECK(curve[i].distortion <= curve[i - 1].distortion + 2 * (curve[i].std_err + curve[i - 1].std_err));
  }
  std::ostringstream out;
  write_quant_csv(out, {curve.front()});
  CHECK(out.str().rfind("r,distortion,stderr\n0,", 0) == 0);
}

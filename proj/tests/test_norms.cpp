#include "doctest.h"

#include <cmath>
#include <limits>

#include "pathreg/errors.hpp"
#include "pathreg/norms.hpp"

using namespace pathreg;

namespace {

template <class F>
SamplePath tabulate(std::size_t n, F f) {
  const Grid grid(n);
  std::vector<double> v(n + 1);
  for (std::size_t i = 0; i <= n; ++i) v[i] = f(grid.point(i));
  return SamplePath(grid, v);
}

}  // namespace

TEST_CASE("norm construction") {
  CHECK_THROWS_AS(NormSpec::lp(0.5), DomainError);
  CHECK_THROWS_AS(NormSpec::holder(0.0), DomainError);
  CHECK_THROWS_AS(NormSpec::holder(1.0), DomainError);
  CHECK(NormSpec::sup().is_sup());
  CHECK_FALSE(NormSpec::lp(2).is_sup());
  CHECK(NormSpec::sup().describe() == "Linf");
  CHECK(NormSpec::lp(2).describe() == "L2");
  CHECK(NormSpec::holder(0.25).describe() == "Holder(0.25)");
}

TEST_CASE("self-similarity and pseudo-additivity indices") {
  const BetaP sup = beta_p(NormSpec::sup());
  CHECK(sup.beta == 0.0);
  CHECK(std::isinf(sup.p));
  CHECK(sup.inv_p() == 0.0);
  const BetaP l3 = beta_p(NormSpec::lp(3));
  CHECK(l3.beta == doctest::Approx(-1.0 / 3));
  CHECK(l3.inv_p() == doctest::Approx(1.0 / 3));
  const BetaP h = beta_p(NormSpec::holder(0.2));
  CHECK(h.beta == doctest::Approx(0.2));
  CHECK(h.inv_p() == 0.0);
  const BetaP sq = beta_p(NormSpec::l2_squared());
  CHECK(sq.beta == -0.5);
  CHECK(sq.p == 2.0);
}

TEST_CASE("Lp norms of the identity") {
  const auto f = tabulate(1024, [](double t) { return t; });
  for (double p : {1.0, 2.0, 3.5}) {
    CAPTURE(p);
    CHECK(eval_norm(f, NormSpec::lp(p)) == doctest::Approx(std::pow(1.0 / (p + 1), 1.0 / p)).epsilon(1e-5));
  }
  CHECK(eval_norm(f, NormSpec::sup()) == 1.0);
  CHECK(eval_norm(f, NormSpec::l2_squared()) == doctest::Approx(1.0 / 3).epsilon(1e-5));
}

TEST_CASE("large p does not overflow") {
  const auto f = tabulate(64, [](double t) { return 1e200 * t; });
  CHECK(std::isfinite(eval_norm(f, NormSpec::lp(4))));
  CHECK(eval_norm(f, NormSpec::lp(400)) == doctest::Approx(1e200).epsilon(0.05));
}

TEST_CASE("Lp norm increases towards the sup-norm") {
  const auto f = tabulate(256, [](double t) { return std::sin(7 * t) - t; });
  double prev = 0;
  for (double p : {1.0, 2.0, 4.0, 16.0}) {
    const double v = eval_norm(f, NormSpec::lp(p));
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(prev <= eval_norm(f, NormSpec::sup()));
}

TEST_CASE("Holder seminorm") {
  const auto lin = tabulate(128, [](double t) { return 2 * t; });
  CHECK(eval_norm(lin, NormSpec::holder(0.3)) == doctest::Approx(2.0).epsilon(1e-12));
  // sup (sqrt t - sqrt s) / (t - s)^{1/2} = 1, attained at s = 0.
  const auto root = tabulate(128, [](double t) { return std::sqrt(t); });
  CHECK(eval_norm(root, NormSpec::holder(0.5)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("raw value overload agrees with the path overload") {
  const auto f = tabulate(32, [](double t) { return t * t - 0.3; });
  CHECK(eval_norm(std::span<const double>(f.values), f.grid.spacing(), NormSpec::lp(2)) ==
        eval_norm(f, NormSpec::lp(2)));
  const std::vector<double> tiny{0.0, 1.0};
  CHECK_THROWS_AS(eval_norm(std::span<const double>(tiny), 1.0, NormSpec::sup()), DomainError);
}

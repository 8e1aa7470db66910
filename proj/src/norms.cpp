#include "pathreg/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pathreg/csv.hpp"
#include "pathreg/errors.hpp"

namespace pathreg {

namespace {

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double trapezoid_power_sum(std::span<const double> v, double h, double p) {
  const std::size_t n = v.size() - 1;
  auto term = [p](double x) {
    const double a = std::abs(x);
    if (p == 1.0) return a;
    if (p == 2.0) return a * a;
    return std::pow(a, p);
  };
  double sum = 0.5 * (term(v[0]) + term(v[n]));
  for (std::size_t i = 1; i < n; ++i) sum += term(v[i]);
  return h * sum;
}

double lp_norm(std::span<const double> v, double h, double p) {
  if (std::isinf(p)) return max_abs(v);
  // Scale out the maximum so large p cannot overflow.
  const double m = max_abs(v);
  if (m == 0.0) return 0.0;
  const std::size_t n = v.size() - 1;
  double sum = 0.5 * (std::pow(std::abs(v[0]) / m, p) + std::pow(std::abs(v[n]) / m, p));
  for (std::size_t i = 1; i < n; ++i) sum += std::pow(std::abs(v[i]) / m, p);
  if (p == 2.0) return m * std::sqrt(h * sum);
  return m * std::pow(h * sum, 1.0 / p);
}

double holder_norm(std::span<const double> v, double h, double eta) {
  const std::size_t n = v.size() - 1;
  std::vector<double> inv_pow(n + 1, 0.0);
  for (std::size_t d = 1; d <= n; ++d) inv_pow[d] = std::pow(static_cast<double>(d) * h, -eta);
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j <= n; ++j) best = std::max(best, std::abs(v[j] - v[i]) * inv_pow[j - i]);
  }
  return best;
}

}  // namespace

NormSpec NormSpec::lp(double p) {
  if (!(p >= 1.0)) throw DomainError("Lp norm: p must lie in [1, inf]");
  return NormSpec(LpNorm{p});
}

NormSpec NormSpec::sup() { return NormSpec(LpNorm{std::numeric_limits<double>::infinity()}); }

NormSpec NormSpec::holder(double eta) {
  if (!(eta > 0.0 && eta < 1.0)) throw DomainError("Holder norm: eta must lie in (0,1)");
  return NormSpec(HolderNorm{eta});
}

NormSpec NormSpec::l2_squared() { return NormSpec(L2SquaredNorm{}); }

bool NormSpec::is_sup() const {
  const auto* lp = std::get_if<LpNorm>(&value_);
  return lp != nullptr && std::isinf(lp->p);
}

std::string NormSpec::describe() const {
  if (const auto* lp = std::get_if<LpNorm>(&value_)) {
    return std::isinf(lp->p) ? std::string("Linf") : "L" + format_number(lp->p);
  }
  if (const auto* h = std::get_if<HolderNorm>(&value_)) return "Holder(" + format_number(h->eta) + ")";
  return "L2Squared";
}

double BetaP::inv_p() const { return std::isinf(p) ? 0.0 : 1.0 / p; }

BetaP beta_p(const NormSpec& norm) {
  const auto& v = norm.variant();
  if (const auto* lp = std::get_if<LpNorm>(&v)) return {std::isinf(lp->p) ? 0.0 : -1.0 / lp->p, lp->p};
  if (const auto* h = std::get_if<HolderNorm>(&v)) return {h->eta, std::numeric_limits<double>::infinity()};
  return {-0.5, 2.0};
}

double eval_norm(std::span<const double> values, double h, const NormSpec& norm) {
  if (values.size() < 3) throw DomainError("eval_norm: need a grid with n >= 2");
  const auto& v = norm.variant();
  if (const auto* lp = std::get_if<LpNorm>(&v)) return lp_norm(values, h, lp->p);
  if (const auto* hol = std::get_if<HolderNorm>(&v)) return holder_norm(values, h, hol->eta);
  return trapezoid_power_sum(values, h, 2.0);
}

double eval_norm(const SamplePath& path, const NormSpec& norm) {
  return eval_norm(std::span<const double>(path.values), path.grid.spacing(), norm);
}

}  // namespace pathreg

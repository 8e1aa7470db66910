#include "pathreg/chenli.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "pathreg/csv.hpp"
#include "pathreg/detail/covariance_model.hpp"
#include "pathreg/errors.hpp"

namespace pathreg {

namespace {

constexpr std::uint64_t kComparisonStream = 0x9e3779b97f4a7c15ULL;

double comparison_hurst(const ProcessSpec& comparison) {
  if (comparison.get_if<BrownianMotion>()) return 0.5;
  if (const auto* r = comparison.get_if<RiemannLiouville>()) return r->hurst;
  throw DomainError("Chen-Li comparison process must be BrownianMotion or RiemannLiouville");
}

bool brownian_like(const ProcessSpec& spec) { return detail::CovarianceModel(spec).is_brownian(); }

const ProcessSpec* reduced_base(const ProcessSpec& target, double order) {
  if (const auto* i = target.get_if<Integrated>()) {
    if (static_cast<double>(i->order) == order) return i->base.get();
  }
  if (const auto* f = target.get_if<FracIntegrated>()) {
    if (f->order == order) return f->base.get();
  }
  return nullptr;
}

bool differentiable(const ProcessSpec& target) {
  if (const auto* i = target.get_if<Integrated>()) return i->order >= 1;
  if (const auto* f = target.get_if<FracIntegrated>()) return f->order >= 1.0;
  return false;
}

double comparison_small_ball(const ChenLiFamily& family, double radius, std::size_t n_samples, std::uint64_t seed) {
  if (family.norm.is_sup() && brownian_like(family.comparison)) return bm_sup_probability(radius);
  try {
    const auto curve = mc_smallball(family.comparison, Grid(family.grid_n), family.norm, {radius}, n_samples,
                                    seed ^ kComparisonStream);
    return curve.entries.front().p_hat;
  } catch (const EmptyCurveError&) {
    return 0.0;
  }
}

}  // namespace

double ChenLiFamily::order() const { return comparison_hurst(comparison) + 0.5; }

EigenSpectrum derivative_spectrum(const ProcessSpec& target, double order, std::size_t grid_n) {
  const Grid grid(grid_n);
  const std::size_t k = std::min<std::size_t>(grid_n, 128);
  if (const ProcessSpec* base = reduced_base(target, order)) {
    if (brownian_like(*base)) return brownian_spectrum();
    return operator_spectrum(*base, grid, k);
  }
  if (order == 1.0 && differentiable(target)) {
    return kernel_spectrum(derivative_kernel(target, grid).matrix, grid, k);
  }
  throw UnsupportedSpecError("no derivative spectrum of order " + format_number(order) + " for " + target.describe());
}

double chenli_rhs(const ChenLiFamily& family, double eps, double lambda, std::size_t n_samples, std::uint64_t seed) {
  const double order = family.order();
  double laplace = 0.0;
  if (differentiable(family.target) || reduced_base(family.target, order) != nullptr) {
    laplace = laplace_transform_l2(derivative_spectrum(family.target, order, family.grid_n), lambda);
  }
  if (laplace == 0.0) return 0.0;
  return comparison_small_ball(family, lambda * eps, n_samples, seed) * laplace;
}

std::vector<ChenLiResult> chenli_bound(const ChenLiFamily& family, const std::vector<double>& eps_list,
                                       const std::vector<double>& lambdas, std::size_t n_samples,
                                       std::uint64_t seed) {
  const double order = family.order();
  for (double l : lambdas) {
    if (!(l > 0.0)) throw DomainError("chenli_bound: lambda must be positive");
  }
  std::vector<double> lhs(eps_list.size(), 0.0);
  const Grid grid(family.grid_n);
  try {
    const auto curve = mc_smallball(family.target, grid, family.norm, eps_list, n_samples, seed);
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
      for (const auto& e : curve.entries) {
        if (e.eps == eps_list[i]) lhs[i] = e.p_hat;
      }
    }
  } catch (const EmptyCurveError&) {
  }

  std::optional<EigenSpectrum> spectrum;
  if (differentiable(family.target) || reduced_base(family.target, order) != nullptr) {
    spectrum = derivative_spectrum(family.target, order, family.grid_n);
  }

  std::vector<ChenLiResult> out;
  const double total = static_cast<double>(n_samples);
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    const double p = lhs[i];
    const double se = std::sqrt(std::max(p, 1.0 / total) * (1.0 - p) / total);
    for (double lambda : lambdas) {
      ChenLiResult r{};
      r.lambda = lambda;
      r.eps = eps_list[i];
      r.lhs = p;
      r.lhs_stderr = se;
      r.laplace = spectrum ? laplace_transform_l2(*spectrum, lambda) : 0.0;
      if (r.laplace > 0.0) r.small_ball = comparison_small_ball(family, lambda * eps_list[i], n_samples, seed);
      r.rhs = r.small_ball * r.laplace;
      r.trivial = !(r.rhs >= std::numeric_limits<double>::min());
      if (r.trivial) r.rhs = 0.0;
      r.margin = (r.lhs - r.rhs) / se;
      out.push_back(r);
    }
  }
  return out;
}

double optimal_d(double kappa_norm, double laplace_k, double g, double tau) {
  if (!(kappa_norm > 0.0 && laplace_k > 0.0 && g > 0.0 && tau > 0.0)) {
    throw DomainError("optimal_d: constants and exponents must be positive");
  }
  const double q = 1.0 / (tau + 0.5);
  // d/dlogD of the objective: -g kappa D^{-g} + q K D^{q}; increasing in log D.
  auto slope = [&](double x) { return -g * kappa_norm * std::exp(-g * x) + q * laplace_k * std::exp(q * x); };
  double lo = -1.0, hi = 1.0;
  while (slope(lo) > 0.0) lo *= 2.0;
  while (slope(hi) < 0.0) hi *= 2.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) > 0.0 ? hi : lo) = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

double model_neg_log_rhs(const ChenLiFamily& family, double eps, double lambda, const RateLaw& rate,
                         double kappa_norm) {
  const BetaP bp = beta_p(family.norm);
  const double g = 1.0 / (comparison_hurst(family.comparison) - bp.beta - bp.inv_p());
  const double q = 1.0 / (rate.tau + 0.5);
  const double k = debruijn_constant(rate);
  const double log_part = rate.theta == 0.0 ? 1.0 : std::pow(std::abs(std::log(lambda)), rate.theta * rate.tau * q);
  return kappa_norm * std::pow(lambda * eps, -g) + k * std::pow(lambda, q) * log_part;
}

LambdaChoice optimize_lambda(const ChenLiFamily& family, double eps, const RateLaw& rate, double kappa_norm,
                             std::size_t n_samples, std::uint64_t seed) {
  const BetaP bp = beta_p(family.norm);
  const double g = 1.0 / (comparison_hurst(family.comparison) - bp.beta - bp.inv_p());
  if (!(g > 0.0)) throw DomainError("optimize_lambda: comparison exponent must be positive");
  const double q = 1.0 / (rate.tau + 0.5);
  const double d = optimal_d(kappa_norm, debruijn_constant(rate), g, rate.tau);
  double lambda = d * std::pow(eps, -(rate.tau + 0.5) / (1.0 / g + rate.tau + 0.5));
  if (rate.theta != 0.0) lambda *= std::pow(std::abs(std::log(eps)), -rate.theta * rate.tau * q / (g + q));
  return LambdaChoice{lambda, d, chenli_rhs(family, eps, lambda, n_samples, seed)};
}

RemainderVerdict remainder_term_check(const ProcessSpec& y, const ProcessSpec& x, const NormSpec& norm,
                                      const std::vector<double>& eps_list, std::size_t grid_n,
                                      std::size_t n_samples, std::uint64_t seed, double tolerance) {
  const Grid grid(grid_n);
  const RateFit fit_y = rate_fit(mc_smallball(y, grid, norm, eps_list, n_samples, seed));
  const RateFit fit_x = rate_fit(mc_smallball(x, grid, norm, eps_list, n_samples, seed));
  return RemainderVerdict{fit_x.inv_tau, fit_y.inv_tau, std::abs(fit_x.inv_tau - fit_y.inv_tau) <= tolerance};
}

void write_chenli_csv(std::ostream& out, const std::vector<ChenLiResult>& results) {
  out << "lambda,eps,lhs,rhs,margin_stderr\n";
  for (const auto& r : results) {
    out << format_number(r.lambda) << ',' << format_number(r.eps) << ',' << format_number(r.lhs) << ','
        << format_number(r.rhs) << ',' << format_number(r.margin) << '\n';
  }
}

}  // namespace pathreg

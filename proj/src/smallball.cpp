#include "pathreg/smallball.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include <boost/math/tools/minima.hpp>

#include "pathreg/csv.hpp"
#include "pathreg/detail/covariance_model.hpp"
#include "pathreg/detail/sampler.hpp"
#include "pathreg/errors.hpp"
#include "pathreg/parallel.hpp"

namespace pathreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> sorted_eps(std::vector<double> eps) {
  if (eps.empty()) throw DomainError("eps list is empty");
  for (double e : eps) {
    if (!(e > 0.0) || !std::isfinite(e)) throw DomainError("eps values must be positive and finite");
  }
  std::sort(eps.begin(), eps.end(), std::greater<>());
  if (std::adjacent_find(eps.begin(), eps.end()) != eps.end()) throw DomainError("eps values must be distinct");
  return eps;
}

// Probability that a Brownian bridge from a to b over time h stays in (-eps, eps),
// with the two barriers treated independently.
double bridge_stay(double a, double b, double eps, double h) {
  const double up = -std::expm1(-2.0 * (eps - a) * (eps - b) / h);
  const double down = -std::expm1(-2.0 * (eps + a) * (eps + b) / h);
  return up * down;
}

// Hoelder-type index used for grid sizing.
double roughness(const ProcessSpec& spec) {
  if (spec.get_if<BrownianMotion>()) return 0.5;
  if (const auto* f = spec.get_if<FractionalBm>()) return f->hurst;
  if (const auto* r = spec.get_if<RiemannLiouville>()) return std::min(r->hurst, 1.0);
  if (const auto* g = spec.get_if<GaussianConvolution>()) return std::min(g->hurst, 1.0);
  if (const auto* s = spec.get_if<StableScaledFbm>()) return s->hurst;
  return 1.0;
}

struct LinearSolve {
  double a;
  double b;
  double sse;
};

// Weighted least squares y ~ a * x + b.
LinearSolve wls_two(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& w) {
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double ww = w[i] * w[i];
    sw += ww;
    sx += ww * x[i];
    sy += ww * y[i];
    sxx += ww * x[i] * x[i];
    sxy += ww * x[i] * y[i];
  }
  const double det = sw * sxx - sx * sx;
  LinearSolve out{(sw * sxy - sx * sy) / det, (sxx * sy - sx * sxy) / det, 0.0};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = w[i] * (y[i] - out.a * x[i] - out.b);
    out.sse += r * r;
  }
  return out;
}

double weighted_r2(const std::vector<double>& y, const std::vector<double>& w, double sse) {
  double sw = 0, sy = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sw += w[i] * w[i];
    sy += w[i] * w[i] * y[i];
  }
  const double mean = sy / sw;
  double sst = 0;
  for (std::size_t i = 0; i < y.size(); ++i) sst += w[i] * w[i] * (y[i] - mean) * (y[i] - mean);
  return sst > 0.0 ? 1.0 - sse / sst : 1.0;
}

}  // namespace

const char* method_name(Method m) { return m == Method::MonteCarlo ? "MC" : "SPECTRAL"; }

double bm_sup_probability(double eps) {
  if (!(eps > 0.0)) throw DomainError("bm_sup_probability: eps must be positive");
  if (eps > 4.0) {
    // Exit-probability form: 1 - P = 4 sum_{k>=0} (-1)^k Phi(-(2k+1) eps).
    double exit = 0.0;
    for (int k = 0; k < 50; ++k) {
      const double term = 2.0 * std::erfc((2 * k + 1) * eps / std::numbers::sqrt2);
      exit += (k % 2 == 0 ? term : -term);
      if (term < 1e-300) break;
    }
    return 1.0 - exit;
  }
  const double c = std::numbers::pi * std::numbers::pi / (8.0 * eps * eps);
  double sum = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const double m = 2.0 * k + 1.0;
    const double term = std::exp(-c * m * m) / m;
    sum += (k % 2 == 0 ? term : -term);
    if (term < 1e-18 * std::abs(sum)) break;
  }
  return 4.0 / std::numbers::pi * sum;
}

double trusted_eps_floor(const ProcessSpec& spec, const Grid& grid) {
  const ProcessSpec gaussian =
      spec.get_if<StableScaledFbm>() ? ProcessSpec::fbm(spec.get_if<StableScaledFbm>()->hurst) : spec;
  const detail::CovarianceModel model(gaussian);
  double worst = 0.0;
  for (std::size_t i = 1; i <= grid.n(); ++i) {
    const double a = grid.point(i - 1);
    const double b = grid.point(i);
    const double var = model(b, b) - 2.0 * model(a, b) + model(a, a);
    worst = std::max(worst, std::sqrt(std::max(var, 0.0)));
  }
  return 5.0 * std::sqrt(2.0 / std::numbers::pi) * worst;
}

std::size_t recommended_grid_n(const ProcessSpec& spec, double eps_min) {
  if (!(eps_min > 0.0)) throw DomainError("recommended_grid_n: eps must be positive");
  const double h = roughness(spec);
  const double by_rule = h >= 0.5 ? 10.0 / eps_min : std::pow(10.0 / eps_min, 1.0 / h);
  // Also keep eps_min above the trusted floor 5 E|increment| ~ 4 n^{-h}.
  const double by_floor = std::pow(5.0 * std::sqrt(2.0 / std::numbers::pi) / eps_min, 1.0 / h);
  const double n = std::max(by_rule, by_floor);
  return static_cast<std::size_t>(std::clamp(std::ceil(n), 16.0, 4096.0));
}

SmallBallCurve mc_smallball(const ProcessSpec& spec, const Grid& grid, const NormSpec& norm,
                            std::vector<double> eps_list, std::size_t n_samples, std::uint64_t seed,
                            const McOptions& options) {
  if (n_samples < 1000) throw DomainError("mc_smallball: n_samples must be at least 1000");
  const std::vector<double> eps = sorted_eps(std::move(eps_list));
  const detail::PathSampler sampler(spec, grid);
  if (options.bridge_correction && !(sampler.brownian() && norm.is_sup())) {
    throw UnsupportedSpecError("bridge correction needs Brownian motion and the sup-norm");
  }
  const std::size_t m = eps.size();
  const std::size_t n = grid.n();
  const double h = grid.spacing();
  const std::size_t chunks = (n_samples + kChunkSize - 1) / kChunkSize;

  struct ChunkTotals {
    std::vector<double> sum;
    std::vector<double> sum_sq;
  };
  std::vector<ChunkTotals> totals(chunks);
  parallel_for(chunks, [&](std::size_t chunk) {
    const std::size_t count = std::min(kChunkSize, n_samples - chunk * kChunkSize);
    Eigen::MatrixXd block;
    sampler.sample_chunk(seed, chunk, count, block);
    ChunkTotals& t = totals[chunk];
    t.sum.assign(m, 0.0);
    t.sum_sq.assign(m, 0.0);
    std::vector<double> path(n + 1, 0.0);
    for (std::size_t j = 0; j < count; ++j) {
      for (std::size_t i = 0; i < n; ++i) path[i + 1] = block(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      const double value = eval_norm(path, h, norm);
      for (std::size_t e = 0; e < m; ++e) {
        if (value > eps[e]) break;
        double hit = 1.0;
        if (options.bridge_correction && (eps[e] - value) * (eps[e] - value) < 20.0 * h) {
          for (std::size_t i = 0; i < n; ++i) hit *= bridge_stay(path[i], path[i + 1], eps[e], h);
        }
        t.sum[e] += hit;
        t.sum_sq[e] += hit * hit;
      }
    }
  });

  SmallBallCurve curve{spec, norm, {}, n_samples};
  const double floor = trusted_eps_floor(spec, grid);
  const double total = static_cast<double>(n_samples);
  bool any = false;
  for (std::size_t e = 0; e < m; ++e) {
    double sum = 0.0, sum_sq = 0.0;
    for (const auto& t : totals) {
      sum += t.sum[e];
      sum_sq += t.sum_sq[e];
    }
    CurveEntry entry{eps[e], kInf, kInf, Method::MonteCarlo, sum / total, sum > 0.0, eps[e] >= floor};
    if (entry.usable) {
      any = true;
      const double p = entry.p_hat;
      entry.neg_log_p = -std::log(p);
      const double var = std::max(sum_sq / total - p * p, 0.0);
      entry.std_err = std::sqrt(var / total) / p;
    }
    curve.entries.push_back(entry);
  }
  if (!any) throw EmptyCurveError("mc_smallball: no sampled path fell inside any ball");
  return curve;
}

SmallBallCurve spectral_smallball(const ProcessSpec& spec, const EigenSpectrum& spectrum, std::vector<double> eps_list) {
  const std::vector<double> eps = sorted_eps(std::move(eps_list));
  SmallBallCurve curve{spec, NormSpec::lp(2.0), {}, 0};
  for (double e : eps) {
    const double y = l2_smallball(spectrum, e);
    curve.entries.push_back(CurveEntry{e, y, 0.0, Method::Spectral, std::exp(-y), true, true});
  }
  return curve;
}

void write_curve_csv(std::ostream& out, const SmallBallCurve& curve) {
  out << "eps,neg_log_p,stderr,method\n";
  for (const auto& e : curve.entries) {
    out << format_number(e.eps) << ',' << format_number(e.neg_log_p) << ',' << format_number(e.std_err) << ','
        << method_name(e.method) << '\n';
  }
}

RateFit rate_fit(const SmallBallCurve& curve, std::optional<double> theta_fixed, FitModel model) {
  std::vector<double> eps, y, w;
  for (const auto& e : curve.entries) {
    if (!e.usable || !e.trusted || !std::isfinite(e.neg_log_p)) continue;
    if (e.p_hat > 0.9) continue;
    if (!e.exact() && e.p_hat < 10.0 / static_cast<double>(curve.n_samples)) continue;
    eps.push_back(e.eps);
    y.push_back(e.neg_log_p);
    w.push_back(e.exact() ? 1.0 / e.neg_log_p : 1.0 / (e.std_err * e.neg_log_p));
  }
  if (eps.size() < 4) throw FitError("rate_fit: fewer than four usable entries");
  const std::size_t k = eps.size();

  if (!theta_fixed || model == FitModel::LogLinear) {
    // log y = c0 + g log(1/eps) + theta log|log eps|; weights are relative errors of y.
    std::vector<double> x1(k), x2(k), ly(k), ww(k);
    for (std::size_t i = 0; i < k; ++i) {
      x1[i] = -std::log(eps[i]);
      ly[i] = std::log(y[i]);
      ww[i] = w[i] * y[i];
      if (!theta_fixed) {
        const double ll = std::abs(std::log(eps[i]));
        if (!(ll > 0.0)) throw FitError("rate_fit: log|log eps| undefined at eps = 1");
        x2[i] = std::log(ll);
      } else if (*theta_fixed != 0.0) {
        ly[i] -= *theta_fixed * std::log(std::abs(std::log(eps[i])));
      }
    }
    if (theta_fixed) {
      const LinearSolve fit = wls_two(x1, ly, ww);
      return RateFit{std::exp(fit.b), fit.a, *theta_fixed, weighted_r2(ly, ww, fit.sse), 0.0, k};
    }
    Eigen::MatrixXd a(k, 3);
    Eigen::VectorXd b(k);
    for (std::size_t i = 0; i < k; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      a(r, 0) = ww[i];
      a(r, 1) = ww[i] * x1[i];
      a(r, 2) = ww[i] * x2[i];
      b[r] = ww[i] * ly[i];
    }
    Eigen::MatrixXd centered = a.rightCols(2);
    for (Eigen::Index c = 0; c < 2; ++c) {
      centered.col(c).array() -= centered.col(c).mean();
      centered.col(c).normalize();
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
    const double cond = svd.singularValues()[0] / svd.singularValues()[1];
    if (!(cond < 10.0)) throw FitError("rate_fit: log|log eps| is collinear with log eps over this range; fix theta");
    const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(b);
    const double sse = (a * coef - b).squaredNorm();
    return RateFit{std::exp(coef[0]), coef[1], coef[2], weighted_r2(ly, ww, sse), 0.0, k};
  }

  const double theta = *theta_fixed;
  std::vector<double> log_factor(k);
  for (std::size_t i = 0; i < k; ++i) {
    log_factor[i] = theta == 0.0 ? 1.0 : std::pow(std::abs(std::log(eps[i])), theta);
  }
  auto solve_at = [&](double g) {
    std::vector<double> x(k);
    for (std::size_t i = 0; i < k; ++i) x[i] = std::pow(eps[i], -g) * log_factor[i];
    return wls_two(x, y, w);
  };
  const auto best = boost::math::tools::brent_find_minima([&](double g) { return solve_at(g).sse; }, 0.01, 12.0, 50);
  const double g = best.first;
  const LinearSolve fit = solve_at(g);
  return RateFit{fit.a, g, theta, weighted_r2(y, w, fit.sse), fit.b, k};
}

void write_fit_json(std::ostream& out, const RateFit& fit) {
  out << "{\"kappa\": " << format_number(fit.kappa) << ", \"inv_tau\": " << format_number(fit.inv_tau)
      << ", \"theta\": " << format_number(fit.theta) << ", \"r2\": " << format_number(fit.r2) << "}\n";
}

TransferResult transfer_bound(const RateLaw& assumed, double order, const NormSpec& norm,
                              std::optional<TransferConstants> constants) {
  if (!(order > 0.0)) throw DomainError("transfer_bound: order must be positive");
  if (!(assumed.tau > 0.0)) throw DomainError("transfer_bound: tau must be positive");
  const BetaP bp = beta_p(norm);
  const double base = order - bp.beta - bp.inv_p();
  if (std::isinf(assumed.tau)) {
    if (!(base > 0.0)) throw DomainError("transfer_bound: nonpositive denominator");
    return TransferResult{1.0 / base, 0.0, assumed.kappa};
  }
  const double denom = assumed.tau + base;
  if (!(denom > 0.0)) throw DomainError("transfer_bound: nonpositive denominator");
  TransferResult out{1.0 / denom, assumed.theta * assumed.tau / denom, std::nullopt};
  if (constants) {
    const double hurst = order - 0.5;
    const double gamma = 1.0 / (hurst - bp.beta - bp.inv_p());
    if (!(gamma > 0.0)) throw DomainError("transfer_bound: comparison exponent must be positive");
    const double q = 1.0 / (assumed.tau + 0.5);
    auto objective = [&](double log_d) {
      return constants->kappa_norm * std::exp(-gamma * log_d) + constants->laplace_k * std::exp(q * log_d);
    };
    // Stationary point is an interior minimum of a convex function of log D.
    const double center = std::log(gamma * constants->kappa_norm / (q * constants->laplace_k)) / (gamma + q);
    const auto best = boost::math::tools::brent_find_minima(objective, center - 20.0, center + 20.0, 60);
    out.constant = best.second;
  }
  return out;
}

TransferResult converse_transfer(const ConverseRateLaw& assumed, double order, const NormSpec& norm) {
  if (!(assumed.gamma >= 0.0 && assumed.gamma < 1.0)) throw DomainError("converse_transfer: gamma must lie in [0,1)");
  if (!(order > 0.0)) throw DomainError("converse_transfer: order must be positive");
  const BetaP bp = beta_p(norm);
  const double shift = order - bp.beta - bp.inv_p();
  if (assumed.gamma == 0.0) return TransferResult{0.0, assumed.delta, std::nullopt};
  const double denom = 1.0 / assumed.gamma - shift;
  if (!(denom > 0.0)) throw DomainError("converse_transfer: nonpositive denominator");
  return TransferResult{1.0 / denom, assumed.delta / (assumed.gamma * denom), std::nullopt};
}

RegularityVerdict regularity_bound_check(const ProcessSpec& /*spec*/, double order, const NormSpec& norm,
                                         const SmallBallCurve& curve) {
  const BetaP bp = beta_p(norm);
  const double base = order - bp.beta - bp.inv_p();
  if (!(base > 0.0)) throw DomainError("regularity_bound_check: nonpositive denominator");
  const RateFit fit = rate_fit(curve);
  const double bound = 1.0 / base;
  return RegularityVerdict{fit.inv_tau <= bound + 0.1, fit.inv_tau, bound};
}

double debruijn_constant(const RateLaw& rate) {
  const double a = 1.0 / (2.0 * rate.tau);
  const double t = rate.theta;
  return (1.0 + a) * std::pow(a, -a / (1.0 + a)) * std::pow(rate.kappa * std::pow(2.0, -t), 1.0 / (1.0 + a)) *
         std::pow(2.0, -a / (1.0 + a)) * std::pow(2.0 / (1.0 + a), t / (1.0 + a));
}

DeBruijnCheck debruijn_check(const EigenSpectrum& spectrum, const RateLaw& rate, const std::vector<double>& lambdas) {
  if (lambdas.size() < 2) throw DomainError("debruijn_check: need at least two lambda values");
  const double q = 1.0 / (rate.tau + 0.5);
  const double log_power = rate.theta * rate.tau / (rate.tau + 0.5);
  std::vector<double> value, shape;
  for (double l : lambdas) {
    if (!(l > 1.0)) throw DomainError("debruijn_check: lambda values must exceed 1");
    value.push_back(-std::log(laplace_transform_l2(spectrum, l)));
    shape.push_back(std::pow(l, q) * std::pow(std::log(l), log_power));
  }
  double log_k = 0.0;
  for (std::size_t i = 0; i < value.size(); ++i) log_k += std::log(value[i] / shape[i]);
  const double k = std::exp(log_k / static_cast<double>(value.size()));
  double worst = 0.0;
  for (std::size_t i = 0; i < value.size(); ++i) worst = std::max(worst, std::abs(value[i] / (k * shape[i]) - 1.0));
  std::vector<double> lx, ly, ones(value.size(), 1.0);
  for (std::size_t i = 0; i < value.size(); ++i) {
    lx.push_back(std::log(lambdas[i]));
    ly.push_back(std::log(value[i]));
  }
  const double growth = wls_two(lx, ly, ones).a;
  return DeBruijnCheck{worst, k, growth, worst > 0.05};
}

}  // namespace pathreg

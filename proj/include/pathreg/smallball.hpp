#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "pathreg/norms.hpp"
#include "pathreg/process.hpp"
#include "pathreg/spectral.hpp"

namespace pathreg {

enum class Method { MonteCarlo, Spectral };

const char* method_name(Method m);

struct CurveEntry {
  double eps;
  /// -log p; +inf when no sampled path hit the ball.
  double neg_log_p;
  /// Standard error of neg_log_p; 0 for exact (spectral) entries.
  double std_err;
  Method method;
  double p_hat;
  /// Nonzero hit count.
  bool usable;
  /// eps above the discretization-bias floor (always true for spectral entries).
  bool trusted;
  bool exact() const { return method == Method::Spectral; }
};

struct SmallBallCurve {
  ProcessSpec spec;
  NormSpec norm;
  /// Sorted by strictly decreasing eps.
  std::vector<CurveEntry> entries;
  std::size_t n_samples = 0;
};

struct McOptions {
  /// Replace the grid indicator by the Brownian-bridge probability of staying in the ball
  /// between grid points. Only valid for Brownian motion with the sup-norm.
  bool bridge_correction = false;
};

/// Monte Carlo estimate from one batch of n_samples paths reused for every eps.
SmallBallCurve mc_smallball(const ProcessSpec& spec, const Grid& grid, const NormSpec& norm,
                            std::vector<double> eps_list, std::size_t n_samples, std::uint64_t seed,
                            const McOptions& options = {});

/// Exact-flagged L2 curve from a spectrum via l2_smallball.
SmallBallCurve spectral_smallball(const ProcessSpec& spec, const EigenSpectrum& spectrum, std::vector<double> eps_list);

/// P(sup_{[0,1]} |B| <= eps) by the reflection series.
double bm_sup_probability(double eps);

/// 5 * max_i E|X(t_i) - X(t_{i-1})|; the scale part of StableScaledFbm is ignored.
double trusted_eps_floor(const ProcessSpec& spec, const Grid& grid);

/// Grid size for a sup-type curve down to eps_min: at least 10/eps for Hoelder index >= 1/2,
/// (10/eps)^{1/H} below, and large enough that eps_min clears the trusted floor; capped at 4096.
std::size_t recommended_grid_n(const ProcessSpec& spec, double eps_min);

void write_curve_csv(std::ostream& out, const SmallBallCurve& curve);

/// kappa eps^{-1/tau} |log eps|^theta. tau = +inf is allowed.
struct RateLaw {
  double kappa;
  double tau;
  double theta = 0.0;
};

/// kappa eps^{-1/(1/gamma - ...)} form of the converse statements; gamma in [0, 1).
struct ConverseRateLaw {
  double kappa;
  double gamma;
  double delta = 0.0;
};

enum class FitModel {
  /// neg_log_p = kappa eps^{-g} |log eps|^theta + c, g profiled, (kappa, c) by weighted least squares.
  PowerWithOffset,
  /// log neg_log_p = log kappa + g log(1/eps) + theta log|log eps|.
  LogLinear,
};

struct RateFit {
  double kappa;
  /// Leading exponent 1/tau.
  double inv_tau;
  double theta;
  double r2;
  /// Additive constant of the offset model (0 for LogLinear).
  double offset;
  std::size_t points;

  RateLaw law() const { return RateLaw{kappa, 1.0 / inv_tau, theta}; }
};

/// Fits the curve's usable entries (trusted, p in [10/N, 0.9] for MC; p <= 0.9 for exact).
/// theta_fixed = nullopt estimates theta with the LogLinear design.
RateFit rate_fit(const SmallBallCurve& curve, std::optional<double> theta_fixed = 0.0,
                 FitModel model = FitModel::PowerWithOffset);

/// Writes `{"kappa": ..., "inv_tau": ..., "theta": ..., "r2": ...}`.
void write_fit_json(std::ostream& out, const RateFit& fit);

struct TransferResult {
  double exponent;
  double log_exponent;
  std::optional<double> constant;
};

/// Constants entering the transfer constant: small deviation constant of R^H in the norm and
/// the Laplace-transform constant K.
struct TransferConstants {
  double kappa_norm;
  double laplace_k;
};

TransferResult transfer_bound(const RateLaw& assumed, double order, const NormSpec& norm,
                              std::optional<TransferConstants> constants = std::nullopt);

TransferResult converse_transfer(const ConverseRateLaw& assumed, double order, const NormSpec& norm);

/// Sup-norm and L2 small deviation constants of Brownian motion.
inline constexpr double kKappaSup = 1.2337005501361697;  // pi^2 / 8
inline constexpr double kKappaL2 = 0.125;

struct RegularityVerdict {
  bool pass;
  double slope;
  double bound;
};

/// PASS when the fitted exponent is at most 1/(M - beta - 1/p) + 0.1.
RegularityVerdict regularity_bound_check(const ProcessSpec& spec, double order, const NormSpec& norm,
                                         const SmallBallCurve& curve);

/// K with -log E exp(-lambda^2/2 ||X||_2^2) ~ K lambda^{1/(tau+1/2)} |log lambda|^{theta tau/(tau+1/2)}
/// for a process with -log P(||X||_2 <= eps) ~ kappa eps^{-1/tau}|log eps|^theta.
double debruijn_constant(const RateLaw& rate);

struct DeBruijnCheck {
  double max_rel_deviation;
  /// Least-squares K for the predicted shape.
  double fitted_k;
  /// Free log-log growth exponent of -log Laplace over the grid.
  double growth_exponent;
  /// Deviation above 5%: the predicted power law does not describe the transform.
  bool rejected;
};

DeBruijnCheck debruijn_check(const EigenSpectrum& spectrum, const RateLaw& rate, const std::vector<double>& lambdas);

}  // namespace pathreg

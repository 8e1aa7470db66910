#pragma once

#include <cstdint>
#include <vector>

#include "pathreg/norms.hpp"
#include "pathreg/process.hpp"
#include "pathreg/smallball.hpp"
#include "pathreg/spectral.hpp"

namespace pathreg {

/// X = comparison (BrownianMotion or RiemannLiouville(H)), Y = target, M = H + 1/2.
struct ChenLiFamily {
  ProcessSpec comparison;
  ProcessSpec target;
  NormSpec norm;
  /// Grid used for Monte Carlo and Nystrom steps.
  std::size_t grid_n = 512;

  /// M, derived from the comparison process.
  double order() const;
};

struct ChenLiResult {
  double lambda;
  double eps;
  double lhs;
  double lhs_stderr;
  /// P(||X|| <= lambda eps).
  double small_ball;
  /// E exp(-lambda^2/2 ||Y^{(M)}||_2^2).
  double laplace;
  double rhs;
  /// (lhs - rhs) / stderr(lhs).
  double margin;
  /// rhs underflowed or Y^{(M)} is not square integrable; the inequality holds trivially.
  bool trivial;
};

/// Spectrum of the covariance operator of Y^{(M)}.
EigenSpectrum derivative_spectrum(const ProcessSpec& target, double order, std::size_t grid_n);

/// Checks P(||Y|| <= eps) >= P(||X|| <= lambda eps) E exp(-lambda^2/2 ||Y^{(M)}||_2^2) for every
/// (eps, lambda) pair; the lhs for all eps comes from one Monte Carlo batch.
std::vector<ChenLiResult> chenli_bound(const ChenLiFamily& family, const std::vector<double>& eps_list,
                                       const std::vector<double>& lambdas, std::size_t n_samples,
                                       std::uint64_t seed);

/// Right-hand side alone.
double chenli_rhs(const ChenLiFamily& family, double eps, double lambda, std::size_t n_samples, std::uint64_t seed);

struct LambdaChoice {
  double lambda_star;
  double d_star;
  double rhs_at_star;
};

/// Minimizer over D of kappa_norm D^{-g} + K D^{1/(tau+1/2)}, g = 1/(H - beta - 1/p),
/// found by bisection on the derivative in log D.
double optimal_d(double kappa_norm, double laplace_k, double g, double tau);

/// lambda(eps) = D* eps^{-(tau+1/2)/(1/g+tau+1/2)} |log eps|^{-theta tau q/(g+q)}, q = 1/(tau+1/2),
/// with K from the de Bruijn correspondence for `rate` (the L2 rate of Y^{(M)}).
LambdaChoice optimize_lambda(const ChenLiFamily& family, double eps, const RateLaw& rate, double kappa_norm,
                             std::size_t n_samples, std::uint64_t seed);

/// -log of the modelled rhs: kappa_norm (lambda eps)^{-g} + K lambda^q |log lambda|^{theta tau q}.
double model_neg_log_rhs(const ChenLiFamily& family, double eps, double lambda, const RateLaw& rate,
                         double kappa_norm);

struct RemainderVerdict {
  double slope_x;
  double slope_y;
  bool pass;
};

/// Fits both MC curves on a shared grid and eps list; PASS when the slopes agree within tolerance.
RemainderVerdict remainder_term_check(const ProcessSpec& y, const ProcessSpec& x, const NormSpec& norm,
                                      const std::vector<double>& eps_list, std::size_t grid_n,
                                      std::size_t n_samples, std::uint64_t seed, double tolerance = 0.2);

void write_chenli_csv(std::ostream& out, const std::vector<ChenLiResult>& results);

}  // namespace pathreg

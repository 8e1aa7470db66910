#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "pathreg/process.hpp"

namespace pathreg {

/// Extrapolation lambda_k = coeff * (k - shift)^{-power} for indices past the retained list.
struct PowerTail {
  double coeff;
  double power;
  double shift = 0.0;

  double at(double k) const;
};

struct EigenSpectrum {
  /// Decreasing, nonnegative.
  std::vector<double> lambdas;
  /// Grid size of the Nystrom source; 0 for closed-form spectra.
  std::size_t source_n = 0;
  std::optional<PowerTail> tail;

  double total() const;
};

/// Top-k eigenvalues of cov / n, clipped below at 1e-14 * lambda_1. No tail attached.
EigenSpectrum nystrom_eigen(const CovMatrix& cov, const Grid& grid, std::size_t k);

/// nystrom_eigen plus a power tail fitted to the upper half of the retained indices
/// (omitted when the spectrum reaches the clipping floor).
EigenSpectrum kernel_spectrum(const Eigen::MatrixXd& kernel, const Grid& grid, std::size_t k);

/// kernel_spectrum of the spec's covariance matrix.
EigenSpectrum operator_spectrum(const ProcessSpec& spec, const Grid& grid, std::size_t k);

/// Exact Brownian spectrum (pi (k - 1/2))^{-2}, k = 1..count, with its exact tail.
EigenSpectrum brownian_spectrum(std::size_t count = 1024);

/// Fits coeff * k^{-power} to lambdas[first-1 .. last-1] in log-log least squares.
PowerTail fit_power_tail(const std::vector<double>& lambdas, std::size_t first, std::size_t last);

/// Finite-difference mixed derivative of the covariance at cell midpoints.
struct DerivedKernel {
  Grid grid;
  Eigen::MatrixXd matrix;
};

/// Cov(X(t_i) - X(t_{i-1}), X(t_j) - X(t_{j-1})) / h^2 off the diagonal; the diagonal is the
/// average of one-sided linear extrapolations along each row.
/// Requires a top-level Integrated or FracIntegrated spec of order >= 1.
DerivedKernel derivative_kernel(const ProcessSpec& spec, const Grid& grid);

/// E exp(-lambda^2/2 ||X||_2^2) = prod_k (1 + lambda^2 lambda_k)^{-1/2}, including the tail.
double laplace_transform_l2(const EigenSpectrum& spectrum, double lambda);

/// -log P(sum_k lambda_k xi_k^2 <= eps^2) by second-order Lugannani-Rice.
double l2_smallball(const EigenSpectrum& spectrum, double eps);

struct EigenRateFit {
  /// Slope of log lambda_k against log(k + shift), shift profiled.
  double slope;
  double shift;
  /// Plain least-squares slope of log lambda_k against log k.
  double plain_slope;
};

/// Decay exponent over indices k_min..k_max (1-based, inclusive).
EigenRateFit eigen_rate_fit(const EigenSpectrum& spectrum, std::size_t k_min, std::size_t k_max);

/// CSV with header `k,lambda`.
void write_spectrum_csv(std::ostream& out, const EigenSpectrum& spectrum);

}  // namespace pathreg

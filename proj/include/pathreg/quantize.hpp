#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "pathreg/spectral.hpp"

namespace pathreg {

struct ScalarCodebook {
  /// Sorted codewords.
  std::vector<double> levels;
  /// Mean squared error e(n)^2 for a standard normal input.
  double distortion;
};

/// Lloyd-optimal quantizer of N(0,1) with n levels; cached per n.
const ScalarCodebook& gauss_scalar_codebook(std::size_t n);

/// Product quantizer over Karhunen-Loeve coordinates: coordinate k is sqrt(lambda_k) xi_k,
/// quantized with gauss_scalar_codebook(levels[k]) scaled by sqrt(lambda_k).
struct Quantizer {
  std::vector<double> lambdas;
  std::vector<std::size_t> levels;
  /// Variance of the coordinates not represented in `lambdas` (spectrum tail).
  double residual = 0.0;

  /// sum_k log levels[k] in nats.
  double rate() const;
  /// Exact squared distortion sum_k lambda_k e(n_k)^2 + residual.
  double distortion_sq() const;
};

/// Greedy allocation under log #codebook <= budget (nats).
Quantizer product_quantizer(const EigenSpectrum& spectrum, double budget);

struct QuantError {
  double distortion;
  double std_err;
};

/// Monte Carlo estimate of (E min_codeword ||X - a||_2^2)^{1/2}. Coordinates with a single level
/// contribute their variance exactly; the rest are sampled.
QuantError quant_error(const Quantizer& quantizer, std::size_t n_mc, std::uint64_t seed);

/// Nearest codeword in the product codebook by exhaustive search (for checking separability).
double brute_force_sq_error(const Quantizer& quantizer, const std::vector<double>& coords);

/// Nearest codeword coordinate by coordinate.
double separable_sq_error(const Quantizer& quantizer, const std::vector<double>& coords);

struct QuantCurveEntry {
  double rate;
  double distortion;
  double std_err;
};

std::vector<QuantCurveEntry> quant_curve(const EigenSpectrum& spectrum, const std::vector<double>& budgets,
                                         std::size_t n_mc, std::uint64_t seed);

/// Least-squares slope of -log D against log r.
double quant_decay_exponent(const std::vector<QuantCurveEntry>& curve);

void write_quant_csv(std::ostream& out, const std::vector<QuantCurveEntry>& curve);

}  // namespace pathreg

#pragma once

#include "pathreg/spectral.hpp"

namespace pathreg::detail {

/// Sums over the spectrum (retained entries plus tail) at s < 1/(2 lambda_1):
/// log_sum = sum log(1 - 2 s l), and d1..d4 the first four derivatives of
/// K(s) = -log_sum / 2.
struct CumulantSums {
  double log_sum = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;
  double d4 = 0.0;
};

CumulantSums cumulant_sums(const EigenSpectrum& spectrum, double s, bool higher = true);

}  // namespace pathreg::detail

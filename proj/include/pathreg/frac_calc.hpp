#pragma once

#include <optional>
#include <vector>

#include "pathreg/process.hpp"

namespace pathreg {

/// Gamma-normalized Riemann-Liouville integral of order `order` on the path's grid.
/// Integer orders are repeated trapezoid integration; other orders are composed of equal steps <= 1/2.
SamplePath frac_integral(const SamplePath& f, double order);

/// Inverse of frac_integral. The value at t_0 is not determined by F; pass it as `f0`
/// when known, otherwise it is fixed by requiring f to be linear on [t_0, t_2].
SamplePath frac_derivative(const SamplePath& F, double order, std::optional<double> f0 = std::nullopt);

/// Sup-norm distance between I^b I^a f and I^{a+b} f on the grid.
double semigroup_check(const SamplePath& f, double a, double b);

}  // namespace pathreg

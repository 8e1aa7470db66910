#pragma once

#include <variant>
#include <vector>

#include "pathreg/process.hpp"

namespace pathreg::detail {

/// coeff * (t - u)^exponent
struct PowerTerm {
  double coeff;
  double exponent;
};

/// X(t) = int_0^t sum_k c_k (t-u)^{e_k} dB(u).
struct VolterraAtom {
  std::vector<PowerTerm> terms;
};

/// Gamma-normalized fractional integral of order `order` (0 = none) of standard fBM.
struct FbmAtom {
  double hurst;
  double order;
};

struct Atom {
  double weight;
  std::variant<VolterraAtom, FbmAtom> kernel;
};

/// Covariance of a Gaussian spec written as a signed sum of kernel atoms.
/// Nested integrations are collapsed, so each atom carries a single total order.
class CovarianceModel {
 public:
  explicit CovarianceModel(const ProcessSpec& spec);

  double operator()(double s, double t) const;

  /// True when the process is standard Brownian motion.
  bool is_brownian() const;

  const std::vector<Atom>& atoms() const { return atoms_; }

 private:
  std::vector<Atom> atoms_;
};

}  // namespace pathreg::detail

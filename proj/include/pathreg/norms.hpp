#pragma once

#include <span>
#include <string>
#include <variant>

#include "pathreg/process.hpp"

namespace pathreg {

/// L_p with p in [1, inf]; use std::numeric_limits<double>::infinity() for the sup-norm.
struct LpNorm {
  double p;
};
struct HolderNorm {
  double eta;
};
/// Squared L_2 norm, used for RKHS-type terms.
struct L2SquaredNorm {};

class NormSpec {
 public:
  using Variant = std::variant<LpNorm, HolderNorm, L2SquaredNorm>;

  static NormSpec lp(double p);
  static NormSpec sup();
  static NormSpec holder(double eta);
  static NormSpec l2_squared();

  const Variant& variant() const { return value_; }
  bool is_sup() const;
  std::string describe() const;

 private:
  explicit NormSpec(Variant v) : value_(v) {}
  Variant value_;
};

/// Self-similarity index beta and pseudo-additivity index p; p = inf is returned as infinity.
struct BetaP {
  double beta;
  double p;
  /// 1/p with 1/inf = 0.
  double inv_p() const;
};

BetaP beta_p(const NormSpec& norm);

double eval_norm(const SamplePath& path, const NormSpec& norm);

/// Same as eval_norm on raw grid values x(t_0..t_n) with spacing h.
double eval_norm(std::span<const double> values, double h, const NormSpec& norm);

}  // namespace pathreg

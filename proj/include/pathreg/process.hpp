#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace pathreg {

/// Uniform partition t_i = i/n, i = 0..n, of [0, 1].
class Grid {
 public:
  explicit Grid(std::size_t n);

  std::size_t n() const { return n_; }
  double spacing() const { return 1.0 / static_cast<double>(n_); }
  double point(std::size_t i) const { return static_cast<double>(i) / static_cast<double>(n_); }
  /// All n + 1 points including t_0 = 0.
  std::vector<double> points() const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t n_;
};

class ProcessSpec;
using SpecPtr = std::shared_ptr<const ProcessSpec>;

struct BrownianMotion {};
struct FractionalBm {
  double hurst;
};
struct RiemannLiouville {
  double hurst;
};
/// m-fold ordinary integral of the base process.
struct Integrated {
  SpecPtr base;
  int order;
};
/// Gamma-normalized fractional integral of order M of the base process.
struct FracIntegrated {
  SpecPtr base;
  double order;
};
/// R^H - B^H with both driven by the same Brownian motion on [0, 1].
struct FbmRlDifference {
  double hurst;
};
/// R^H(t) + sum_n a_n R^{H+n}(t), one common driver.
struct GaussianConvolution {
  double hurst;
  std::vector<double> coeffs;
};
/// A^{1/2} B^H with A positive (alpha/2)-stable independent of B^H.
struct StableScaledFbm {
  double hurst;
  double alpha;
};

/// Closed set of process families. Immutable; nested specs are shared.
class ProcessSpec {
 public:
  using Variant = std::variant<BrownianMotion, FractionalBm, RiemannLiouville, Integrated, FracIntegrated,
                               FbmRlDifference, GaussianConvolution, StableScaledFbm>;

  static ProcessSpec brownian();
  static ProcessSpec fbm(double hurst);
  static ProcessSpec riemann_liouville(double hurst);
  static ProcessSpec integrated(const ProcessSpec& base, int order);
  static ProcessSpec frac_integrated(const ProcessSpec& base, double order);
  static ProcessSpec fbm_rl_difference(double hurst);
  static ProcessSpec gaussian_convolution(double hurst, std::vector<double> coeffs);
  static ProcessSpec stable_scaled_fbm(double hurst, double alpha);

  const Variant& variant() const { return value_; }
  template <class T>
  const T* get_if() const {
    return std::get_if<T>(&value_);
  }
  bool is_gaussian() const { return !std::holds_alternative<StableScaledFbm>(value_); }

  /// Human-readable form, e.g. "Integrated(FractionalBm(0.7), 1)".
  std::string describe() const;

 private:
  explicit ProcessSpec(Variant v) : value_(std::move(v)) {}
  Variant value_;
};

/// Covariances R(t_i, t_j) on the interior points t_1..t_n.
using CovMatrix = Eigen::MatrixXd;

/// Discretized path. values[i] is X(t_i) for i = 0..n; sampled paths have values[0] = 0.
struct SamplePath {
  Grid grid;
  std::vector<double> values;

  SamplePath(Grid g, std::vector<double> v);
};

/// E X(s) X(t). Throws DomainError outside [0,1], UnsupportedSpecError for StableScaledFbm.
double covariance(const ProcessSpec& spec, double s, double t);

/// Covariance matrix on the interior grid points.
CovMatrix build_cov(const ProcessSpec& spec, const Grid& grid);

/// Draws `count` i.i.d. paths; a deterministic function of all arguments.
std::vector<SamplePath> sample_paths(const ProcessSpec& spec, const Grid& grid, std::size_t count,
                                     std::uint64_t seed);

/// Positive stable draws with E exp(-uA) = exp(-u^alpha_half), alpha_half in (0,1).
std::vector<double> sample_positive_stable(double alpha_half, std::size_t count, std::uint64_t seed);

/// Variance constant of the Mandelbrot-van Ness integral without normalization:
/// Var(R^H(t) + int_{-inf}^0 ((t-s)^{H-1/2} - (-s)^{H-1/2}) dB(s)) = c * t^{2H}.
double mvn_variance_constant(double hurst);

/// CSV with header `t,path_0,...,path_{k-1}`, one row per grid point.
void write_paths_csv(std::ostream& out, const std::vector<SamplePath>& paths);

}  // namespace pathreg

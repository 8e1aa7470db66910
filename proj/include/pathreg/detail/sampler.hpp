#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Dense>

#include "pathreg/parallel.hpp"
#include "pathreg/process.hpp"

namespace pathreg::detail {

/// Reusable exact-covariance sampler. Factorizes once; chunk draws are independent.
class PathSampler {
 public:
  PathSampler(const ProcessSpec& spec, const Grid& grid);

  const Grid& grid() const { return grid_; }
  bool brownian() const { return brownian_; }

  /// Fills `out` (n x count) with interior values of `count` draws from stream (seed, chunk).
  void sample_chunk(std::uint64_t seed, std::uint64_t chunk, std::size_t count, Eigen::MatrixXd& out) const;

 private:
  Grid grid_;
  bool brownian_ = false;
  Eigen::MatrixXd factor_;
  std::optional<double> stable_index_;
};

/// Lower Cholesky factor with the diagonal jitter ladder.
Eigen::MatrixXd jittered_cholesky(const CovMatrix& cov);

/// One positive stable draw with Laplace transform exp(-u^a).
double draw_positive_stable(double a, Engine& engine);

}  // namespace pathreg::detail

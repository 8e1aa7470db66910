#include <cmath>
#include <numbers>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "pathreg/detail/covariance_model.hpp"
#include "pathreg/detail/sampler.hpp"
#include "pathreg/errors.hpp"
#include "pathreg/process.hpp"

namespace pathreg {

namespace {

void check_time(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("covariance: time outside [0,1]");
}

}  // namespace

double covariance(const ProcessSpec& spec, double s, double t) {
  check_time(s);
  check_time(t);
  return detail::CovarianceModel(spec)(s, t);
}

CovMatrix build_cov(const ProcessSpec& spec, const Grid& grid) {
  const detail::CovarianceModel model(spec);
  const auto n = static_cast<Eigen::Index>(grid.n());
  CovMatrix cov(n, n);
  parallel_for(grid.n(), [&](std::size_t row) {
    const auto i = static_cast<Eigen::Index>(row);
    const double ti = grid.point(row + 1);
    for (Eigen::Index j = 0; j <= i; ++j) cov(j, i) = model(grid.point(static_cast<std::size_t>(j) + 1), ti);
  });
  cov.triangularView<Eigen::StrictlyLower>() = cov.transpose();
  return cov;
}

namespace detail {

Eigen::MatrixXd jittered_cholesky(const CovMatrix& cov) {
  const double n = static_cast<double>(cov.rows());
  const double scale = cov.trace() / n;
  double jitter = 0.0;
  while (true) {
    CovMatrix work = cov;
    if (jitter > 0.0) work.diagonal().array() += jitter;
    Eigen::LLT<CovMatrix> llt(work);
    if (llt.info() == Eigen::Success) {
      Eigen::MatrixXd factor = llt.matrixL();
      if (factor.allFinite()) return factor;
    }
    jitter = (jitter == 0.0) ? 1e-12 * scale : jitter * 10.0;
    if (jitter > 1e-6 * scale * (1.0 + 1e-9)) {
      throw NumericalError("Cholesky factorization failed at maximum jitter");
    }
  }
}

double draw_positive_stable(double a, Engine& engine) {
  boost::random::uniform_01<double> uniform;
  boost::random::exponential_distribution<double> exponential(1.0);
  double u = 0.0;
  do {
    u = std::numbers::pi * uniform(engine);
  } while (u <= 0.0);
  double w = 0.0;
  do {
    w = exponential(engine);
  } while (w <= 0.0);
  const double log_a = std::log(std::sin(a * u)) - std::log(std::sin(u)) / a +
                       (1.0 - a) / a * (std::log(std::sin((1.0 - a) * u)) - std::log(w));
  return std::exp(log_a);
}

PathSampler::PathSampler(const ProcessSpec& spec, const Grid& grid) : grid_(grid) {
  const ProcessSpec* gaussian = &spec;
  ProcessSpec fbm_part = ProcessSpec::brownian();
  if (const auto* stable = spec.get_if<StableScaledFbm>()) {
    stable_index_ = 0.5 * stable->alpha;
    fbm_part = ProcessSpec::fbm(stable->hurst);
    gaussian = &fbm_part;
  }
  const CovarianceModel model(*gaussian);
  brownian_ = model.is_brownian();
  if (!brownian_) factor_ = jittered_cholesky(build_cov(*gaussian, grid));
}

void PathSampler::sample_chunk(std::uint64_t seed, std::uint64_t chunk, std::size_t count,
                               Eigen::MatrixXd& out) const {
  const auto n = static_cast<Eigen::Index>(grid_.n());
  const auto cols = static_cast<Eigen::Index>(count);
  Engine engine = make_stream(seed, chunk);
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(cols);
  if (stable_index_) {
    for (Eigen::Index j = 0; j < cols; ++j) scale[j] = std::sqrt(draw_positive_stable(*stable_index_, engine));
  }
  boost::random::normal_distribution<double> normal;
  Eigen::MatrixXd z(n, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) z(i, j) = normal(engine);
  }
  if (brownian_) {
    const double step = std::sqrt(grid_.spacing());
    out.resize(n, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += step * z(i, j);
        out(i, j) = acc;
      }
    }
  } else {
    out.noalias() = factor_.triangularView<Eigen::Lower>() * z;
  }
  if (stable_index_) out = out * scale.asDiagonal();
}

}  // namespace detail

std::vector<SamplePath> sample_paths(const ProcessSpec& spec, const Grid& grid, std::size_t count,
                                     std::uint64_t seed) {
  if (count == 0) throw DomainError("sample_paths: count must be positive");
  const detail::PathSampler sampler(spec, grid);
  const std::size_t chunks = (count + kChunkSize - 1) / kChunkSize;
  std::vector<std::vector<double>> values(count);
  parallel_for(chunks, [&](std::size_t chunk) {
    const std::size_t first = chunk * kChunkSize;
    const std::size_t size = std::min(kChunkSize, count - first);
    Eigen::MatrixXd block;
    sampler.sample_chunk(seed, chunk, size, block);
    for (std::size_t k = 0; k < size; ++k) {
      auto& v = values[first + k];
      v.assign(grid.n() + 1, 0.0);
      for (std::size_t i = 0; i < grid.n(); ++i) v[i + 1] = block(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
    }
  });
  std::vector<SamplePath> paths;
  paths.reserve(count);
  for (auto& v : values) paths.emplace_back(grid, std::move(v));
  return paths;
}

std::vector<double> sample_positive_stable(double alpha_half, std::size_t count, std::uint64_t seed) {
  if (!(alpha_half > 0.0 && alpha_half < 1.0)) throw DomainError("sample_positive_stable: index must lie in (0,1)");
  std::vector<double> draws(count);
  const std::size_t chunks = (count + kChunkSize - 1) / kChunkSize;
  parallel_for(chunks, [&](std::size_t chunk) {
    Engine engine = make_stream(seed, chunk);
    const std::size_t first = chunk * kChunkSize;
    const std::size_t last = std::min(count, first + kChunkSize);
    for (std::size_t k = first; k < last; ++k) draws[k] = detail::draw_positive_stable(alpha_half, engine);
  });
  return draws;
}

}  // namespace pathreg

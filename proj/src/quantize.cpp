#include "pathreg/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <ostream>

#include <boost/math/special_functions/erf.hpp>
#include <boost/random/normal_distribution.hpp>

#include "pathreg/csv.hpp"
#include "pathreg/errors.hpp"
#include "pathreg/parallel.hpp"

namespace pathreg {

namespace {

double pdf(double x) { return std::isinf(x) ? 0.0 : std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

// P(a < Z < b) without cancellation in either tail.
double mass(double a, double b) {
  if (a >= 0.0) return 0.5 * (std::erfc(a / std::numbers::sqrt2) - std::erfc(b / std::numbers::sqrt2));
  if (b <= 0.0) return 0.5 * (std::erfc(-b / std::numbers::sqrt2) - std::erfc(-a / std::numbers::sqrt2));
  return 1.0 - 0.5 * (std::erfc(-a / std::numbers::sqrt2) + std::erfc(b / std::numbers::sqrt2));
}

struct Cells {
  std::vector<double> lower, upper;
};

Cells cells_of(const std::vector<double>& c) {
  const std::size_t n = c.size();
  Cells cells{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    cells.lower[i] = i == 0 ? -INFINITY : 0.5 * (c[i - 1] + c[i]);
    cells.upper[i] = i + 1 == n ? INFINITY : 0.5 * (c[i] + c[i + 1]);
  }
  return cells;
}

std::vector<double> centroids(const std::vector<double>& c) {
  const Cells cells = cells_of(c);
  std::vector<double> out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    out[i] = (pdf(cells.lower[i]) - pdf(cells.upper[i])) / mass(cells.lower[i], cells.upper[i]);
  }
  return out;
}

ScalarCodebook lloyd(std::size_t n) {
  if (n == 1) return ScalarCodebook{{0.0}, 1.0};
  std::vector<double> c(n);
  // Companding start: quantiles of N(0, 3).
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    c[i] = std::sqrt(3.0) * std::numbers::sqrt2 * boost::math::erf_inv(2.0 * u - 1.0);
  }
  for (int it = 0; it < 20; ++it) c = centroids(c);

  // Newton on c = T(c); the Jacobian of T is tridiagonal.
  const auto m = static_cast<Eigen::Index>(n);
  for (int it = 0; it < 100; ++it) {
    const std::vector<double> t = centroids(c);
    Eigen::VectorXd f(m);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      f[static_cast<Eigen::Index>(i)] = t[i] - c[i];
      worst = std::max(worst, std::abs(t[i] - c[i]));
    }
    if (worst < 1e-11) {
      const Cells cells = cells_of(c);
      double explained = 0.0;
      for (std::size_t i = 0; i < n; ++i) explained += mass(cells.lower[i], cells.upper[i]) * c[i] * c[i];
      return ScalarCodebook{c, 1.0 - explained};
    }
    const Cells cells = cells_of(c);
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      const double p = mass(cells.lower[i], cells.upper[i]);
      const double da = pdf(cells.lower[i]) * (t[i] - cells.lower[i]) / p;
      const double db = pdf(cells.upper[i]) * (cells.upper[i] - t[i]) / p;
      if (i > 0) {
        jac(r, r - 1) += 0.5 * da;
        jac(r, r) += 0.5 * da;
      }
      if (i + 1 < n) {
        jac(r, r) += 0.5 * db;
        jac(r, r + 1) += 0.5 * db;
      }
      jac(r, r) -= 1.0;
    }
    const Eigen::VectorXd step = jac.partialPivLu().solve(-f);
    for (std::size_t i = 0; i < n; ++i) c[i] += step[static_cast<Eigen::Index>(i)];
    if (!std::is_sorted(c.begin(), c.end())) throw NumericalError("Lloyd iteration lost ordering");
  }
  throw NumericalError("Lloyd iteration did not converge for n = " + std::to_string(n));
}

std::size_t nearest(const std::vector<double>& levels, double x) {
  const auto it = std::lower_bound(levels.begin(), levels.end(), x);
  if (it == levels.begin()) return 0;
  if (it == levels.end()) return levels.size() - 1;
  const std::size_t hi = static_cast<std::size_t>(it - levels.begin());
  return (x - levels[hi - 1] <= levels[hi] - x) ? hi - 1 : hi;
}

}  // namespace

const ScalarCodebook& gauss_scalar_codebook(std::size_t n) {
  if (n == 0) throw DomainError("gauss_scalar_codebook: need at least one level");
  static std::mutex mutex;
  static std::map<std::size_t, std::unique_ptr<ScalarCodebook>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<ScalarCodebook>(lloyd(n));
  return *slot;
}

double Quantizer::rate() const {
  double r = 0.0;
  for (std::size_t n : levels) r += std::log(static_cast<double>(n));
  return r;
}

double Quantizer::distortion_sq() const {
  double d = residual;
  for (std::size_t k = 0; k < lambdas.size(); ++k) d += lambdas[k] * gauss_scalar_codebook(levels[k]).distortion;
  return d;
}

Quantizer product_quantizer(const EigenSpectrum& spectrum, double budget) {
  if (!(budget >= 0.0)) throw DomainError("product_quantizer: budget must be nonnegative");
  Quantizer q;
  for (double l : spectrum.lambdas) {
    if (l > 0.0) q.lambdas.push_back(l);
  }
  double retained = 0.0;
  for (double l : q.lambdas) retained += l;
  q.residual = std::max(spectrum.total() - retained, 0.0);
  q.levels.assign(q.lambdas.size(), 1);
  double spent = 0.0;
  constexpr double kSlack = 1e-12;
  while (true) {
    std::size_t best = q.lambdas.size();
    double best_ratio = 0.0;
    bool fresh_seen = false;
    for (std::size_t k = 0; k < q.lambdas.size(); ++k) {
      const std::size_t n = q.levels[k];
      // Unused coordinates share codebooks, so only the leading one needs evaluating.
      if (n == 1) {
        if (fresh_seen) continue;
        fresh_seen = true;
      }
      const double cost = std::log(static_cast<double>(n + 1) / static_cast<double>(n));
      if (spent + cost > budget + kSlack) continue;
      const double gain =
          q.lambdas[k] * (gauss_scalar_codebook(n).distortion - gauss_scalar_codebook(n + 1).distortion);
      if (gain / cost > best_ratio) {
        best_ratio = gain / cost;
        best = k;
      }
    }
    if (best == q.lambdas.size()) break;
    spent += std::log(static_cast<double>(q.levels[best] + 1) / static_cast<double>(q.levels[best]));
    ++q.levels[best];
  }
  return q;
}

double separable_sq_error(const Quantizer& quantizer, const std::vector<double>& coords) {
  double sum = 0.0;
  for (std::size_t k = 0; k < coords.size(); ++k) {
    const auto& levels = gauss_scalar_codebook(quantizer.levels[k]).levels;
    const double s = std::sqrt(quantizer.lambdas[k]);
    const double diff = coords[k] - s * levels[nearest(levels, coords[k] / s)];
    sum += diff * diff;
  }
  return sum;
}

double brute_force_sq_error(const Quantizer& quantizer, const std::vector<double>& coords) {
  const std::size_t d = coords.size();
  std::vector<std::size_t> index(d, 0);
  double best = INFINITY;
  while (true) {
    double sum = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double c = std::sqrt(quantizer.lambdas[k]) * gauss_scalar_codebook(quantizer.levels[k]).levels[index[k]];
      sum += (coords[k] - c) * (coords[k] - c);
    }
    best = std::min(best, sum);
    std::size_t k = 0;
    while (k < d && ++index[k] == quantizer.levels[k]) index[k++] = 0;
    if (k == d) break;
  }
  return best;
}

QuantError quant_error(const Quantizer& quantizer, std::size_t n_mc, std::uint64_t seed) {
  if (n_mc == 0) throw DomainError("quant_error: n_mc must be positive");
  double exact = quantizer.residual;
  std::vector<std::size_t> active;
  for (std::size_t k = 0; k < quantizer.lambdas.size(); ++k) {
    if (quantizer.levels[k] == 1) {
      exact += quantizer.lambdas[k];
    } else {
      active.push_back(k);
    }
  }
  if (active.empty()) return QuantError{std::sqrt(exact), 0.0};

  const std::size_t chunks = (n_mc + kChunkSize - 1) / kChunkSize;
  std::vector<double> sums(chunks, 0.0), sums_sq(chunks, 0.0);
  parallel_for(chunks, [&](std::size_t chunk) {
    Engine engine = make_stream(seed, chunk);
    boost::random::normal_distribution<double> normal;
    const std::size_t count = std::min(kChunkSize, n_mc - chunk * kChunkSize);
    for (std::size_t j = 0; j < count; ++j) {
      double err = 0.0;
      for (std::size_t k : active) {
        const double xi = normal(engine);
        const auto& levels = gauss_scalar_codebook(quantizer.levels[k]).levels;
        const double diff = xi - levels[nearest(levels, xi)];
        err += quantizer.lambdas[k] * diff * diff;
      }
      sums[chunk] += err;
      sums_sq[chunk] += err * err;
    }
  });
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    sum += sums[c];
    sum_sq += sums_sq[c];
  }
  const double total = static_cast<double>(n_mc);
  const double mean = sum / total;
  const double var = std::max(sum_sq / total - mean * mean, 0.0);
  const double d = std::sqrt(mean + exact);
  return QuantError{d, std::sqrt(var / total) / (2.0 * d)};
}

std::vector<QuantCurveEntry> quant_curve(const EigenSpectrum& spectrum, const std::vector<double>& budgets,
                                         std::size_t n_mc, std::uint64_t seed) {
  std::vector<double> sorted = budgets;
  std::sort(sorted.begin(), sorted.end());
  std::vector<QuantCurveEntry> out;
  for (double r : sorted) {
    const QuantError e = quant_error(product_quantizer(spectrum, r), n_mc, seed);
    out.push_back(QuantCurveEntry{r, e.distortion, e.std_err});
  }
  return out;
}

double quant_decay_exponent(const std::vector<QuantCurveEntry>& curve) {
  std::vector<double> x, y;
  for (const auto& e : curve) {
    if (e.rate <= 0.0) continue;
    x.push_back(std::log(e.rate));
    y.push_back(-std::log(e.distortion));
  }
  if (x.size() < 2) throw FitError("quant_decay_exponent: need two positive rates");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / sxx;
}

void write_quant_csv(std::ostream& out, const std::vector<QuantCurveEntry>& curve) {
  out << "r,distortion,stderr\n";
  for (const auto& e : curve) {
    out << format_number(e.rate) << ',' << format_number(e.distortion) << ',' << format_number(e.std_err) << '\n';
  }
}

}  // namespace pathreg

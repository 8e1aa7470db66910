#include "pathreg/process.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "pathreg/csv.hpp"
#include "pathreg/errors.hpp"

namespace pathreg {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw DomainError(message);
}

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

bool in_unit_interval(double h) { return std::isfinite(h) && h > 0.0 && h < 1.0; }

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

Grid::Grid(std::size_t n) : n_(n) { require(n >= 1, "Grid: n must be positive"); }

std::vector<double> Grid::points() const {
  std::vector<double> pts(n_ + 1);
  for (std::size_t i = 0; i <= n_; ++i) pts[i] = point(i);
  return pts;
}

ProcessSpec ProcessSpec::brownian() { return ProcessSpec(BrownianMotion{}); }

ProcessSpec ProcessSpec::fbm(double hurst) {
  require(in_unit_interval(hurst), "FractionalBm: H must lie in (0,1)");
  return ProcessSpec(FractionalBm{hurst});
}

ProcessSpec ProcessSpec::riemann_liouville(double hurst) {
  require(finite_positive(hurst), "RiemannLiouville: H must be positive");
  return ProcessSpec(RiemannLiouville{hurst});
}

ProcessSpec ProcessSpec::integrated(const ProcessSpec& base, int order) {
  require(order >= 1, "Integrated: order must be a positive integer");
  require(base.is_gaussian(), "Integrated: base must be Gaussian");
  return ProcessSpec(Integrated{std::make_shared<const ProcessSpec>(base), order});
}

ProcessSpec ProcessSpec::frac_integrated(const ProcessSpec& base, double order) {
  require(finite_positive(order), "FracIntegrated: order must be positive and finite");
  require(base.is_gaussian(), "FracIntegrated: base must be Gaussian");
  return ProcessSpec(FracIntegrated{std::make_shared<const ProcessSpec>(base), order});
}

ProcessSpec ProcessSpec::fbm_rl_difference(double hurst) {
  require(in_unit_interval(hurst) && hurst != 0.5, "FbmRlDifference: H must lie in (0,1) and differ from 1/2");
  return ProcessSpec(FbmRlDifference{hurst});
}

ProcessSpec ProcessSpec::gaussian_convolution(double hurst, std::vector<double> coeffs) {
  require(finite_positive(hurst), "GaussianConvolution: H must be positive");
  for (double a : coeffs) require(std::isfinite(a), "GaussianConvolution: coefficients must be finite");
  return ProcessSpec(GaussianConvolution{hurst, std::move(coeffs)});
}

ProcessSpec ProcessSpec::stable_scaled_fbm(double hurst, double alpha) {
  require(in_unit_interval(hurst), "StableScaledFbm: H must lie in (0,1)");
  require(std::isfinite(alpha) && alpha > 0.0 && alpha < 2.0, "StableScaledFbm: alpha must lie in (0,2)");
  return ProcessSpec(StableScaledFbm{hurst, alpha});
}

std::string ProcessSpec::describe() const {
  return std::visit(
      Overloaded{
          [](const BrownianMotion&) { return std::string("BrownianMotion"); },
          [](const FractionalBm& f) { return "FractionalBm(" + format_number(f.hurst) + ")"; },
          [](const RiemannLiouville& r) { return "RiemannLiouville(" + format_number(r.hurst) + ")"; },
          [](const Integrated& i) { return "Integrated(" + i.base->describe() + ", " + std::to_string(i.order) + ")"; },
          [](const FracIntegrated& i) {
            return "FracIntegrated(" + i.base->describe() + ", " + format_number(i.order) + ")";
          },
          [](const FbmRlDifference& d) { return "FbmRlDifference(" + format_number(d.hurst) + ")"; },
          [](const GaussianConvolution& g) {
            std::string s = "GaussianConvolution(" + format_number(g.hurst) + ", [";
            for (std::size_t k = 0; k < g.coeffs.size(); ++k) {
              if (k > 0) s += ", ";
              s += format_number(g.coeffs[k]);
            }
            return s + "])";
          },
          [](const StableScaledFbm& s) {
            return "StableScaledFbm(" + format_number(s.hurst) + ", " + format_number(s.alpha) + ")";
          },
      },
      value_);
}

SamplePath::SamplePath(Grid g, std::vector<double> v) : grid(g), values(std::move(v)) {
  require(values.size() == grid.n() + 1, "SamplePath: need n + 1 values");
  for (double x : values) require(std::isfinite(x), "SamplePath: values must be finite");
}

double mvn_variance_constant(double hurst) {
  require(in_unit_interval(hurst), "mvn_variance_constant: H must lie in (0,1)");
  const double g = std::tgamma(hurst + 0.5);
  return g * g / (std::tgamma(2.0 * hurst + 1.0) * std::sin(std::numbers::pi * hurst));
}

void write_paths_csv(std::ostream& out, const std::vector<SamplePath>& paths) {
  out << 't';
  for (std::size_t k = 0; k < paths.size(); ++k) out << ",path_" << k;
  out << '\n';
  if (paths.empty()) return;
  const Grid grid = paths.front().grid;
  for (const auto& p : paths) require(p.grid == grid, "write_paths_csv: paths must share a grid");
  std::vector<double> row(paths.size() + 1);
  for (std::size_t i = 0; i <= grid.n(); ++i) {
    row[0] = grid.point(i);
    for (std::size_t k = 0; k < paths.size(); ++k) row[k + 1] = paths[k].values[i];
    write_csv_row(out, row);
  }
}

}  // namespace pathreg

#include "pathreg/detail/covariance_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "pathreg/errors.hpp"
#include "pathreg/quadrature.hpp"

namespace pathreg::detail {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

VolterraAtom brownian_kernel() { return VolterraAtom{{PowerTerm{1.0, 0.0}}}; }

std::vector<Atom> build_atoms(const ProcessSpec& spec);

std::vector<Atom> integrate_atoms(std::vector<Atom> atoms, double order) {
  for (auto& atom : atoms) {
    std::visit(Overloaded{
                   [order](VolterraAtom& v) {
                     // I^M (t-u)^e = Gamma(e+1)/Gamma(e+M+1) (t-u)^{e+M}
                     for (auto& term : v.terms) {
                       term.coeff *= std::exp(std::lgamma(term.exponent + 1.0) -
                                              std::lgamma(term.exponent + order + 1.0));
                       term.exponent += order;
                     }
                   },
                   [order](FbmAtom& f) { f.order += order; },
               },
               atom.kernel);
  }
  return atoms;
}

std::vector<Atom> build_atoms(const ProcessSpec& spec) {
  return std::visit(
      Overloaded{
          [](const BrownianMotion&) { return std::vector<Atom>{{1.0, brownian_kernel()}}; },
          [](const FractionalBm& f) {
            if (f.hurst == 0.5) return std::vector<Atom>{{1.0, brownian_kernel()}};
            return std::vector<Atom>{{1.0, FbmAtom{f.hurst, 0.0}}};
          },
          [](const RiemannLiouville& r) {
            return std::vector<Atom>{{1.0, VolterraAtom{{PowerTerm{1.0, r.hurst - 0.5}}}}};
          },
          [](const Integrated& i) { return integrate_atoms(build_atoms(*i.base), i.order); },
          [](const FracIntegrated& i) { return integrate_atoms(build_atoms(*i.base), i.order); },
          [](const FbmRlDifference& d) {
            // Cov(R - B) = Cov(B) + Cov(R) - 2 E R(s)R(t): the part of B driven on
            // (-inf, 0] is independent of R.
            return std::vector<Atom>{{mvn_variance_constant(d.hurst), FbmAtom{d.hurst, 0.0}},
                                     {-1.0, VolterraAtom{{PowerTerm{1.0, d.hurst - 0.5}}}}};
          },
          [](const GaussianConvolution& g) {
            VolterraAtom v{{PowerTerm{1.0, g.hurst - 0.5}}};
            for (std::size_t n = 0; n < g.coeffs.size(); ++n) {
              if (g.coeffs[n] != 0.0) v.terms.push_back(PowerTerm{g.coeffs[n], g.hurst - 0.5 + double(n + 1)});
            }
            return std::vector<Atom>{{1.0, std::move(v)}};
          },
          [](const StableScaledFbm&) -> std::vector<Atom> {
            throw UnsupportedSpecError("StableScaledFbm is conditionally Gaussian; no covariance kernel");
          },
      },
      spec.variant());
}

double volterra_cov(const VolterraAtom& v, double s, double t) {
  const double lo = std::min(s, t);
  const double d = std::abs(t - s);
  double sum = 0.0;
  for (const auto& near : v.terms) {
    for (const auto& far : v.terms) {
      // v = min - u; the smaller time carries `near`, the larger one `far`.
      sum += near.coeff * far.coeff * quad::power_pair_integral(near.exponent, far.exponent, lo, d);
    }
  }
  return sum;
}

// Gamma-normalized I^M_s I^M_t |u - v|^q.
double abs_power_double_integral(double q, double order, double s, double t) {
  if (order == 1.0) {
    return (std::pow(s, q + 2.0) + std::pow(t, q + 2.0) - std::pow(std::abs(t - s), q + 2.0)) /
           ((q + 1.0) * (q + 2.0));
  }
  const double inv_gamma = std::exp(-std::lgamma(order));
  const double beta_qm = std::exp(std::lgamma(order) + std::lgamma(q + 1.0) - std::lgamma(order + q + 1.0));
  auto inner = [&](double u) {
    // (1/Gamma(M)) int_0^t (t - v)^{M-1} |u - v|^q dv
    if (u < t) {
      return inv_gamma * (beta_qm * std::pow(t - u, order + q) + quad::power_pair_integral(q, order - 1.0, u, t - u));
    }
    return inv_gamma * quad::power_pair_integral(order - 1.0, q, t, u - t);
  };
  const std::array<double, 3> singular{0.0, t, s};
  return inv_gamma *
         quad::graded_integral([&](double u) { return std::pow(s - u, order - 1.0) * inner(u); }, 0.0, s, singular);
}

double fbm_cov(const FbmAtom& f, double s, double t) {
  const double q = 2.0 * f.hurst;
  if (f.order == 0.0) {
    return 0.5 * (std::pow(s, q) + std::pow(t, q) - std::pow(std::abs(t - s), q));
  }
  if (s == 0.0 || t == 0.0) return 0.0;
  const double m = f.order;
  const double ones_s = std::pow(s, m) / std::tgamma(m + 1.0);
  const double ones_t = std::pow(t, m) / std::tgamma(m + 1.0);
  const double pow_factor = std::exp(std::lgamma(q + 1.0) - std::lgamma(q + m + 1.0));
  const double pow_s = pow_factor * std::pow(s, q + m);
  const double pow_t = pow_factor * std::pow(t, q + m);
  return 0.5 * (pow_s * ones_t + ones_s * pow_t - abs_power_double_integral(q, m, s, t));
}

}  // namespace

CovarianceModel::CovarianceModel(const ProcessSpec& spec) : atoms_(build_atoms(spec)) {}

double CovarianceModel::operator()(double s, double t) const {
  if (s == 0.0 || t == 0.0) return 0.0;
  double sum = 0.0;
  for (const auto& atom : atoms_) {
    const double value = std::visit(Overloaded{
                                        [s, t](const VolterraAtom& v) { return volterra_cov(v, s, t); },
                                        [s, t](const FbmAtom& f) { return fbm_cov(f, s, t); },
                                    },
                                    atom.kernel);
    sum += atom.weight * value;
  }
  return sum;
}

bool CovarianceModel::is_brownian() const {
  if (atoms_.size() != 1 || atoms_[0].weight != 1.0) return false;
  const auto* v = std::get_if<VolterraAtom>(&atoms_[0].kernel);
  return v != nullptr && v->terms.size() == 1 && v->terms[0].coeff == 1.0 && v->terms[0].exponent == 0.0;
}

}  // namespace pathreg::detail

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "pathreg/chenli.hpp"
#include "pathreg/frac_calc.hpp"
#include "pathreg/quantize.hpp"
#include "pathreg/smallball.hpp"
#include "pathreg/spectral.hpp"

using namespace pathreg;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  std::vector<double> out;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(count - 1)));
  }
  return out;
}

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

bool within(double value, double target, double tol) { return std::abs(value - target) <= tol; }

double mc_slope(const ProcessSpec& spec, std::size_t n, std::size_t samples, std::uint64_t seed) {
  const SmallBallCurve curve = mc_smallball(spec, Grid(n), NormSpec::sup(), log_grid(0.3, 1.0, 8), samples, seed);
  return rate_fit(curve).inv_tau;
}

double spectral_slope(const ProcessSpec& spec, const EigenSpectrum& spectrum) {
  return rate_fit(spectral_smallball(spec, spectrum, log_grid(1e-4, 1e-2, 8))).inv_tau;
}

double max_abs_diff(const SamplePath& a, const std::function<double(double)>& f, std::size_t from = 0) {
  double worst = 0.0;
  for (std::size_t i = from; i < a.values.size(); ++i) {
    worst = std::max(worst, std::abs(a.values[i] - f(a.grid.point(i))));
  }
  return worst;
}

SamplePath tabulate(std::size_t n, const std::function<double(double)>& f) {
  const Grid grid(n);
  std::vector<double> v(n + 1);
  for (std::size_t i = 0; i <= n; ++i) v[i] = f(grid.point(i));
  return SamplePath(grid, v);
}

Outcome bm_sup_rate() {
  const double s = mc_slope(ProcessSpec::brownian(), 2048, 1000000, 101);
  return {within(s, 2.0, 0.15), fmt("slope=%.4f target=2+-0.15", s)};
}

Outcome bm_sup_level() {
  McOptions opt;
  opt.bridge_correction = true;
  const std::size_t n = 1000000;
  const SmallBallCurve curve = mc_smallball(ProcessSpec::brownian(), Grid(2048), NormSpec::sup(), {1.0}, n, 102, opt);
  const double p = bm_sup_probability(1.0);
  const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  const double z = (curve.entries[0].p_hat - p) / se;
  return {std::abs(z) <= 3.0, fmt("p_hat=%.6f series=%.6f z=%.3f target=|z|<=3", curve.entries[0].p_hat, p, z)};
}

Outcome bm_l2_constant() {
  const SmallBallCurve c = spectral_smallball(ProcessSpec::brownian(), brownian_spectrum(), {0.01});
  const double v = 1e-4 * c.entries[0].neg_log_p;
  return {v >= 0.11875 && v <= 0.13125, fmt("eps^2*(-log p)=%.6f target=[0.11875,0.13125]", v)};
}

Outcome laplace_identity() {
  const EigenSpectrum bm = brownian_spectrum();
  double worst = 0.0;
  for (double l : {1.0, 3.0, 10.0, 30.0}) {
    worst = std::max(worst, std::abs(laplace_transform_l2(bm, l) - 1.0 / std::sqrt(std::cosh(l))));
  }
  return {worst < 1e-6, fmt("max_error=%.3e target=<1e-6", worst)};
}

Outcome ibm_l2_slope() {
  const ProcessSpec ibm = ProcessSpec::integrated(ProcessSpec::brownian(), 1);
  const double s = spectral_slope(ibm, operator_spectrum(ibm, Grid(1024), 128));
  return {within(s, 2.0 / 3.0, 0.03), fmt("slope=%.4f target=0.6667+-0.03", s)};
}

Outcome integrated_fbm_slopes() {
  bool ok = true;
  std::string detail;
  for (double h : {0.3, 0.7}) {
    const ProcessSpec spec = ProcessSpec::integrated(ProcessSpec::fbm(h), 1);
    const double s = spectral_slope(spec, operator_spectrum(spec, Grid(1024), 128));
    ok = ok && within(s, 1.0 / (h + 1.0), 0.05);
    detail += fmt("H=%.1f slope=%.4f target=%.4f+-0.05 ", h, s, 1.0 / (h + 1.0));
  }
  return {ok, detail};
}

Outcome chenli_inequality() {
  const ChenLiFamily family{ProcessSpec::brownian(), ProcessSpec::integrated(ProcessSpec::brownian(), 1),
                            NormSpec::sup(), 512};
  const auto results = chenli_bound(family, {0.3, 0.5}, {0.5, 1.0, 2.0, 4.0, 8.0}, 200000, 107);
  double worst = std::numeric_limits<double>::infinity();
  bool ok = true;
  for (const auto& r : results) {
    ok = ok && r.lhs >= r.rhs - 2.0 * r.lhs_stderr;
    worst = std::min(worst, r.margin);
  }
  return {ok, fmt("cases=%zu min_margin=%.3f stderr target=lhs>=rhs-2*stderr", results.size(), worst)};
}

Outcome eigen_corollary() {
  const ProcessSpec ibm = ProcessSpec::integrated(ProcessSpec::brownian(), 1);
  const Grid grid(1024);
  const double s0 = eigen_rate_fit(operator_spectrum(ibm, grid, 128), 5, 40).slope;
  const DerivedKernel dk = derivative_kernel(ibm, grid);
  const double s1 = eigen_rate_fit(kernel_spectrum(dk.matrix, dk.grid, 128), 5, 40).slope;
  return {within(s0, -4.0, 0.1) && within(s1, -2.0, 0.1),
          fmt("kernel=%.4f derivative=%.4f target=-4+-0.1,-2+-0.1", s0, s1)};
}

Outcome smooth_difference() {
  const ProcessSpec spec = ProcessSpec::fbm_rl_difference(0.7);
  const double s = spectral_slope(spec, operator_spectrum(spec, Grid(1024), 128));
  return {s < 0.3, fmt("slope=%.4f target=<0.3", s)};
}

Outcome stable_control() {
  const double a = mc_slope(ProcessSpec::stable_scaled_fbm(0.5, 1.0), 2048, 1000000, 110);
  const double b = mc_slope(ProcessSpec::fbm(0.5), 2048, 1000000, 111);
  return {within(a, 1.0, 0.3) && within(b, 2.0, 0.2),
          fmt("stable=%.4f target=1+-0.3 fbm=%.4f target=2+-0.2", a, b)};
}

Outcome remainder_term() {
  const double a = mc_slope(ProcessSpec::gaussian_convolution(0.5, {1.0}), 512, 200000, 112);
  const double b = mc_slope(ProcessSpec::riemann_liouville(0.5), 512, 200000, 113);
  return {std::abs(a - b) <= 0.2, fmt("convolution=%.4f rl=%.4f diff=%.4f target=<=0.2", a, b, std::abs(a - b))};
}

Outcome frac_calculus() {
  const auto smooth = [](double t) { return std::sin(3.0 * t) + t * t; };
  const auto half = [](double t) { return 2.0 * std::sqrt(t / std::numbers::pi); };
  const SamplePath f = tabulate(1024, smooth);
  double roundtrip = 0.0;
  for (double m : {0.5, 1.0, 1.7}) {
    roundtrip = std::max(roundtrip, max_abs_diff(frac_derivative(frac_integral(f, m), m, 0.0), smooth));
  }
  const double half_int = max_abs_diff(frac_integral(tabulate(1024, [](double) { return 1.0; }), 0.5), half);
  const double half_der = max_abs_diff(frac_derivative(tabulate(1024, [](double t) { return t; }), 0.5), half, 1);
  const double square = max_abs_diff(frac_integral(tabulate(1024, [](double t) { return t; }), 1.0),
                                     [](double t) { return 0.5 * t * t; });
  const double sg_half = semigroup_check(f, 0.5, 0.5);
  const double sg_one = semigroup_check(f, 1.0, 1.0);
  const double sg_zero = semigroup_check(tabulate(1024, [](double) { return 0.0; }), 0.7, 1.3);
  const bool ok = roundtrip < 1e-8 && half_int < 1e-4 && half_der < 1e-3 && square < 1e-12 && sg_half < 1e-3 &&
                  sg_one < 1e-10 && sg_zero == 0.0;
  return {ok, fmt("roundtrip=%.2e half_integral=%.2e half_derivative=%.2e semigroup=%.2e/%.2e/%.1g", roundtrip,
                  half_int, half_der, sg_half, sg_one, sg_zero)};
}

Outcome transfer_algebra() {
  const double inf = std::numeric_limits<double>::infinity();
  int bad = 0, total = 0;
  const auto expect = [&](double got, double want) {
    ++total;
    if (got != want) ++bad;
  };
  expect(transfer_bound(RateLaw{kKappaSup, 0.5}, 1.0, NormSpec::sup()).exponent, 2.0 / 3.0);
  for (double m : {1.0, 2.0, 0.5}) {
    for (const NormSpec& norm : {NormSpec::sup(), NormSpec::lp(2.0), NormSpec::holder(0.25)}) {
      const BetaP bp = beta_p(norm);
      if (m - bp.beta - bp.inv_p() <= 0.0) continue;
      const TransferResult r = transfer_bound(RateLaw{0.7, inf, 1.0}, m, norm);
      expect(r.exponent, 1.0 / (m - bp.beta - bp.inv_p()));
      expect(r.log_exponent, 0.0);
      ++total;
      if (!r.constant || *r.constant != 0.7) ++bad;
    }
  }
  for (double h : {0.3, 0.5, 0.7}) {
    for (int m : {1, 2}) {
      for (double p : {1.0, 2.0, 4.0}) {
        expect(transfer_bound(RateLaw{1.0, h}, m, NormSpec::lp(p)).exponent, 1.0 / (h + m));
      }
    }
  }
  expect(converse_transfer(ConverseRateLaw{1.0, 2.0 / 3.0}, 1.0, NormSpec::sup()).exponent, 2.0);
  expect(converse_transfer(ConverseRateLaw{1.0, 0.5, 1.0}, 1.0, NormSpec::sup()).log_exponent, 2.0);
  return {bad == 0, fmt("exact=%d/%d", total - bad, total)};
}

Outcome quantization() {
  const std::vector<double> rates = log_grid(2.0, 16.0, 8);
  const ProcessSpec ibm = ProcessSpec::integrated(ProcessSpec::brownian(), 1);
  const auto qb = quant_curve(brownian_spectrum(), rates, 50000, 114);
  const auto qi = quant_curve(operator_spectrum(ibm, Grid(1024), 128), rates, 50000, 115);
  bool monotone = true;
  for (std::size_t i = 1; i < qb.size(); ++i) {
    if (qb[i].distortion > qb[i - 1].distortion + 2.0 * (qb[i].std_err + qb[i - 1].std_err)) monotone = false;
  }
  const double eb = quant_decay_exponent(qb), ei = quant_decay_exponent(qi);
  return {monotone && within(ei - eb, 1.0, 0.3),
          fmt("monotone=%d bm=%.4f integrated=%.4f gap=%.4f target=1+-0.3", monotone ? 1 : 0, eb, ei, ei - eb)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism(const std::string& cli) {
  if (cli.empty()) return {false, "no command-line tool given"};
  const fs::path root = fs::temp_directory_path() / "pathreg_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  {
    std::ofstream(root / "config.json") << R"({"kind": "verify-all", "seed": 20240611, "n_samples": 100000})";
  }
  for (const char* run : {"a", "b"}) {
    const std::string cmd = cli + " " + (root / "config.json").string() + " --out " + (root / run).string() + " > " +
                            (root / (std::string(run) + ".log")).string() + " 2>&1";
    const int raw = std::system(cmd.c_str());
    if (!WIFEXITED(raw) || WEXITSTATUS(raw) != 0) return {false, fmt("verify-all run %s failed", run)};
  }
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    const fs::path other = root / "b" / entry.path().filename();
    if (!fs::exists(other)) return {false, "missing " + other.string()};
    std::string x = slurp(entry.path()), y = slurp(other);
    if (entry.path().filename() == "manifest.json") {
      auto jx = nlohmann::json::parse(x), jy = nlohmann::json::parse(y);
      jx.erase("wall_time_seconds");
      jy.erase("wall_time_seconds");
      x = jx.dump();
      y = jy.dump();
    }
    if (x != y) return {false, "differs: " + entry.path().filename().string()};
    ++files;
  }
  std::size_t other_files = 0;
  for ([[maybe_unused]] const auto& entry : fs::directory_iterator(root / "b")) ++other_files;
  if (other_files != files) return {false, "file sets differ"};
  return {files > 0, fmt("identical_files=%zu (manifest wall time excluded)", files)};
}

}  // namespace

int main(int argc, char** argv) {
  std::setvbuf(stdout, nullptr, _IONBF, 0);
  const std::string cli = argc > 1 ? argv[1] : "";
  struct Item {
    int id;
    const char* name;
    double limit_seconds;
    std::function<Outcome()> body;
  };
  const double none = std::numeric_limits<double>::infinity();
  const std::vector<Item> items{
      {1, "bm_sup_rate", 120, bm_sup_rate},
      {2, "bm_sup_level", 60, bm_sup_level},
      {3, "bm_l2_constant", 10, bm_l2_constant},
      {4, "laplace_identity", 5, laplace_identity},
      {5, "integrated_bm_exponent", 30, ibm_l2_slope},
      {6, "integrated_fbm_exponents", 120, integrated_fbm_slopes},
      {7, "chenli_inequality", 180, chenli_inequality},
      {8, "eigenvalue_gap", 30, eigen_corollary},
      {9, "smooth_difference_slope", 60, smooth_difference},
      {10, "stable_negative_control", 180, stable_control},
      {11, "remainder_term", 180, remainder_term},
      {12, "fractional_calculus", 10, frac_calculus},
      {13, "transfer_algebra", none, transfer_algebra},
      {14, "quantization", 300, quantization},
      {15, "determinism", none, [&] { return determinism(cli); }},
  };
  int failures = 0;
  for (const auto& item : items) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = item.body();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < item.limit_seconds;
    const bool pass = out.pass && in_time;
    if (!pass) ++failures;
    std::printf("[%s] %2d %-26s %s time=%.1fs%s\n", pass ? "PASS" : "FAIL", item.id, item.name, out.detail.c_str(),
                secs, in_time ? "" : fmt(" (limit %.0fs)", item.limit_seconds).c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(items.size()) - failures, items.size());
  return failures == 0 ? 0 : 1;
}

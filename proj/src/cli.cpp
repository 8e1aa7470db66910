#include "pathreg/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>

#include "CLI11.hpp"

#include "pathreg/chenli.hpp"
#include "pathreg/csv.hpp"
#include "pathreg/errors.hpp"
#include "pathreg/frac_calc.hpp"
#include "pathreg/quantize.hpp"
#include "pathreg/spectral.hpp"

#ifndef PATHREG_VERSION
#define PATHREG_VERSION "0.1.0"
#endif

namespace pathreg {

using nlohmann::json;

std::string tool_version() { return PATHREG_VERSION; }

const char* kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Simulate: return "simulate";
    case ExperimentKind::SmallBall: return "smallball";
    case ExperimentKind::RateFit: return "ratefit";
    case ExperimentKind::Transfer: return "transfer";
    case ExperimentKind::ChenLi: return "chenli";
    case ExperimentKind::Eigen: return "eigen";
    case ExperimentKind::Quantize: return "quantize";
    case ExperimentKind::VerifyAll: return "verify-all";
  }
  return "?";
}

namespace {

// ---------------------------------------------------------------- config parsing

const json& require(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError("missing field '" + where + key + "'");
  return j.at(key);
}

double get_number(const json& j, const std::string& key, const std::string& where) {
  const json& v = require(j, key, where);
  if (!v.is_number()) throw ConfigError("field '" + where + key + "' must be a number");
  return v.get<double>();
}

bool is_nonnegative_integer(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

std::size_t get_count(const json& j, const std::string& key, const std::string& where) {
  const json& v = require(j, key, where);
  if (!is_nonnegative_integer(v) || v.get<std::uint64_t>() == 0) {
    throw ConfigError("field '" + where + key + "' must be a positive integer");
  }
  return v.get<std::size_t>();
}

ProcessSpec parse_process_at(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError("field '" + where + "' must be an object");
  const json& type_field = require(j, "type", where + ".");
  if (!type_field.is_string()) throw ConfigError("field '" + where + ".type' must be a string");
  const std::string type = type_field.get<std::string>();
  const std::string w = where + ".";
  if (type == "brownian") return ProcessSpec::brownian();
  if (type == "fbm") return ProcessSpec::fbm(get_number(j, "hurst", w));
  if (type == "riemann_liouville") return ProcessSpec::riemann_liouville(get_number(j, "hurst", w));
  if (type == "integrated") {
    const double order = get_number(j, "order", w);
    if (order != std::floor(order)) throw ConfigError("field '" + w + "order' must be an integer");
    return ProcessSpec::integrated(parse_process_at(require(j, "base", w), w + "base"), static_cast<int>(order));
  }
  if (type == "frac_integrated") {
    return ProcessSpec::frac_integrated(parse_process_at(require(j, "base", w), w + "base"), get_number(j, "order", w));
  }
  if (type == "fbm_rl_difference") return ProcessSpec::fbm_rl_difference(get_number(j, "hurst", w));
  if (type == "gaussian_convolution") {
    const json& c = require(j, "coeffs", w);
    if (!c.is_array()) throw ConfigError("field '" + w + "coeffs' must be an array");
    std::vector<double> coeffs;
    for (const auto& x : c) {
      if (!x.is_number()) throw ConfigError("field '" + w + "coeffs' must hold numbers");
      coeffs.push_back(x.get<double>());
    }
    return ProcessSpec::gaussian_convolution(get_number(j, "hurst", w), coeffs);
  }
  if (type == "stable_scaled_fbm") return ProcessSpec::stable_scaled_fbm(get_number(j, "hurst", w), get_number(j, "alpha", w));
  throw ConfigError("unknown process type '" + type + "' in '" + where + "'");
}

NormSpec parse_norm_at(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError("field '" + where + "' must be an object");
  const json& type_field = require(j, "type", where + ".");
  if (!type_field.is_string()) throw ConfigError("field '" + where + ".type' must be a string");
  const std::string type = type_field.get<std::string>();
  if (type == "sup") return NormSpec::sup();
  if (type == "lp") return NormSpec::lp(get_number(j, "p", where + "."));
  if (type == "holder") return NormSpec::holder(get_number(j, "eta", where + "."));
  if (type == "l2_squared") return NormSpec::l2_squared();
  throw ConfigError("unknown norm type '" + type + "' in '" + where + "'");
}

// Either an explicit list or {"min", "max", "count"} with logarithmic spacing.
std::vector<double> parse_grid(const json& j, const std::string& key) {
  const json& v = j.at(key);
  std::vector<double> out;
  if (v.is_array()) {
    for (const auto& x : v) {
      if (!x.is_number()) throw ConfigError("field '" + key + "' must hold numbers");
      out.push_back(x.get<double>());
    }
  } else if (v.is_object()) {
    const double lo = get_number(v, "min", key + ".");
    const double hi = get_number(v, "max", key + ".");
    const std::size_t count = get_count(v, "count", key + ".");
    if (!(lo > 0.0) || !(hi >= lo)) throw ConfigError("field '" + key + "' needs 0 < min <= max");
    for (std::size_t i = 0; i < count; ++i) {
      const double u = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
      out.push_back(lo * std::pow(hi / lo, u));
    }
  } else {
    throw ConfigError("field '" + key + "' must be an array or a {min, max, count} object");
  }
  if (out.empty()) throw ConfigError("field '" + key + "' is empty");
  return out;
}

void require_positive(const std::vector<double>& v, const std::string& key) {
  for (double x : v) {
    if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError("field '" + key + "' must hold positive finite values");
  }
}

ExperimentKind parse_kind(const std::string& s) {
  for (auto k : {ExperimentKind::Simulate, ExperimentKind::SmallBall, ExperimentKind::RateFit, ExperimentKind::Transfer,
                 ExperimentKind::ChenLi, ExperimentKind::Eigen, ExperimentKind::Quantize, ExperimentKind::VerifyAll}) {
    if (s == kind_name(k)) return k;
  }
  throw ConfigError("unknown experiment kind '" + s + "'");
}

// ---------------------------------------------------------------- artifacts

class ArtifactWriter {
 public:
  explicit ArtifactWriter(const ExperimentConfig& config) : config_(config) {
    std::filesystem::create_directories(config.output);
  }

  /// Opens `name` under the output directory with the manifest header already written.
  std::ofstream open(const std::string& name) {
    std::ofstream out(config_.output / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (config_.output / name).string());
    write_csv_comment(out, "tool", "pathreg " + tool_version());
    write_csv_comment(out, "kind", kind_name(config_.kind));
    write_csv_comment(out, "seed", std::to_string(config_.seed));
    write_csv_comment(out, "config", config_.echo.dump());
    names_.push_back(name);
    return out;
  }

  const std::vector<std::string>& names() const { return names_; }

 private:
  const ExperimentConfig& config_;
  std::vector<std::string> names_;
};

void write_manifest(const ExperimentConfig& config, const std::vector<std::string>& artifacts, int status,
                    double wall_seconds) {
  json m;
  m["tool"] = "pathreg";
  m["version"] = tool_version();
  m["kind"] = kind_name(config.kind);
  m["seed"] = config.seed;
  m["config"] = config.echo;
  m["artifacts"] = artifacts;
  m["exit_status"] = status;
  m["wall_time_seconds"] = wall_seconds;
  std::ofstream out(config.output / "manifest.json", std::ios::binary);
  out << m.dump(2) << '\n';
}

// ---------------------------------------------------------------- shared experiment pieces

const ProcessSpec& need_process(const ExperimentConfig& c) {
  if (!c.process) throw ConfigError("missing field 'process'");
  return *c.process;
}

EigenSpectrum spectrum_for(const ProcessSpec& spec, std::size_t grid_n, std::size_t count) {
  if (spec.get_if<BrownianMotion>()) return brownian_spectrum();
  return operator_spectrum(spec, Grid(grid_n), count);
}

std::size_t spectral_grid(const ExperimentConfig& c) { return c.grid_n == 0 ? 1024 : c.grid_n; }

bool is_l2(const NormSpec& norm) {
  const auto* lp = std::get_if<LpNorm>(&norm.variant());
  return lp && lp->p == 2.0;
}

SmallBallCurve make_curve(const ExperimentConfig& c) {
  const ProcessSpec& spec = need_process(c);
  if (c.method == "spectral") {
    if (!is_l2(c.norm)) throw ConfigError("field 'method': spectral curves need norm {\"type\": \"lp\", \"p\": 2}");
    return spectral_smallball(spec, spectrum_for(spec, spectral_grid(c), c.eigen_count), c.eps);
  }
  const double eps_min = *std::min_element(c.eps.begin(), c.eps.end());
  const std::size_t n = c.grid_n == 0 ? recommended_grid_n(spec, eps_min) : c.grid_n;
  McOptions options;
  options.bridge_correction = c.bridge_correction;
  return mc_smallball(spec, Grid(n), c.norm, c.eps, c.n_samples, c.seed, options);
}

// ---------------------------------------------------------------- experiments

int run_simulate(const ExperimentConfig& c, ArtifactWriter& w, std::ostream& log) {
  const std::size_t n = c.grid_n == 0 ? 512 : c.grid_n;
  const auto paths = sample_paths(need_process(c), Grid(n), c.n_samples, c.seed);
  auto out = w.open("paths.csv");
  write_paths_csv(out, paths);
  log << "wrote " << paths.size() << " paths on n = " << n << '\n';
  return kExitOk;
}

int run_smallball(const ExperimentConfig& c, ArtifactWriter& w, std::ostream& log) {
  const SmallBallCurve curve = make_curve(c);
  auto out = w.open("curve.csv");
  write_curve_csv(out, curve);
  log << "curve with " << curve.entries.size() << " entries\n";
  return kExitOk;
}

int run_ratefit(const ExperimentConfig& c, ArtifactWriter& w, std::ostream& log) {
  const SmallBallCurve curve = make_curve(c);
  {
    auto out = w.open("curve.csv");
    write_curve_csv(out, curve);
  }
  const RateFit fit = rate_fit(curve, c.theta, c.fit_model);
  auto out = w.open("fit.json");
  write_fit_json(out, fit);
  log << "slope " << format_number(fit.inv_tau) << ", kappa " << format_number(fit.kappa) << ", r2 "
      << format_number(fit.r2) << '\n';
  return kExitOk;
}

int run_transfer(const ExperimentConfig& c, ArtifactWriter& w, std::ostream& log) {
  auto out = w.open("transfer.csv");
  out << "direction,exponent,log_exponent,constant\n";
  auto row = [&](const char* direction, const TransferResult& r) {
    out << direction << ',' << format_number(r.exponent) << ',' << format_number(r.log_exponent) << ','
        << (r.constant ? format_number(*r.constant) : std::string("unresolved")) << '\n';
    log << direction << ": exponent " << format_number(r.exponent) << ", log exponent " << format_number(r.log_exponent)
        << '\n';
  };
  if (c.rate) row("forward", transfer_bound(*c.rate, c.order, c.norm, c.constants));
  if (c.converse) row("converse", converse_transfer(*c.converse, c.order, c.norm));
  return kExitOk;
}

int run_chenli(const ExperimentConfig& c, ArtifactWriter& w, std::ostream& log) {
  if (!c.comparison) throw ConfigError("missing field 'comparison'");
  ChenLiFamily family{*c.comparison, need_process(c), c.norm, c.grid_n == 0 ? 512 : c.grid_n};
  auto results = chenli_bound(family, c.eps, c.lambdas, c.n_samples, c.seed);
  bool ok = true;
  for (auto& r : results) {
    r.rhs *= c.debug_rhs_scale;
    r.margin = r.lhs_stderr > 0.0 ? (r.lhs - r.rhs) / r.lhs_stderr : (r.lhs >= r.rhs ? INFINITY : -INFINITY);
    if (!r.trivial && r.margin < -2.0) {
      ok = false;
      log << "FAIL at lambda " << format_number(r.lambda) << ", eps " << format_number(r.eps) << ": lhs "
          << format_number(r.lhs) << " < rhs " << format_number(r.rhs) << '\n';
    }
  }
  auto out = w.open("chenli.csv");
  write_chenli_csv(out, results);
  log << (ok ? "PASS" : "FAIL") << ": " << results.size() << " (eps, lambda) pairs\n";
  return ok ? kExitOk : kExitVerification;
}

int run_eigen(const ExperimentConfig& c, ArtifactWriter& w, std::ostream& log) {
  const ProcessSpec& spec = need_process(c);
  const Grid grid(spectral_grid(c));
  auto fit_out = w.open("eigen_fit.csv");
  fit_out << "spectrum,k_min,k_max,slope,shift,plain_slope\n";
  auto emit = [&](const std::string& name, const EigenSpectrum& s) {
    {
      auto out = w.open(name + ".csv");
      write_spectrum_csv(out, s);
    }
    const EigenRateFit fit = eigen_rate_fit(s, c.k_min, c.k_max);
    fit_out << name << ',' << c.k_min << ',' << c.k_max << ',' << format_number(fit.slope) << ','
            << format_number(fit.shift) << ',' << format_number(fit.plain_slope) << '\n';
    log << name << ": slope " << format_number(fit.slope) << '\n';
  };
  emit("spectrum", operator_spectrum(spec, grid, c.eigen_count));
  if (c.derivative) {
    const DerivedKernel dk = derivative_kernel(spec, grid);
    emit("derivative_spectrum", kernel_spectrum(dk.matrix, dk.grid, c.eigen_count));
  }
  return kExitOk;
}

int run_quantize(const ExperimentConfig& c, ArtifactWriter& w, std::ostream& log) {
  const ProcessSpec& spec = need_process(c);
  const auto curve = quant_curve(spectrum_for(spec, spectral_grid(c), c.eigen_count), c.rates, c.n_samples, c.seed);
  auto out = w.open("quant.csv");
  write_quant_csv(out, curve);
  if (curve.size() >= 2) log << "decay exponent " << format_number(quant_decay_exponent(curve)) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- verify-all

struct Check {
  std::string name;
  double value;
  std::string target;
  bool pass;
};

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  std::vector<double> out;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(count - 1)));
  }
  return out;
}

int run_verify_all(const ExperimentConfig& c, ArtifactWriter& w, std::ostream& log) {
  std::vector<Check> checks;
  const std::uint64_t seed = c.seed;
  const ProcessSpec bm = ProcessSpec::brownian();
  const ProcessSpec ibm = ProcessSpec::integrated(bm, 1);
  const EigenSpectrum bm_spec = brownian_spectrum();

  {
    auto out = w.open("laplace.csv");
    out << "lambda,laplace,cosh_identity\n";
    double worst = 0.0;
    for (double l : {1.0, 3.0, 10.0, 30.0}) {
      const double got = laplace_transform_l2(bm_spec, l);
      const double want = 1.0 / std::sqrt(std::cosh(l));
      worst = std::max(worst, std::abs(got - want));
      out << format_number(l) << ',' << format_number(got) << ',' << format_number(want) << '\n';
    }
    checks.push_back({"laplace_identity", worst, "< 1e-6", worst < 1e-6});
  }
  {
    const SmallBallCurve curve = spectral_smallball(bm, bm_spec, {0.01});
    auto out = w.open("bm_l2.csv");
    write_curve_csv(out, curve);
    const double v = 1e-4 * curve.entries[0].neg_log_p;
    checks.push_back({"bm_l2_constant", v, "0.125 +- 5%", std::abs(v - 0.125) <= 0.00625});
  }
  const EigenSpectrum ibm_spec = operator_spectrum(ibm, Grid(1024), 128);
  {
    const SmallBallCurve curve = spectral_smallball(ibm, ibm_spec, log_grid(1e-4, 1e-2, 8));
    auto out = w.open("ibm_l2_curve.csv");
    write_curve_csv(out, curve);
    const RateFit fit = rate_fit(curve);
    auto fit_out = w.open("ibm_l2_fit.json");
    write_fit_json(fit_out, fit);
    checks.push_back({"ibm_l2_slope", fit.inv_tau, "2/3 +- 0.03", std::abs(fit.inv_tau - 2.0 / 3.0) <= 0.03});
  }
  {
    const DerivedKernel dk = derivative_kernel(ibm, Grid(1024));
    const EigenSpectrum dspec = kernel_spectrum(dk.matrix, dk.grid, 128);
    auto out = w.open("ibm_eigen.csv");
    out << "spectrum,slope\n";
    const double s0 = eigen_rate_fit(ibm_spec, 5, 40).slope;
    const double s1 = eigen_rate_fit(dspec, 5, 40).slope;
    out << "process," << format_number(s0) << "\nderivative," << format_number(s1) << '\n';
    checks.push_back({"ibm_eigen_slope", s0, "-4 +- 0.1", std::abs(s0 + 4.0) <= 0.1});
    checks.push_back({"ibm_derivative_eigen_slope", s1, "-2 +- 0.1", std::abs(s1 + 2.0) <= 0.1});
  }
  {
    const TransferResult a = transfer_bound(RateLaw{kKappaSup, 0.5}, 1.0, NormSpec::sup());
    const TransferResult b = converse_transfer(ConverseRateLaw{1.0, 2.0 / 3.0}, 1.0, NormSpec::sup());
    const TransferResult d = converse_transfer(ConverseRateLaw{1.0, 0.5, 1.0}, 1.0, NormSpec::sup());
    auto out = w.open("transfer.csv");
    out << "case,exponent,log_exponent\n";
    out << "bm_integrated," << format_number(a.exponent) << ',' << format_number(a.log_exponent) << '\n';
    out << "converse_roundtrip," << format_number(b.exponent) << ',' << format_number(b.log_exponent) << '\n';
    out << "converse_log," << format_number(d.exponent) << ',' << format_number(d.log_exponent) << '\n';
    const double err = std::abs(a.exponent - 2.0 / 3.0) + std::abs(b.exponent - 2.0) + std::abs(d.log_exponent - 2.0);
    checks.push_back({"transfer_algebra", err, "< 1e-12", err < 1e-12});
  }
  {
    const Grid grid(1024);
    std::vector<double> v(grid.n() + 1);
    for (std::size_t i = 0; i <= grid.n(); ++i) v[i] = std::sin(3.0 * grid.point(i)) + grid.point(i) * grid.point(i);
    const SamplePath f(grid, v);
    auto out = w.open("frac_roundtrip.csv");
    out << "order,max_error\n";
    double worst = 0.0;
    for (double m : {0.5, 1.0, 1.7}) {
      const SamplePath back = frac_derivative(frac_integral(f, m), m, v[0]);
      double e = 0.0;
      for (std::size_t i = 0; i <= grid.n(); ++i) e = std::max(e, std::abs(back.values[i] - v[i]));
      worst = std::max(worst, e);
      out << format_number(m) << ',' << format_number(e) << '\n';
    }
    checks.push_back({"frac_roundtrip", worst, "< 1e-8", worst < 1e-8});
  }
  {
    McOptions opt;
    opt.bridge_correction = true;
    const SmallBallCurve curve = mc_smallball(bm, Grid(512), NormSpec::sup(), {1.0}, c.n_samples, seed, opt);
    auto out = w.open("bm_sup_level.csv");
    write_curve_csv(out, curve);
    const CurveEntry& e = curve.entries[0];
    const double p = bm_sup_probability(1.0);
    const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(c.n_samples));
    const double z = (e.p_hat - p) / se;
    checks.push_back({"bm_sup_level_z", z, "|z| <= 3", std::abs(z) <= 3.0});
  }
  {
    const ChenLiFamily family{bm, ibm, NormSpec::sup(), 256};
    const auto results = chenli_bound(family, {0.3, 0.5}, {0.5, 1.0, 2.0, 4.0, 8.0}, c.n_samples, seed + 1);
    auto out = w.open("chenli.csv");
    write_chenli_csv(out, results);
    double worst = INFINITY;
    for (const auto& r : results) worst = std::min(worst, r.margin);
    checks.push_back({"chenli_min_margin", worst, ">= -2", worst >= -2.0});
  }
  {
    const std::vector<double> rates = log_grid(2.0, 16.0, 8);
    const std::size_t n_mc = std::max<std::size_t>(c.n_samples / 5, 1000);
    const auto qb = quant_curve(bm_spec, rates, n_mc, seed + 2);
    const auto qi = quant_curve(ibm_spec, rates, n_mc, seed + 3);
    {
      auto out = w.open("quant_bm.csv");
      write_quant_csv(out, qb);
    }
    {
      auto out = w.open("quant_ibm.csv");
      write_quant_csv(out, qi);
    }
    bool monotone = true;
    for (std::size_t i = 1; i < qb.size(); ++i) {
      if (qb[i].distortion > qb[i - 1].distortion + 2.0 * (qb[i].std_err + qb[i - 1].std_err)) monotone = false;
    }
    const double gap = quant_decay_exponent(qi) - quant_decay_exponent(qb);
    checks.push_back({"quant_bm_monotone", monotone ? 1.0 : 0.0, "1", monotone});
    checks.push_back({"quant_exponent_gap", gap, "1 +- 0.3", std::abs(gap - 1.0) <= 0.3});
  }

  bool all = true;
  auto out = w.open("summary.csv");
  out << "check,value,target,verdict\n";
  log << std::left << std::setw(28) << "check" << std::setw(26) << "value" << std::setw(12) << "target" << "verdict\n";
  for (const auto& ch : checks) {
    all = all && ch.pass;
    out << ch.name << ',' << format_number(ch.value) << ',' << ch.target << ',' << (ch.pass ? "PASS" : "FAIL") << '\n';
    log << std::left << std::setw(28) << ch.name << std::setw(26) << format_number(ch.value) << std::setw(12)
        << ch.target << (ch.pass ? "PASS" : "FAIL") << '\n';
  }
  return all ? kExitOk : kExitVerification;
}

}  // namespace

ProcessSpec parse_process(const json& j) { return parse_process_at(j, "process"); }

NormSpec parse_norm(const json& j) { return parse_norm_at(j, "norm"); }

ExperimentConfig parse_config(json j, const Overrides& overrides) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  if (overrides.seed) j["seed"] = *overrides.seed;
  if (overrides.output) j["output"] = *overrides.output;
  if (overrides.n_samples) j["n_samples"] = *overrides.n_samples;

  const json& kind = require(j, "kind", "");
  if (!kind.is_string()) throw ConfigError("field 'kind' must be a string");
  const json& seed = require(j, "seed", "");
  if (!is_nonnegative_integer(seed)) throw ConfigError("field 'seed' must be a nonnegative integer");

  ExperimentConfig c;
  c.kind = parse_kind(kind.get<std::string>());
  c.seed = seed.get<std::uint64_t>();
  c.output = "pathreg-out";
  try {
    if (j.contains("output")) {
      if (!j["output"].is_string()) throw ConfigError("field 'output' must be a string");
      c.output = j["output"].get<std::string>();
    }
    if (j.contains("process")) c.process = parse_process_at(j["process"], "process");
    if (j.contains("comparison")) c.comparison = parse_process_at(j["comparison"], "comparison");
    if (j.contains("norm")) c.norm = parse_norm_at(j["norm"], "norm");
    if (j.contains("eps")) {
      c.eps = parse_grid(j, "eps");
      require_positive(c.eps, "eps");
    }
    if (j.contains("lambdas")) {
      c.lambdas = parse_grid(j, "lambdas");
      require_positive(c.lambdas, "lambdas");
    }
    if (j.contains("rates")) {
      c.rates = parse_grid(j, "rates");
      for (double r : c.rates) {
        if (!(r >= 0.0)) throw ConfigError("field 'rates' must hold nonnegative values");
      }
    }
    if (j.contains("n_samples")) c.n_samples = get_count(j, "n_samples", "");
    if (j.contains("grid_n")) c.grid_n = get_count(j, "grid_n", "");
    if (j.contains("eigen_count")) c.eigen_count = get_count(j, "eigen_count", "");
    if (j.contains("k_min")) c.k_min = get_count(j, "k_min", "");
    if (j.contains("k_max")) c.k_max = get_count(j, "k_max", "");
    if (j.contains("method")) {
      c.method = j["method"].is_string() ? j["method"].get<std::string>() : "";
      if (c.method != "mc" && c.method != "spectral") throw ConfigError("field 'method' must be \"mc\" or \"spectral\"");
    }
    if (j.contains("bridge_correction")) c.bridge_correction = j["bridge_correction"].get<bool>();
    if (j.contains("derivative")) c.derivative = j["derivative"].get<bool>();
    if (j.contains("theta")) c.theta = j["theta"].is_null() ? std::nullopt : std::optional<double>(get_number(j, "theta", ""));
    if (j.contains("fit_model")) {
      const std::string m = j["fit_model"].get<std::string>();
      if (m == "power_with_offset") {
        c.fit_model = FitModel::PowerWithOffset;
      } else if (m == "log_linear") {
        c.fit_model = FitModel::LogLinear;
      } else {
        throw ConfigError("field 'fit_model' must be \"power_with_offset\" or \"log_linear\"");
      }
    }
    if (j.contains("rate")) {
      const json& r = j["rate"];
      const double tau = r.contains("tau") && r["tau"].is_string() && r["tau"] == "inf" ? INFINITY
                                                                                         : get_number(r, "tau", "rate.");
      c.rate = RateLaw{get_number(r, "kappa", "rate."), tau, r.contains("theta") ? get_number(r, "theta", "rate.") : 0.0};
    }
    if (j.contains("converse")) {
      const json& r = j["converse"];
      c.converse = ConverseRateLaw{get_number(r, "kappa", "converse."), get_number(r, "gamma", "converse."),
                                   r.contains("delta") ? get_number(r, "delta", "converse.") : 0.0};
    }
    if (j.contains("order")) c.order = get_number(j, "order", "");
    if (j.contains("constants")) {
      c.constants = TransferConstants{get_number(j["constants"], "kappa_norm", "constants."),
                                      get_number(j["constants"], "laplace_k", "constants.")};
    }
    if (j.contains("debug_rhs_scale")) c.debug_rhs_scale = get_number(j, "debug_rhs_scale", "");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }

  auto need = [&](bool present, const char* field) {
    if (!present) throw ConfigError(std::string("missing field '") + field + "' for kind " + kind_name(c.kind));
  };
  switch (c.kind) {
    case ExperimentKind::Simulate: need(c.process.has_value(), "process"); break;
    case ExperimentKind::SmallBall:
    case ExperimentKind::RateFit:
      need(c.process.has_value(), "process");
      need(!c.eps.empty(), "eps");
      if (c.method == "mc" && c.n_samples < 1000) throw ConfigError("field 'n_samples' must be at least 1000");
      break;
    case ExperimentKind::Transfer: need(c.rate || c.converse, "rate"); break;
    case ExperimentKind::ChenLi:
      need(c.process.has_value(), "process");
      need(c.comparison.has_value(), "comparison");
      need(!c.eps.empty(), "eps");
      need(!c.lambdas.empty(), "lambdas");
      break;
    case ExperimentKind::Eigen:
      need(c.process.has_value(), "process");
      if (c.k_min < 1 || c.k_max <= c.k_min || c.k_max > c.eigen_count) {
        throw ConfigError("fields 'k_min', 'k_max' must satisfy 1 <= k_min < k_max <= eigen_count");
      }
      break;
    case ExperimentKind::Quantize:
      need(c.process.has_value(), "process");
      need(!c.rates.empty(), "rates");
      break;
    case ExperimentKind::VerifyAll:
      if (c.n_samples < 1000) throw ConfigError("field 'n_samples' must be at least 1000");
      break;
  }
  c.echo = j;
  c.echo.erase("output");
  return c;
}

int run(const ExperimentConfig& config, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  ArtifactWriter writer(config);
  int status = kExitOk;
  try {
    switch (config.kind) {
      case ExperimentKind::Simulate: status = run_simulate(config, writer, log); break;
      case ExperimentKind::SmallBall: status = run_smallball(config, writer, log); break;
      case ExperimentKind::RateFit: status = run_ratefit(config, writer, log); break;
      case ExperimentKind::Transfer: status = run_transfer(config, writer, log); break;
      case ExperimentKind::ChenLi: status = run_chenli(config, writer, log); break;
      case ExperimentKind::Eigen: status = run_eigen(config, writer, log); break;
      case ExperimentKind::Quantize: status = run_quantize(config, writer, log); break;
      case ExperimentKind::VerifyAll: status = run_verify_all(config, writer, log); break;
    }
  } catch (const DomainError& e) {
    log << "error: " << e.what() << '\n';
    status = kExitValidation;
  } catch (const UnsupportedSpecError& e) {
    log << "error: " << e.what() << '\n';
    status = kExitValidation;
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << '\n';
    status = kExitValidation;
  } catch (const std::runtime_error& e) {
    log << "numerical failure: " << e.what() << '\n';
    status = kExitNumerical;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(config, writer.names(), status, wall);
  return status;
}

int cli_main(int argc, char** argv) {
  CLI::App app{"Small deviation experiments for Gaussian processes"};
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> n_samples;
  app.add_option("config", config_path, "JSON experiment config")->required();
  app.add_option("--seed", seed, "Override the config seed");
  app.add_option("--out", out, "Override the output directory");
  app.add_option("--n-samples", n_samples, "Override n_samples");
  app.set_version_flag("--version", tool_version());
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  ExperimentConfig config;
  try {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot read config file " + config_path);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    config = parse_config(std::move(j), Overrides{seed, out, n_samples});
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return run(config, std::cout);
}

}  // namespace pathreg

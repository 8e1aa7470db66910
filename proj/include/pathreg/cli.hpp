#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "pathreg/norms.hpp"
#include "pathreg/process.hpp"
#include "pathreg/smallball.hpp"

namespace pathreg {

enum class ExperimentKind { Simulate, SmallBall, RateFit, Transfer, ChenLi, Eigen, Quantize, VerifyAll };

const char* kind_name(ExperimentKind kind);

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitNumerical = 2, kExitVerification = 3 };

/// Invalid or incomplete experiment configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::VerifyAll;
  std::uint64_t seed = 0;
  std::filesystem::path output;

  std::optional<ProcessSpec> process;
  /// X in the Chen-Li inequality.
  std::optional<ProcessSpec> comparison;
  NormSpec norm = NormSpec::sup();

  std::vector<double> eps;
  std::vector<double> lambdas;
  std::vector<double> rates;

  std::size_t n_samples = 100000;
  /// 0 selects recommended_grid_n for Monte Carlo runs.
  std::size_t grid_n = 0;
  /// "mc" or "spectral".
  std::string method = "mc";
  bool bridge_correction = false;
  std::size_t eigen_count = 128;
  std::size_t k_min = 5;
  std::size_t k_max = 40;
  bool derivative = false;

  std::optional<double> theta = 0.0;
  FitModel fit_model = FitModel::PowerWithOffset;

  std::optional<RateLaw> rate;
  std::optional<ConverseRateLaw> converse;
  double order = 1.0;
  std::optional<TransferConstants> constants;

  /// Test fixture: multiplies every Chen-Li right-hand side.
  double debug_rhs_scale = 1.0;

  /// Normalized config after command-line overrides, echoed into every artifact.
  nlohmann::json echo;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output;
  std::optional<std::size_t> n_samples;
};

ProcessSpec parse_process(const nlohmann::json& j);
NormSpec parse_norm(const nlohmann::json& j);

/// Applies overrides, then validates. Throws ConfigError naming the offending field.
ExperimentConfig parse_config(nlohmann::json j, const Overrides& overrides = {});

/// Runs the experiment, writing artifacts under config.output; returns an ExitCode.
int run(const ExperimentConfig& config, std::ostream& log);

/// Entry point of the command-line tool.
int cli_main(int argc, char** argv);

std::string tool_version();

}  // namespace pathreg

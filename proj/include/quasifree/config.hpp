#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "quasifree/generator.hpp"
#include "quasifree/states.hpp"

namespace quasifree {

/// Malformed configuration (missing/ill-typed fields); the message carries
/// the offending field path.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CorrelationProbe {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> kvecs;
};

struct RunParams {
  std::vector<double> times = {1.0};
  double quad_tol = 1e-10;
  double positivity_tol = 1e-10;
  uint64_t seed = 1;
  std::vector<Eigen::VectorXd> xi_samples;
  std::optional<GridSpec> grid;
  double horizon = 1.0;
  double dt = 0.0;  // 0 -> default 1e-3 * horizon
  int n_paths = 100000;
  std::vector<CorrelationProbe> probes;
};

struct ModelConfig {
  GeneratorParams params;
  std::optional<HybridGaussianState> initial_gaussian;
  std::optional<std::string> initial_charfn_csv;
  RunParams run;
  std::string config_hash;  // FNV-1a of the raw config bytes
};

/// Parses and validates a JSON model file. Throws ConfigError on malformed
/// input; model-level validity (positivity etc.) is NOT checked here.
ModelConfig load_config(const std::string& path);
ModelConfig parse_config(const std::string& json_text);

}  // namespace quasifree

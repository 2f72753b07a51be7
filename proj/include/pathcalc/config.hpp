#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pathcalc/bk.hpp"
#include "pathcalc/registry.hpp"
#include "pathcalc/simulate.hpp"

namespace pathcalc {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Everything a run needs. Parsed from an INI-style file:
///
///   [generator]  kind, dimension, horizon, level, seed, x0, drift, vol,
///                drift_rate, vol_rate
///   [functional] name plus its parameters (see registry.hpp)
///   [bk]         max_level, cauchy_tol, scale_tolerance, horizon, strict
///   [run]        input, coordinate, levels, ensemble, paths, threads,
///                threshold, upper_quantile, times, h, numeric_fallback, out
///
/// Unknown sections or keys are errors.
struct ExperimentConfig {
  std::string subcommand;

  GeneratorSpec generator;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> drift_names;
  std::vector<std::string> vol_names;

  std::string functional = "square:1";
  ParamMap functional_params;

  BkConfig bk;

  std::string input;
  int coordinate = 0;  // integrator coordinate, 0-based
  std::vector<int> levels{10, 12, 14};
  std::size_t ensemble = 100;
  std::size_t paths = 1;
  int threads = 0;
  double threshold = 1e-1;
  double upper_quantile = 0.9;
  std::vector<double> times;
  double h = 1e-4;
  bool numeric_fallback = false;
  std::string out = "out";

  /// Resolves drift/vol names and checks invariants. Throws ConfigError.
  void finalize();

  /// Seed of the run; ConfigError when none was given.
  std::uint64_t require_seed() const;
};

ExperimentConfig parse_config(std::istream& in);
/// Throws ConfigError for syntax errors and std::ios_base::failure when the
/// file cannot be read.
ExperimentConfig load_config(const std::string& file);

/// All effective settings, defaults included. Worker count is left out: it
/// never changes results.
nlohmann::ordered_json to_json(const ExperimentConfig& cfg);

std::vector<int> parse_levels(const std::string& text);

}  // namespace pathcalc

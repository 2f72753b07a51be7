#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pathcalc/functional.hpp"
#include "pathcalc/path.hpp"

namespace pathcalc {

enum class GeneratorKind { kBrownian, kItoEuler, kLocalVol };

std::string to_string(GeneratorKind kind);
GeneratorKind parse_generator_kind(const std::string& name);

/// Recipe for one family of sample paths on the dyadic grid of `level`.
///
/// kItoEuler uses `drift` (d entries) and `vol` (d*d entries, row-major:
/// vol[c*d + j] multiplies the j-th Brownian increment in coordinate c).
/// kLocalVol is the diagonal model dX^c = rate X^c dt + vol_rate X^c dW^c.
struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::kBrownian;
  int dimension = 1;
  double horizon = 1.0;
  int level = 10;
  std::uint64_t seed = 0;
  Vector x0;  // empty: zero (one for kLocalVol)
  std::vector<CausalFunctional> drift;
  std::vector<CausalFunctional> vol;
  double drift_rate = 0.0;
  double vol_rate = 0.2;

  /// Throws std::invalid_argument when the spec is inconsistent.
  void validate() const;
};

/// Seed of the sub-stream for one ensemble member:
///   splitmix64(seed ^ splitmix64(path_index + 0x9e3779b97f4a7c15)).
/// Members are reproducible in any evaluation order.
std::uint64_t stream_key(std::uint64_t seed, std::uint64_t path_index);

/// d independent Brownian coordinates started at x0, increments
/// N(0, dt) drawn step by step (coordinate-minor).
CadlagPath brownian_path(const GeneratorSpec& spec, std::uint64_t path_index = 0);

/// Explicit Euler scheme driven by the same Gaussian stream as
/// brownian_path. Coefficients are evaluated at (t_k, path built so far).
/// Non-causal coefficients are rejected.
CadlagPath ito_euler(const std::vector<CausalFunctional>& mu,
                     const std::vector<CausalFunctional>& sigma,
                     const GeneratorSpec& spec, std::uint64_t path_index = 0);

/// Dispatch on spec.kind.
CadlagPath generate(const GeneratorSpec& spec, std::uint64_t path_index = 0);

/// Key/value description of the spec, for metadata sidecars.
std::string describe(const GeneratorSpec& spec);

}  // namespace pathcalc

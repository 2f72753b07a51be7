#include "pathcalc/simulate.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace pathcalc {

std::string to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::kBrownian: return "brownian";
    case GeneratorKind::kItoEuler: return "ito_euler";
    case GeneratorKind::kLocalVol: return "local_vol";
  }
  return "?";
}

GeneratorKind parse_generator_kind(const std::string& name) {
  if (name == "brownian") return GeneratorKind::kBrownian;
  if (name == "ito_euler") return GeneratorKind::kItoEuler;
  if (name == "local_vol") return GeneratorKind::kLocalVol;
  throw std::invalid_argument("unknown generator kind '" + name + "'");
}

void GeneratorSpec::validate() const {
  if (dimension < 1) throw std::invalid_argument("generator: dimension < 1");
  if (!(horizon > 0.0)) throw std::invalid_argument("generator: horizon must be positive");
  if (level < 1 || level > 24) throw std::invalid_argument("generator: level outside [1, 24]");
  if (x0.size() != 0 && x0.size() != dimension)
    throw std::invalid_argument("generator: x0 has wrong dimension");
  if (kind == GeneratorKind::kItoEuler) {
    if (static_cast<int>(drift.size()) != dimension)
      throw std::invalid_argument("generator: ito_euler needs d drift functionals");
    if (static_cast<int>(vol.size()) != dimension * dimension)
      throw std::invalid_argument("generator: ito_euler needs d*d vol functionals");
  }
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Vector start_point(const GeneratorSpec& spec, double fallback) {
  if (spec.x0.size() == spec.dimension) return spec.x0;
  return Vector::Constant(spec.dimension, fallback);
}

class GaussianStream {
 public:
  GaussianStream(std::uint64_t seed, std::uint64_t index)
      : engine_(stream_key(seed, index)) {}
  double next(double scale) { return scale * normal_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t path_index) {
  return splitmix64(seed ^ splitmix64(path_index + 0x9e3779b97f4a7c15ULL));
}

CadlagPath brownian_path(const GeneratorSpec& spec, std::uint64_t path_index) {
  spec.validate();
  const Partition grid = dyadic_refinement(spec.horizon, spec.level);
  const int d = spec.dimension;
  const std::size_t n = grid.size();
  const Vector x0 = start_point(spec, 0.0);
  PathBuilder b(grid, d);
  GaussianStream noise(spec.seed, path_index);
  for (int c = 0; c < d; ++c) b.set(0, c, x0[c]);
  for (std::size_t k = 1; k < n; ++k) {
    const double sd = std::sqrt(grid[k] - grid[k - 1]);
    for (int c = 0; c < d; ++c) b.set(k, c, b.get(k - 1, c) + noise.next(sd));
  }
  return std::move(b).finish();
}

CadlagPath ito_euler(const std::vector<CausalFunctional>& mu,
                     const std::vector<CausalFunctional>& sigma,
                     const GeneratorSpec& spec, std::uint64_t path_index) {
  const int d = spec.dimension;
  if (static_cast<int>(mu.size()) != d || static_cast<int>(sigma.size()) != d * d)
    throw std::invalid_argument("ito_euler: coefficient shapes do not match dimension");
  {
    const CadlagPath probe = causality_probe_path(d);
    for (const auto* group : {&mu, &sigma})
      for (const auto& f : *group)
        if (!check_causality(f, probe, probe.grid().times()))
          throw std::invalid_argument("ito_euler: coefficient '" + f.label() +
                                      "' is not causal");
  }
  const Partition grid = dyadic_refinement(spec.horizon, spec.level);
  const std::size_t n = grid.size();
  const Vector x0 = start_point(spec, 0.0);
  PathBuilder b(grid, d);
  GaussianStream noise(spec.seed, path_index);
  for (int c = 0; c < d; ++c) b.set(0, c, x0[c]);
  Vector drift(d), dw(d);
  Matrix vol(d, d);
  for (std::size_t k = 1; k < n; ++k) {
    const double t = grid[k - 1];
    const double dt = grid[k] - t;
    const double sd = std::sqrt(dt);
    // Entries at indices >= k are still zero; causal coefficients ignore them.
    const CadlagPath& sofar = b.view();
    for (int c = 0; c < d; ++c) {
      drift[c] = mu[c](t, sofar);
      for (int j = 0; j < d; ++j) vol(c, j) = sigma[c * d + j](t, sofar);
    }
    for (int j = 0; j < d; ++j) dw[j] = noise.next(sd);
    for (int c = 0; c < d; ++c) {
      double x = b.get(k - 1, c) + drift[c] * dt;
      for (int j = 0; j < d; ++j) x += vol(c, j) * dw[j];
      b.set(k, c, x);
    }
  }
  return std::move(b).finish();
}

CadlagPath generate(const GeneratorSpec& spec, std::uint64_t path_index) {
  spec.validate();
  switch (spec.kind) {
    case GeneratorKind::kBrownian:
      return brownian_path(spec, path_index);
    case GeneratorKind::kItoEuler:
      return ito_euler(spec.drift, spec.vol, spec, path_index);
    case GeneratorKind::kLocalVol: {
      const int d = spec.dimension;
      std::vector<CausalFunctional> mu, sigma;
      for (int c = 0; c < d; ++c) {
        const double a = spec.drift_rate;
        mu.push_back(make_state_functional(
            "rate*x", [c, a](double, const Vector& x) { return a * x[c]; }, {}, {}, {}));
        for (int j = 0; j < d; ++j) {
          const double s = c == j ? spec.vol_rate : 0.0;
          sigma.push_back(make_state_functional(
              "vol*x", [c, s](double, const Vector& x) { return s * x[c]; }, {}, {}, {}));
        }
      }
      GeneratorSpec local = spec;
      if (local.x0.size() == 0) local.x0 = Vector::Ones(d);
      return ito_euler(mu, sigma, local, path_index);
    }
  }
  throw std::logic_error("generate: unreachable");
}

std::string describe(const GeneratorSpec& spec) {
  std::ostringstream out;
  out.precision(17);
  out << "kind=" << to_string(spec.kind) << " dimension=" << spec.dimension
      << " horizon=" << spec.horizon << " level=" << spec.level << " seed=" << spec.seed;
  if (spec.x0.size()) {
    out << " x0=";
    for (Eigen::Index c = 0; c < spec.x0.size(); ++c) out << (c ? "," : "") << spec.x0[c];
  }
  if (spec.kind == GeneratorKind::kItoEuler) {
    out << " drift=";
    for (std::size_t c = 0; c < spec.drift.size(); ++c)
      out << (c ? "," : "") << spec.drift[c].label();
    out << " vol=";
    for (std::size_t c = 0; c < spec.vol.size(); ++c)
      out << (c ? "," : "") << spec.vol[c].label();
  }
  if (spec.kind == GeneratorKind::kLocalVol)
    out << " drift_rate=" << spec.drift_rate << " vol_rate=" << spec.vol_rate;
  return out.str();
}

}  // namespace pathcalc

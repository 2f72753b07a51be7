#include "pathcalc/functional.hpp"

#include <cmath>
#include <stdexcept>

namespace pathcalc {

CausalFunctional::CausalFunctional(std::string label, Providers providers)
    : label_(std::move(label)),
      p_(std::make_shared<const Providers>(std::move(providers))) {
  if (!p_->eval) throw std::invalid_argument("functional '" + label_ + "': no eval");
}

CausalFunctional::CausalFunctional(std::string label, EvalFn eval, BundleFn bundle)
    : CausalFunctional(std::move(label),
                       Providers{std::move(eval), std::move(bundle), {}, {}, {}, {}}) {}

double CausalFunctional::operator()(double t, const CadlagPath& omega) const {
  if (omega.dead_at(t)) return 0.0;
  return p_->eval(t, omega);
}

DerivativeBundle CausalFunctional::bundle(double t, const CadlagPath& omega) const {
  if (!p_->bundle)
    throw std::logic_error("functional '" + label_ + "' has no analytic bundle");
  if (omega.dead_at(t)) return DerivativeBundle::zero(omega.dimension());
  return p_->bundle(t, omega);
}

namespace {

void require_sorted(std::span<const double> times) {
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1]))
      throw std::invalid_argument("sweep times must be strictly increasing");
}

}  // namespace

std::vector<double> CausalFunctional::values(const CadlagPath& omega,
                                             std::span<const double> times) const {
  require_sorted(times);
  std::vector<double> out;
  if (p_->values) {
    out = p_->values(omega, times);
  } else {
    out.resize(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) out[k] = p_->eval(times[k], omega);
  }
  for (std::size_t k = 0; k < times.size(); ++k)
    if (omega.dead_at(times[k])) out[k] = 0.0;
  return out;
}

std::vector<double> CausalFunctional::frozen_values(
    const CadlagPath& omega, std::span<const double> times) const {
  require_sorted(times);
  std::vector<double> out;
  if (p_->frozen) {
    out = p_->frozen(omega, times);
  } else {
    out.resize(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
      out[k] = k == 0 ? p_->eval(times[0], omega)
                      : p_->eval(times[k], omega.stop(times[k - 1]));
    }
  }
  for (std::size_t k = 0; k < times.size(); ++k)
    if (omega.dead_at(times[k])) out[k] = 0.0;
  return out;
}

std::vector<DerivativeBundle> CausalFunctional::bundles(
    const CadlagPath& omega, std::span<const double> times) const {
  if (!p_->bundle)
    throw std::logic_error("functional '" + label_ + "' has no analytic bundle");
  require_sorted(times);
  std::vector<DerivativeBundle> out;
  if (p_->bundles) {
    out = p_->bundles(omega, times);
  } else {
    out.reserve(times.size());
    for (double t : times) out.push_back(p_->bundle(t, omega));
  }
  for (std::size_t k = 0; k < times.size(); ++k)
    if (omega.dead_at(times[k])) out[k] = DerivativeBundle::zero(omega.dimension());
  return out;
}

std::vector<DerivativeBundle> CausalFunctional::frozen_bundles(
    const CadlagPath& omega, std::span<const double> times) const {
  if (!p_->bundle)
    throw std::logic_error("functional '" + label_ + "' has no analytic bundle");
  require_sorted(times);
  std::vector<DerivativeBundle> out;
  if (p_->frozen_bundles) {
    out = p_->frozen_bundles(omega, times);
  } else {
    out.reserve(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
      out.push_back(k == 0 ? p_->bundle(times[0], omega)
                           : p_->bundle(times[k], omega.stop(times[k - 1])));
    }
  }
  for (std::size_t k = 0; k < times.size(); ++k)
    if (omega.dead_at(times[k])) out[k] = DerivativeBundle::zero(omega.dimension());
  return out;
}

CadlagPath CausalFunctional::trajectory(const CadlagPath& omega) const {
  auto v = values(omega, omega.grid().times());
  return CadlagPath::scalar(omega.grid(), std::move(v));
}

// --- causality and numeric derivatives --------------------------------------

bool check_causality(const CausalFunctional& F, const CadlagPath& omega,
                     std::span<const double> times) {
  for (double t : times) {
    if (F(t, omega) != F(t, omega.stop(t))) return false;
  }
  return true;
}

CadlagPath causality_probe_path(int dimension) {
  const Partition grid = dyadic_refinement(1.0, 6);
  std::vector<double> values(grid.size() * dimension);
  for (int c = 0; c < dimension; ++c) {
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double t = grid[k];
      values[c * grid.size() + k] =
          0.3 * std::sin(7.0 * t + c) + 0.2 * std::cos(23.0 * t * (c + 1)) + 0.1 * t;
    }
  }
  return CadlagPath(grid, dimension, std::move(values));
}

double numeric_time_derivative(const CausalFunctional& F, double t,
                               const CadlagPath& omega, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("numeric_time_derivative: h <= 0");
  if (omega.dead_at(t)) return 0.0;
  if (t + h > omega.horizon())
    throw std::domain_error("numeric_time_derivative: t + h beyond horizon");
  const CadlagPath stopped = omega.stop(t);
  return (F(t + h, stopped) - F(t, stopped)) / h;
}

double numeric_time_derivative(const CausalFunctional& F, double t,
                               const CadlagPath& omega) {
  const auto& grid = omega.grid();
  const std::size_t k = grid.index_at_or_before(t);
  if (k + 1 >= grid.size())
    throw std::domain_error("numeric_time_derivative: no grid step after t");
  return numeric_time_derivative(F, t, omega, grid[k + 1] - t);
}

Vector numeric_gradient(const CausalFunctional& F, double t,
                        const CadlagPath& omega, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("numeric_gradient: h <= 0");
  const int d = omega.dimension();
  Vector g = Vector::Zero(d);
  if (omega.dead_at(t)) return g;
  for (int i = 0; i < d; ++i) {
    Vector e = Vector::Zero(d);
    e[i] = h;
    const double up = F(t, omega.bump(t, e));
    const double dn = F(t, omega.bump(t, -e));
    g[i] = (up - dn) / (2.0 * h);
  }
  return g;
}

Matrix numeric_hessian(const CausalFunctional& F, double t,
                       const CadlagPath& omega, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("numeric_hessian: h <= 0");
  const int d = omega.dimension();
  Matrix H = Matrix::Zero(d, d);
  if (omega.dead_at(t)) return H;
  auto at = [&](const Vector& r) { return F(t, omega.bump(t, r)); };
  const double centre = at(Vector::Zero(d));
  for (int i = 0; i < d; ++i) {
    Vector ei = Vector::Zero(d);
    ei[i] = h;
    H(i, i) = (at(ei) - 2.0 * centre + at(-ei)) / (h * h);
    for (int j = i + 1; j < d; ++j) {
      Vector ej = Vector::Zero(d);
      ej[j] = h;
      const double v =
          (at(ei + ej) - at(ei - ej) - at(ej - ei) + at(-ei - ej)) / (4.0 * h * h);
      H(i, j) = v;
      H(j, i) = v;
    }
  }
  return H;
}

DerivativeBundle numeric_bundle(const CausalFunctional& F, double t,
                                const CadlagPath& omega, NumericSteps steps) {
  DerivativeBundle b;
  b.d0 = steps.time > 0.0 ? numeric_time_derivative(F, t, omega, steps.time)
                          : numeric_time_derivative(F, t, omega);
  b.grad = numeric_gradient(F, t, omega, steps.space);
  b.hess = numeric_hessian(F, t, omega, steps.space);
  return b;
}

}  // namespace pathcalc

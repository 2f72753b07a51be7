#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pathcalc/path.hpp"

namespace pathcalc {

/// Causal derivatives of F at (t, omega): time derivative, gradient and
/// Hessian of the bump map r -> F_t(omega^{t,r}).
struct DerivativeBundle {
  double d0 = 0.0;
  Vector grad;
  Matrix hess;

  static DerivativeBundle zero(int d) {
    return {0.0, Vector::Zero(d), Matrix::Zero(d, d)};
  }
};

/// Evaluation of F along a list of times t_0 < t_1 < ... on one path.
///   at[k]     = F(t_k, omega)
///   frozen[k] = F(t_k, omega stopped at t_{k-1})   (frozen[0] = at[0])
/// The frozen values are the Taylor points used by the S/T split of
/// the functional Ito formula.
using ValuesFn =
    std::function<std::vector<double>(const CadlagPath&, std::span<const double>)>;
using BundlesFn = std::function<std::vector<DerivativeBundle>(
    const CadlagPath&, std::span<const double>)>;

/// A map (t, omega) -> R that only looks at omega on [0, t].
///
/// Only `eval` is mandatory. The optional sweep providers compute the same
/// numbers as the pointwise definitions, in one pass over the path; without
/// them the sweeps fall back to per-point evaluation on stopped paths.
/// Providers must be pure and reentrant.
class CausalFunctional {
 public:
  using EvalFn = std::function<double(double, const CadlagPath&)>;
  using BundleFn = std::function<DerivativeBundle(double, const CadlagPath&)>;

  struct Providers {
    EvalFn eval;
    BundleFn bundle;           // analytic derivatives, if known
    ValuesFn values;           // at[k]
    ValuesFn frozen;           // frozen[k]
    BundlesFn bundles;         // bundle at (t_k, omega)
    BundlesFn frozen_bundles;  // bundle at (t_k, omega stopped at t_{k-1})
  };

  CausalFunctional(std::string label, Providers providers);
  CausalFunctional(std::string label, EvalFn eval, BundleFn bundle = {});

  const std::string& label() const { return label_; }

  /// F(t, omega); zero once t reaches the path's lifetime.
  double operator()(double t, const CadlagPath& omega) const;

  bool has_bundle() const { return static_cast<bool>(p_->bundle); }
  /// Analytic bundle; the zero bundle past the lifetime. Throws
  /// std::logic_error when no analytic bundle is attached.
  DerivativeBundle bundle(double t, const CadlagPath& omega) const;

  std::vector<double> values(const CadlagPath& omega,
                             std::span<const double> times) const;
  std::vector<double> frozen_values(const CadlagPath& omega,
                                    std::span<const double> times) const;
  std::vector<DerivativeBundle> bundles(const CadlagPath& omega,
                                        std::span<const double> times) const;
  std::vector<DerivativeBundle> frozen_bundles(
      const CadlagPath& omega, std::span<const double> times) const;

  /// F(., omega) sampled on the path's own grid, as a scalar path.
  CadlagPath trajectory(const CadlagPath& omega) const;

  const Providers& providers() const { return *p_; }

 private:
  std::string label_;
  std::shared_ptr<const Providers> p_;
};

// --- causality and numeric derivatives --------------------------------------

/// True iff F(t, omega) == F(t, omega stopped at t) exactly at every probe.
bool check_causality(const CausalFunctional& F, const CadlagPath& omega,
                     std::span<const double> times);

/// Deterministic zig-zag path used to screen user-supplied coefficients for
/// causality before they are accepted.
CadlagPath causality_probe_path(int dimension);

/// Forward difference of r -> F(t + r, omega stopped at t).
double numeric_time_derivative(const CausalFunctional& F, double t,
                               const CadlagPath& omega, double h);
/// As above with h = the grid step following t.
double numeric_time_derivative(const CausalFunctional& F, double t,
                               const CadlagPath& omega);

/// Central differences of r -> F(t, omega^{t,r}).
Vector numeric_gradient(const CausalFunctional& F, double t,
                        const CadlagPath& omega, double h = 1e-4);
/// Second-order central differences, symmetrised.
Matrix numeric_hessian(const CausalFunctional& F, double t,
                       const CadlagPath& omega, double h = 1e-4);

struct NumericSteps {
  double space = 1e-4;
  double time = 0.0;  // 0: one grid step
};
DerivativeBundle numeric_bundle(const CausalFunctional& F, double t,
                                const CadlagPath& omega,
                                NumericSteps steps = {});

// --- built-in constructors ---------------------------------------------------

using StateFn = std::function<double(double, const Vector&)>;
using StateGradFn = std::function<Vector(double, const Vector&)>;
using StateHessFn = std::function<Matrix(double, const Vector&)>;

/// F(t, omega) = f(t, omega(t)) with caller-supplied derivatives of f.
CausalFunctional make_state_functional(std::string label, StateFn f,
                                       StateFn df_dt, StateGradFn df_dx,
                                       StateHessFn d2f_dx2);

/// F(t, omega) = t.
CausalFunctional make_time_functional();

/// F(t, omega) = omega^i(t).
CausalFunctional make_coordinate_functional(int i);

/// F(t, omega) = int_0^t f(r, omega(r)) dr, with the integrand sampled at the
/// path's grid points (exact for step paths whose f does not depend on r).
CausalFunctional make_running_integral(std::string label, StateFn f);

/// Left-point running integral of a causal integrand: the time integral of
/// r -> G(r, omega) sampled at the grid points of omega.
CausalFunctional make_time_integral(std::string label, CausalFunctional G);

/// g: R^m -> R with gradient and Hessian, for smooth composition.
struct SmoothMap {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> grad;
  std::function<Matrix(const Vector&)> hess;
};

enum class Combine { kSum, kProduct };

/// Sum or product of one or more functionals, with chain/product-rule
/// bundles. Throws std::invalid_argument on an empty list.
CausalFunctional combine(Combine op, std::vector<CausalFunctional> parts);
/// g(F_1, ..., F_m).
CausalFunctional compose(SmoothMap g, std::vector<CausalFunctional> parts);
/// sum_i w_i F_i.
CausalFunctional linear_combination(std::vector<double> weights,
                                    std::vector<CausalFunctional> parts);

/// Indicator of a jump of the path at the current time: 1 if
/// Delta_t omega != 0. Causal but without a causal space derivative.
CausalFunctional make_jump_indicator();

/// Looks at omega(horizon) regardless of t. Not causal; used to exercise
/// the causality guards.
CausalFunctional make_anticipating_functional();

// --- continuity probes -------------------------------------------------------

struct ContinuityProbeReport {
  double radius = 0.0;
  double horizon = 0.0;
  std::vector<double> sizes;          // as requested, sorted ascending
  std::vector<double> sup_response;   // per size
  std::vector<double> modulus;        // running max of sup_response over sizes

  /// Whether the estimated modulus at the smallest positive size is below
  /// tol. Sampled evidence, never a proof.
  bool vanishing(double tol) const;
};

struct ProbeOptions {
  int samples = 16;         // random profiles per size
  int max_probe_times = 32; // grid points r <= t visited
  std::uint64_t seed = 1;
};

/// sup over probe times r <= t and profile pairs (D, D~) with
/// |D - D~|_inf = size of |F_r(omega^{r,D}) - F_r(omega^{r,D~})|.
/// Profiles are constant in time, uniform in [-R, R]^d, plus the profile
/// that cancels the path's own jump at r.
ContinuityProbeReport probe_space_continuity(const CausalFunctional& F,
                                             const CadlagPath& omega, double t,
                                             double R,
                                             std::vector<double> sizes,
                                             ProbeOptions options = {});

/// sup over probe times r <= t of |F_{r+size}(omega stopped at r) - F_r(omega)|.
ContinuityProbeReport probe_time_continuity(const CausalFunctional& F,
                                            const CadlagPath& omega, double t,
                                            double R,
                                            std::vector<double> sizes,
                                            ProbeOptions options = {});

/// CSV with header `size,sup_response`.
void write_probe_csv(std::ostream& out, const ContinuityProbeReport& report);

}  // namespace pathcalc

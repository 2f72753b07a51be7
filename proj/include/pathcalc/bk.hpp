#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "pathcalc/functional.hpp"
#include "pathcalc/path.hpp"

namespace pathcalc {

/// Settings for the pathwise (Bichteler-Karandikar) integral.
struct BkConfig {
  int max_level = 14;
  /// Consecutive-level sup gap accepted as convergence. When
  /// `scale_tolerance` is set it is multiplied by
  /// max(1, sup|z| * (max x - min x)).
  double cauchy_tol = 1e-3;
  bool scale_tolerance = true;
  /// Window for the convergence check; 0 means the whole path.
  double horizon = 0.0;
  /// On non-convergence return the zero path instead of the last iterate.
  bool strict = false;
};

/// Hitting times tau_0 = 0 < tau_1 < ... of the threshold 2^-level by z.
/// Only the finite ones are stored; the sequence continues with +infinity.
struct StoppingGrid {
  int level = 0;
  std::vector<double> times;
};

struct BkResult {
  CadlagPath path;
  bool converged = false;
  int levels_used = 0;
  double final_cauchy_gap = 0.0;
};

StoppingGrid stopping_times(const CadlagPath& z, int level, double horizon);

/// Adapted Riemann sum at one level:
///   I^n(z,x)(t) = z(0)x(0) + sum_i z(tau_i)(x(tau_{i+1} ^ t) - x(tau_i ^ t)).
/// z and x are scalar; the result lives on the union of their grids.
CadlagPath level_sum(const CadlagPath& z, const CadlagPath& x, int level);

/// Same sum on samples already aligned on one grid. `out` receives one
/// value per grid point.
void level_sum_kernel(std::span<const double> z, std::span<const double> x,
                      double threshold, std::span<double> out);

/// Level sums for n = 1..max_level of z against coordinate i of x, with a
/// consecutive-level Cauchy test.
BkResult bk_integral(const CadlagPath& z, const CadlagPath& x, int i,
                     const BkConfig& cfg);

/// Pathwise quadratic covariation
///   B^{ij} = X^i X^j - X^i_0 X^j_0 - int_(0,.] X^i_- dX^j - int_(0,.] X^j_- dX^i,
/// symmetric in (i, j) bit for bit. Rejects paths with a finite lifetime.
BkResult quad_variation(const CadlagPath& omega, int i, int j, const BkConfig& cfg);

/// J(t, omega) = I(Z(omega), X^i(omega))_t at level cfg.max_level, where the
/// integrand path is t -> Z(t, omega). Analytic bundle (0, Z_{t-} e_i, 0).
/// Z is screened for causality on a probe path of the given dimension.
CausalFunctional make_bk_functional(CausalFunctional Z, int i, int dimension,
                                    BkConfig cfg = {});

/// B^{ij} as a functional with its exact causal derivatives:
/// d0 = 0, grad_k = Delta X^j 1{k=i} + Delta X^i 1{k=j},
/// hess_kl = 1{l=j,k=i} + 1{l=i,k=j}.
CausalFunctional make_qv_functional(int i, int j, BkConfig cfg = {});

/// E_t = exp(X^1_t - B^{11}_t / 2), with d0 = 0, grad = E(1 - Delta X),
/// hess = E Delta X (Delta X - 2) in the first coordinate.
CausalFunctional doleans_dade(BkConfig cfg = {});

/// F_t = int_0^t mu_r dr + sum_i int_(0,t] sigma^i_{r-} dX^i_r, with
/// d0 = mu, grad = sigma_{t-}, hess = 0.
CausalFunctional ito_process_functional(CausalFunctional mu,
                                        std::vector<CausalFunctional> sigma,
                                        BkConfig cfg = {});

/// Levy area int X^1 dX^2 - int X^2 dX^1 of the first two coordinates.
CausalFunctional levy_area(BkConfig cfg = {});

/// Z_{t-}(omega) at each time: Z evaluated on the path with its jump at t
/// removed (Z itself at t = 0 and off the grid).
std::vector<double> left_limit_values(const CausalFunctional& Z,
                                      const CadlagPath& omega,
                                      std::span<const double> times);

/// One-line JSON record {"converged":..,"levels_used":..,"final_cauchy_gap":..}.
void write_bk_metadata(std::ostream& out, const BkResult& result);

}  // namespace pathcalc

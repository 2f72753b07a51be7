#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "pathcalc/bk.hpp"
#include "pathcalc/ensemble.hpp"
#include "pathcalc/functional.hpp"
#include "pathcalc/path.hpp"
#include "pathcalc/simulate.hpp"

namespace pathcalc {

struct ItoOptions {
  BkConfig bk;
  /// Use finite-difference bundles when F has no analytic one.
  bool numeric_fallback = false;
  NumericSteps steps;
};

/// Both sides of the functional Ito formula on the points of a partition.
struct ItoReport {
  CadlagPath lhs;             // F(t, omega) - F(0, omega)
  CadlagPath rhs;             // time_part + stochastic_part + trace_part
  double residual_sup = 0.0;  // sup_distance(lhs, rhs, T)
  CadlagPath time_part;       // sum d0F(t_{k-1}) (t_k - t_{k-1})
  CadlagPath stochastic_part; // sum grad F_{t_k-} . (X_{t_k} - X_{t_{k-1}})
  CadlagPath trace_part;      // 1/2 sum hess F_{t_k-} : (B_{t_k} - B_{t_{k-1}})
};

/// Discretised right-hand side on the points of pi (up to omega's horizon).
/// The derivatives at t_k- are taken at (t_k, omega stopped at t_{k-1});
/// the covariation increments come from quad_variation on omega itself.
/// Throws std::logic_error when F has no bundle and the fallback is off.
ItoReport ito_rhs(const CausalFunctional& F, const CadlagPath& omega,
                  const Partition& pi, const ItoOptions& options = {});

/// ito_rhs plus lhs(t) = F(t, omega) - F(0, omega) and the residual.
ItoReport ito_residual(const CausalFunctional& F, const CadlagPath& omega,
                       const Partition& pi, const ItoOptions& options = {});

/// CSV with header `t,lhs,rhs,residual`.
void write_ito_trace(std::ostream& out, const ItoReport& report);

/// Cumulative space and time increments along omega^pi:
///   S_k = F_{t_k}(w stopped at t_k) - F_{t_k}(w stopped at t_{k-1})
///   T_k = F_{t_k}(w stopped at t_{k-1}) - F_{t_{k-1}}(w stopped at t_{k-1})
struct StDecomposition {
  CadlagPath space;      // sum_{j<=k} S_j
  CadlagPath time;       // sum_{j<=k} T_j
  CadlagPath increment;  // F(t_k, w) - F(0, w)
  /// max_k |space + time - increment|
  double telescoping_error = 0.0;
};

StDecomposition st_decomposition(const CausalFunctional& F, const CadlagPath& omega,
                                 const Partition& pi);

/// Per-level ensemble statistics of a sup-distance.
struct ConvergenceReport {
  std::vector<int> levels;
  std::vector<double> median;
  std::vector<double> upper;  // `upper_quantile` quantile
  double upper_quantile = 0.9;
  double threshold = 0.0;
  bool causal = true;
  bool decreasing = false;   // medians strictly decreasing
  bool final_below = false;  // last median <= threshold
  /// samples[l][p]: statistic of path p at levels[l].
  std::vector<std::vector<double>> samples;

  bool passed() const { return causal && decreasing && final_below; }
};

struct EnsembleOptions {
  std::size_t ensemble_size = 100;
  Execution execution = Execution::kParallel;
  int threads = 0;
  double threshold = 1e-1;
  double upper_quantile = 0.9;
};

/// For each level n: sup_distance(F(., omega^{pi(n)}), F(., omega), T) over
/// generated paths omega. F is screened for causality first; a non-causal
/// F gives a report with causal == false and no statistics.
ConvergenceReport regularity_report(const CausalFunctional& F, const GeneratorSpec& generator,
                                    const std::vector<int>& levels,
                                    const EnsembleOptions& options = {});

/// Itô residual of F along dyadic partitions of the given levels, on paths
/// generated at generator.level (which must be >= every level).
ConvergenceReport ito_residual_study(const CausalFunctional& F,
                                     const GeneratorSpec& generator,
                                     const std::vector<int>& levels,
                                     const ItoOptions& ito = {},
                                     const EnsembleOptions& options = {});

/// Least-squares slope of log(median) against log(mesh) for dyadic levels
/// on [0, horizon]. NaN when any median is not positive.
double observed_order(const ConvergenceReport& report, double horizon);

/// Builds the report from an ensemble result whose columns are levels.
ConvergenceReport summarize(std::vector<int> levels,
                            const std::vector<std::vector<double>>& rows,
                            double threshold, double upper_quantile);

/// CSV with header `level,median_sup,q90_sup`.
void write_convergence_csv(std::ostream& out, const ConvergenceReport& report);

/// d0F + 1/2 trace(hess F * sigma2) at (t, omega), from the analytic bundle.
double heat_operator(const CausalFunctional& F, const CadlagPath& omega, double t,
                     const Matrix& sigma2);

}  // namespace pathcalc

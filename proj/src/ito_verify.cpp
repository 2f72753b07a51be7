#include "pathcalc/ito_verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace pathcalc {

namespace {

// Points of pi inside omega's horizon; the horizon itself is appended.
std::vector<double> partition_times(const CadlagPath& omega, const Partition& pi) {
  std::vector<double> times;
  const double T = omega.horizon();
  for (double t : pi.times())
    if (t <= T) times.push_back(t);
  if (times.back() != T) times.push_back(T);
  return times;
}

struct SweepBundles {
  std::vector<double> d0;          // at t_k on omega
  std::vector<DerivativeBundle> fr;  // at (t_k, omega stopped at t_{k-1})
};

SweepBundles sweep_bundles(const CausalFunctional& F, const CadlagPath& omega,
                           std::span<const double> times, const ItoOptions& opt) {
  SweepBundles s;
  const std::size_t n = times.size();
  if (F.has_bundle()) {
    const auto at = F.bundles(omega, times);
    s.d0.resize(n);
    for (std::size_t k = 0; k < n; ++k) s.d0[k] = at[k].d0;
    s.fr = F.frozen_bundles(omega, times);
    return s;
  }
  if (!opt.numeric_fallback)
    throw std::logic_error("ito_rhs: functional '" + F.label() +
                           "' has no analytic bundle and numeric fallback is off");
  s.d0.assign(n, 0.0);
  s.fr.resize(n);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double h = opt.steps.time > 0.0 ? opt.steps.time : times[k + 1] - times[k];
    s.d0[k] = numeric_time_derivative(F, times[k], omega, h);
  }
  for (std::size_t k = 0; k < n; ++k) {
    const CadlagPath base = k == 0 ? omega : omega.stop(times[k - 1]);
    s.fr[k].d0 = 0.0;
    s.fr[k].grad = numeric_gradient(F, times[k], base, opt.steps.space);
    s.fr[k].hess = numeric_hessian(F, times[k], base, opt.steps.space);
  }
  return s;
}

CadlagPath scalar_on(std::span<const double> times, std::vector<double> values) {
  return CadlagPath::scalar(Partition(std::vector<double>(times.begin(), times.end())),
                            std::move(values));
}

}  // namespace

ItoReport ito_rhs(const CausalFunctional& F, const CadlagPath& omega, const Partition& pi,
                  const ItoOptions& options) {
  const std::vector<double> times = partition_times(omega, pi);
  const std::size_t n = times.size();
  const int d = omega.dimension();
  const SweepBundles sb = sweep_bundles(F, omega, times, options);

  std::vector<std::vector<double>> x(d);
  for (int c = 0; c < d; ++c) x[c] = sample_coordinate(omega, c, times);

  // Covariation samples, only for pairs the Hessian actually touches.
  std::vector<std::vector<double>> qv(static_cast<std::size_t>(d * d));
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      bool used = false;
      for (std::size_t k = 1; k < n && !used; ++k)
        used = sb.fr[k].hess(i, j) != 0.0 || sb.fr[k].hess(j, i) != 0.0;
      if (!used) continue;
      const BkResult b = quad_variation(omega, i, j, options.bk);
      qv[i * d + j] = sample_coordinate(b.path, 0, times);
      qv[j * d + i] = qv[i * d + j];
    }
  }

  std::vector<double> tp(n, 0.0), sp(n, 0.0), hp(n, 0.0), total(n, 0.0);
  for (std::size_t k = 1; k < n; ++k) {
    tp[k] = tp[k - 1] + sb.d0[k - 1] * (times[k] - times[k - 1]);
    const DerivativeBundle& b = sb.fr[k];
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += b.grad[i] * (x[i][k] - x[i][k - 1]);
    sp[k] = sp[k - 1] + s;
    double h = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const auto& q = qv[i * d + j];
        if (!q.empty()) h += b.hess(i, j) * (q[k] - q[k - 1]);
      }
    hp[k] = hp[k - 1] + 0.5 * h;
    total[k] = tp[k] + sp[k] + hp[k];
  }

  ItoReport r{scalar_on(times, std::vector<double>(n, 0.0)),
              scalar_on(times, std::move(total)),
              0.0,
              scalar_on(times, std::move(tp)),
              scalar_on(times, std::move(sp)),
              scalar_on(times, std::move(hp))};
  return r;
}

ItoReport ito_residual(const CausalFunctional& F, const CadlagPath& omega,
                       const Partition& pi, const ItoOptions& options) {
  ItoReport r = ito_rhs(F, omega, pi, options);
  const auto times = r.rhs.grid().times();
  std::vector<double> v = F.values(omega, times);
  const double f0 = v[0];
  for (double& e : v) e -= f0;
  r.lhs = CadlagPath::scalar(r.rhs.grid(), std::move(v));
  r.residual_sup = sup_distance(r.lhs, r.rhs, r.rhs.horizon());
  return r;
}

void write_ito_trace(std::ostream& out, const ItoReport& report) {
  char buf[128];
  out << "t,lhs,rhs,residual\n";
  const auto& g = report.rhs.grid();
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double l = report.lhs.at(k, 0), r = report.rhs.at(k, 0);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", g[k], l, r, l - r);
    out << buf;
  }
}

StDecomposition st_decomposition(const CausalFunctional& F, const CadlagPath& omega,
                                 const Partition& pi) {
  const CadlagPath wpi = piecewise_constant(omega, pi);
  const auto times = wpi.grid().times();
  const std::size_t n = times.size();
  const auto at = F.values(wpi, times);
  const auto fr = F.frozen_values(wpi, times);
  std::vector<double> s(n, 0.0), t(n, 0.0), inc(n, 0.0);
  double err = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    s[k] = s[k - 1] + (at[k] - fr[k]);
    t[k] = t[k - 1] + (fr[k] - at[k - 1]);
    inc[k] = at[k] - at[0];
    err = std::max(err, std::abs(s[k] + t[k] - inc[k]));
  }
  return {CadlagPath::scalar(wpi.grid(), std::move(s)),
          CadlagPath::scalar(wpi.grid(), std::move(t)),
          CadlagPath::scalar(wpi.grid(), std::move(inc)), err};
}

ConvergenceReport summarize(std::vector<int> levels,
                            const std::vector<std::vector<double>>& rows, double threshold,
                            double upper_quantile) {
  ConvergenceReport rep;
  rep.levels = std::move(levels);
  rep.threshold = threshold;
  rep.upper_quantile = upper_quantile;
  for (std::size_t l = 0; l < rep.levels.size(); ++l) {
    rep.samples.push_back(column(rows, l));
    rep.median.push_back(quantile(rep.samples.back(), 0.5));
    rep.upper.push_back(quantile(rep.samples.back(), upper_quantile));
  }
  rep.decreasing = !rep.median.empty();
  for (std::size_t l = 1; l < rep.median.size(); ++l)
    rep.decreasing = rep.decreasing && rep.median[l] < rep.median[l - 1];
  rep.final_below = !rep.median.empty() && rep.median.back() <= threshold;
  return rep;
}

namespace {

void require_levels(const std::vector<int>& levels) {
  if (levels.empty()) throw std::invalid_argument("report: no levels");
  for (std::size_t l = 0; l < levels.size(); ++l) {
    if (levels[l] < 0) throw std::invalid_argument("report: negative level");
    if (l > 0 && levels[l] <= levels[l - 1])
      throw std::invalid_argument("report: levels must be increasing");
  }
}

}  // namespace

ConvergenceReport regularity_report(const CausalFunctional& F, const GeneratorSpec& generator,
                                    const std::vector<int>& levels,
                                    const EnsembleOptions& options) {
  require_levels(levels);
  generator.validate();
  {
    const CadlagPath probe = causality_probe_path(generator.dimension);
    const CadlagPath first = generate(generator, 0);
    std::vector<double> sample;
    const auto ft = first.grid().times();
    const std::size_t stride = std::max<std::size_t>(1, ft.size() / 32);
    for (std::size_t k = 0; k < ft.size(); k += stride) sample.push_back(ft[k]);
    if (!check_causality(F, probe, probe.grid().times()) ||
        !check_causality(F, first, sample)) {
      ConvergenceReport rep;
      rep.levels = levels;
      rep.threshold = options.threshold;
      rep.upper_quantile = options.upper_quantile;
      rep.causal = false;
      return rep;
    }
  }
  const PathKernel kernel = [&](std::uint64_t idx) {
    const CadlagPath w = generate(generator, idx);
    const auto times = w.grid().times();
    const std::vector<double> exact = F.values(w, times);
    std::vector<double> row;
    for (int n : levels) {
      const CadlagPath wn = piecewise_constant(w, dyadic_refinement(generator.horizon, n));
      const std::vector<double> approx = F.values(wn, times);
      double sup = 0.0;
      for (std::size_t k = 0; k < times.size(); ++k)
        sup = std::max(sup, std::abs(approx[k] - exact[k]));
      row.push_back(sup);
    }
    return row;
  };
  const auto rows =
      run_ensemble(options.ensemble_size, kernel, options.execution, options.threads);
  return summarize(levels, rows, options.threshold, options.upper_quantile);
}

ConvergenceReport ito_residual_study(const CausalFunctional& F,
                                     const GeneratorSpec& generator,
                                     const std::vector<int>& levels, const ItoOptions& ito,
                                     const EnsembleOptions& options) {
  require_levels(levels);
  generator.validate();
  if (levels.back() > generator.level)
    throw std::invalid_argument("ito_residual_study: partition finer than the path grid");
  if (!F.has_bundle() && !ito.numeric_fallback)
    throw std::logic_error("ito_residual_study: functional '" + F.label() +
                           "' has no analytic bundle");
  const PathKernel kernel = [&](std::uint64_t idx) {
    const CadlagPath w = generate(generator, idx);
    std::vector<double> row;
    for (int n : levels)
      row.push_back(
          ito_residual(F, w, dyadic_refinement(generator.horizon, n), ito).residual_sup);
    return row;
  };
  const auto rows =
      run_ensemble(options.ensemble_size, kernel, options.execution, options.threads);
  return summarize(levels, rows, options.threshold, options.upper_quantile);
}

double observed_order(const ConvergenceReport& report, double horizon) {
  const std::size_t m = report.median.size();
  if (m < 2) return std::numeric_limits<double>::quiet_NaN();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t l = 0; l < m; ++l) {
    if (!(report.median[l] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    const double x = std::log(std::ldexp(horizon, -report.levels[l]));
    const double y = std::log(report.median[l]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double dm = static_cast<double>(m);
  return (dm * sxy - sx * sy) / (dm * sxx - sx * sx);
}

void write_convergence_csv(std::ostream& out, const ConvergenceReport& report) {
  char buf[128];
  out << "level,median_sup,q90_sup\n";
  for (std::size_t l = 0; l < report.median.size(); ++l) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", report.levels[l], report.median[l],
                  report.upper[l]);
    out << buf;
  }
}

double heat_operator(const CausalFunctional& F, const CadlagPath& omega, double t,
                     const Matrix& sigma2) {
  const int d = omega.dimension();
  if (sigma2.rows() != d || sigma2.cols() != d)
    throw std::invalid_argument("heat_operator: sigma2 must be d x d");
  const DerivativeBundle b = F.bundle(t, omega);
  return b.d0 + 0.5 * (b.hess * sigma2).trace();
}

}  // namespace pathcalc

#include "pathcalc/bk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace pathcalc {

StoppingGrid stopping_times(const CadlagPath& z, int level, double horizon) {
  if (z.dimension() != 1) throw std::invalid_argument("stopping_times: z must be scalar");
  const double threshold = std::ldexp(1.0, -level);
  const auto grid = z.grid().times();
  const auto v = z.coordinate(0);
  StoppingGrid out;
  out.level = level;
  out.times.push_back(0.0);
  double ref = v[0];
  for (std::size_t k = 1; k < grid.size() && grid[k] <= horizon; ++k) {
    if (std::abs(v[k] - ref) >= threshold) {
      out.times.push_back(grid[k]);
      ref = v[k];
    }
  }
  return out;
}

void level_sum_kernel(std::span<const double> z, std::span<const double> x,
                      double threshold, std::span<double> out) {
  const std::size_t n = z.size();
  if (x.size() != n || out.size() != n)
    throw std::invalid_argument("level_sum_kernel: length mismatch");
  if (n == 0) return;
  double acc = z[0] * x[0];
  double z_ref = z[0];
  double x_ref = x[0];
  out[0] = acc;
  for (std::size_t k = 1; k < n; ++k) {
    if (std::abs(z[k] - z_ref) >= threshold) {
      acc += z_ref * (x[k] - x_ref);
      z_ref = z[k];
      x_ref = x[k];
      out[k] = acc;
    } else {
      out[k] = acc + z_ref * (x[k] - x_ref);
    }
  }
}

namespace {

double threshold_for(int level) { return std::ldexp(1.0, -level); }

struct Aligned {
  Partition grid;
  std::vector<double> z, x;
};

Aligned align(const CadlagPath& z, const CadlagPath& x, int i) {
  if (z.dimension() != 1) throw std::invalid_argument("bk: integrand must be scalar");
  if (i < 0 || i >= x.dimension()) throw std::invalid_argument("bk: bad coordinate");
  if (z.grid() == x.grid()) {
    const auto zc = z.coordinate(0);
    const auto xc = x.coordinate(i);
    return {z.grid(), {zc.begin(), zc.end()}, {xc.begin(), xc.end()}};
  }
  const double T = std::min(z.horizon(), x.horizon());
  Partition grid = merge_grids(z.grid(), x.grid(), T);
  auto zs = sample_coordinate(z, 0, grid.times());
  auto xs = sample_coordinate(x, i, grid.times());
  return {std::move(grid), std::move(zs), std::move(xs)};
}

std::size_t window_end(const Partition& grid, double horizon) {
  if (horizon <= 0.0 || horizon >= grid.horizon()) return grid.size();
  return grid.index_at_or_before(horizon) + 1;
}

double max_gap(const std::vector<double>& a, const std::vector<double>& b,
               std::size_t end) {
  double g = 0.0;
  for (std::size_t k = 0; k < end; ++k) g = std::max(g, std::abs(a[k] - b[k]));
  return g;
}

double path_scale(std::span<const double> z, std::span<const double> x) {
  if (z.empty()) return 1.0;
  double zmax = 0.0;
  for (double v : z) zmax = std::max(zmax, std::abs(v));
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  return std::max(1.0, zmax * (*hi - *lo));
}

// Integrand samples t -> Z(t, omega) on the grid of omega, integrated
// against coordinate i at one level.
std::vector<double> bk_values(const CausalFunctional& Z, const CadlagPath& w, int i,
                              int level) {
  const auto z = Z.values(w, w.grid().times());
  std::vector<double> out(w.size());
  level_sum_kernel(z, w.coordinate(i), threshold_for(level), out);
  return out;
}

void require_infinite_lifetime(const CadlagPath& w) {
  if (w.lifetime())
    throw std::invalid_argument("quadratic variation: path has a finite lifetime");
}

// B^{ij} samples on the grid of omega at one level.
std::vector<double> qv_values(const CadlagPath& w, int i, int j, int level) {
  require_infinite_lifetime(w);
  if (i < 0 || j < 0 || i >= w.dimension() || j >= w.dimension())
    throw std::invalid_argument("quad_variation: bad coordinate");
  const int lo = std::min(i, j), hi = std::max(i, j);
  const auto xl = w.coordinate(lo);
  const auto xh = w.coordinate(hi);
  const double thr = threshold_for(level);
  const std::size_t n = w.size();
  std::vector<double> a(n), b(n);
  level_sum_kernel(xl, xh, thr, a);
  if (lo == hi) {
    b = a;
  } else {
    level_sum_kernel(xh, xl, thr, b);
  }
  std::vector<double> out(n);
  const double start = xl[0] * xh[0];
  for (std::size_t k = 0; k < n; ++k) out[k] = (xl[k] * xh[k] + start) - (a[k] + b[k]);
  return out;
}

// Samples of a per-grid-point vector at arbitrary (sorted) times.
std::vector<double> sample_on(const CadlagPath& w, const std::vector<double>& vals,
                              std::span<const double> times) {
  const CadlagPath p = CadlagPath::scalar(w.grid(), vals);
  return sample_coordinate(p, 0, times);
}

std::vector<double> shift_previous(const std::vector<double>& at) {
  std::vector<double> out(at.size());
  for (std::size_t k = 0; k < at.size(); ++k) out[k] = k == 0 ? at[0] : at[k - 1];
  return out;
}

double value_at(const CadlagPath& w, const std::vector<double>& vals, double t) {
  return vals[w.grid().index_at_or_before(t)];
}

// Jump of coordinate c at t, with no jump registered at t = 0.
double jump_or_zero(const CadlagPath& w, double t, int c) {
  const auto j = w.jump(t);
  return j ? (*j)[c] : 0.0;
}

Vector left_limit_or_start(const CadlagPath& w, double t) {
  auto l = w.left_limit(t);
  return l ? *l : w.eval(0.0);
}

}  // namespace

CadlagPath level_sum(const CadlagPath& z, const CadlagPath& x, int level) {
  if (x.dimension() != 1) throw std::invalid_argument("level_sum: x must be scalar");
  Aligned a = align(z, x, 0);
  std::vector<double> out(a.z.size());
  level_sum_kernel(a.z, a.x, threshold_for(level), out);
  return CadlagPath::scalar(std::move(a.grid), std::move(out));
}

BkResult bk_integral(const CadlagPath& z, const CadlagPath& x, int i,
                     const BkConfig& cfg) {
  if (cfg.max_level < 1) throw std::invalid_argument("bk_integral: max_level < 1");
  if (!(cfg.cauchy_tol > 0.0)) throw std::invalid_argument("bk_integral: cauchy_tol <= 0");
  Aligned a = align(z, x, i);
  const std::size_t n = a.z.size();
  const std::size_t end = window_end(a.grid, cfg.horizon);
  const double tol =
      cfg.scale_tolerance ? cfg.cauchy_tol * path_scale(a.z, a.x) : cfg.cauchy_tol;

  std::vector<double> prev(n), cur(n);
  double gap = std::numeric_limits<double>::infinity();
  for (int level = 1; level <= cfg.max_level; ++level) {
    level_sum_kernel(a.z, a.x, threshold_for(level), cur);
    if (level > 1) gap = max_gap(prev, cur, end);
    std::swap(prev, cur);
  }
  BkResult r{CadlagPath::scalar(a.grid, std::move(prev)), gap <= tol, cfg.max_level, gap};
  if (cfg.strict && !r.converged)
    r.path = CadlagPath::scalar(a.grid, std::vector<double>(n, 0.0));
  return r;
}

BkResult quad_variation(const CadlagPath& omega, int i, int j, const BkConfig& cfg) {
  if (cfg.max_level < 1) throw std::invalid_argument("quad_variation: max_level < 1");
  require_infinite_lifetime(omega);
  if (i < 0 || j < 0 || i >= omega.dimension() || j >= omega.dimension())
    throw std::invalid_argument("quad_variation: bad coordinate");
  const std::size_t end = window_end(omega.grid(), cfg.horizon);
  double tol = cfg.cauchy_tol;
  if (cfg.scale_tolerance) {
    // Two integrals with integrand X^i (resp. X^j) against X^j (resp. X^i).
    tol *= std::max(path_scale(omega.coordinate(i), omega.coordinate(j)),
                    path_scale(omega.coordinate(j), omega.coordinate(i)));
  }
  std::vector<double> prev;
  double gap = std::numeric_limits<double>::infinity();
  for (int level = 1; level <= cfg.max_level; ++level) {
    auto cur = qv_values(omega, i, j, level);
    if (level > 1) gap = max_gap(prev, cur, end);
    prev = std::move(cur);
  }
  BkResult r{CadlagPath::scalar(omega.grid(), std::move(prev)), gap <= tol,
             cfg.max_level, gap};
  if (cfg.strict && !r.converged)
    r.path = CadlagPath::scalar(omega.grid(), std::vector<double>(omega.size(), 0.0));
  return r;
}

std::vector<double> left_limit_values(const CausalFunctional& Z, const CadlagPath& omega,
                                      std::span<const double> times) {
  const auto& grid = omega.grid();
  // Z(t_m, omega stopped at t_{m-1}) is Z_{t_m-} for every grid point t_m.
  const auto on_grid = Z.frozen_values(omega, grid.times());
  std::vector<double> off_times;
  for (double t : times)
    if (!grid.find(t)) off_times.push_back(t);
  const auto off = Z.values(omega, off_times);
  std::vector<double> out(times.size());
  std::size_t o = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (auto m = grid.find(times[k])) {
      out[k] = on_grid[*m];
    } else {
      out[k] = off[o++];
    }
  }
  return out;
}

CausalFunctional make_bk_functional(CausalFunctional Z, int i, int dimension,
                                    BkConfig cfg) {
  if (i < 0 || i >= dimension) throw std::invalid_argument("bk functional: bad coordinate");
  {
    const CadlagPath probe = causality_probe_path(dimension);
    if (!check_causality(Z, probe, probe.grid().times()))
      throw std::invalid_argument("bk functional: integrand '" + Z.label() +
                                  "' is not causal");
  }
  const int L = cfg.max_level;
  CausalFunctional::Providers p;
  p.eval = [Z, i, L](double t, const CadlagPath& w) {
    const CadlagPath s = w.stop(t);
    return value_at(s, bk_values(Z, s, i, L), t);
  };
  p.values = [Z, i, L](const CadlagPath& w, std::span<const double> times) {
    return sample_on(w, bk_values(Z, w, i, L), times);
  };
  p.frozen = [Z, i, L](const CadlagPath& w, std::span<const double> times) {
    return shift_previous(sample_on(w, bk_values(Z, w, i, L), times));
  };
  auto grad_bundle = [i](int d, double zl) {
    auto b = DerivativeBundle::zero(d);
    b.grad[i] = zl;
    return b;
  };
  p.bundle = [Z, grad_bundle](double t, const CadlagPath& w) {
    return grad_bundle(w.dimension(), Z(t, w.without_jump(t)));
  };
  p.bundles = [Z, grad_bundle](const CadlagPath& w, std::span<const double> times) {
    const auto zl = left_limit_values(Z, w, times);
    std::vector<DerivativeBundle> out;
    for (double v : zl) out.push_back(grad_bundle(w.dimension(), v));
    return out;
  };
  p.frozen_bundles = [Z, grad_bundle](const CadlagPath& w,
                                      std::span<const double> times) {
    const auto zl = Z.frozen_values(w, times);
    std::vector<DerivativeBundle> out;
    for (double v : zl) out.push_back(grad_bundle(w.dimension(), v));
    return out;
  };
  return CausalFunctional("J[" + Z.label() + ",x" + std::to_string(i + 1) + "]",
                          std::move(p));
}

CausalFunctional make_qv_functional(int i, int j, BkConfig cfg) {
  if (i < 0 || j < 0) throw std::invalid_argument("qv functional: bad coordinate");
  const int L = cfg.max_level;
  auto bundle_for = [i, j](int d, double dxi, double dxj) {
    auto b = DerivativeBundle::zero(d);
    b.grad[i] += dxj;
    b.grad[j] += dxi;
    b.hess(i, j) += 1.0;
    b.hess(j, i) += 1.0;
    return b;
  };
  CausalFunctional::Providers p;
  p.eval = [i, j, L](double t, const CadlagPath& w) {
    const CadlagPath s = w.stop(t);
    return value_at(s, qv_values(s, i, j, L), t);
  };
  p.values = [i, j, L](const CadlagPath& w, std::span<const double> times) {
    return sample_on(w, qv_values(w, i, j, L), times);
  };
  p.frozen = [i, j, L](const CadlagPath& w, std::span<const double> times) {
    return shift_previous(sample_on(w, qv_values(w, i, j, L), times));
  };
  p.bundle = [i, j, bundle_for](double t, const CadlagPath& w) {
    return bundle_for(w.dimension(), jump_or_zero(w, t, i), jump_or_zero(w, t, j));
  };
  p.bundles = [i, j, bundle_for](const CadlagPath& w, std::span<const double> times) {
    std::vector<DerivativeBundle> out;
    for (double t : times)
      out.push_back(bundle_for(w.dimension(), jump_or_zero(w, t, i), jump_or_zero(w, t, j)));
    return out;
  };
  p.frozen_bundles = [bundle_for](const CadlagPath& w, std::span<const double> times) {
    return std::vector<DerivativeBundle>(times.size(), bundle_for(w.dimension(), 0.0, 0.0));
  };
  return CausalFunctional("B" + std::to_string(i + 1) + std::to_string(j + 1),
                          std::move(p));
}

CausalFunctional doleans_dade(BkConfig cfg) {
  const int L = cfg.max_level;
  auto exp_values = [L](const CadlagPath& w) {
    auto b = qv_values(w, 0, 0, L);
    const auto x = w.coordinate(0);
    for (std::size_t k = 0; k < b.size(); ++k) b[k] = std::exp(x[k] - 0.5 * b[k]);
    return b;
  };
  auto bundle_for = [](int d, double e, double dx) {
    auto b = DerivativeBundle::zero(d);
    b.grad[0] = e * (1.0 - dx);
    b.hess(0, 0) = e * dx * (dx - 2.0);
    return b;
  };
  CausalFunctional::Providers p;
  p.eval = [exp_values](double t, const CadlagPath& w) {
    const CadlagPath s = w.stop(t);
    return value_at(s, exp_values(s), t);
  };
  p.values = [exp_values](const CadlagPath& w, std::span<const double> times) {
    return sample_on(w, exp_values(w), times);
  };
  p.frozen = [exp_values](const CadlagPath& w, std::span<const double> times) {
    return shift_previous(sample_on(w, exp_values(w), times));
  };
  p.bundle = [exp_values, bundle_for](double t, const CadlagPath& w) {
    const CadlagPath s = w.stop(t);
    return bundle_for(w.dimension(), value_at(s, exp_values(s), t), jump_or_zero(w, t, 0));
  };
  p.bundles = [exp_values, bundle_for](const CadlagPath& w, std::span<const double> times) {
    const auto e = sample_on(w, exp_values(w), times);
    std::vector<DerivativeBundle> out;
    for (std::size_t k = 0; k < times.size(); ++k)
      out.push_back(bundle_for(w.dimension(), e[k], jump_or_zero(w, times[k], 0)));
    return out;
  };
  p.frozen_bundles = [exp_values, bundle_for](const CadlagPath& w,
                                              std::span<const double> times) {
    const auto e = shift_previous(sample_on(w, exp_values(w), times));
    std::vector<DerivativeBundle> out;
    for (double v : e) out.push_back(bundle_for(w.dimension(), v, 0.0));
    return out;
  };
  return CausalFunctional("doleans_dade", std::move(p));
}

CausalFunctional ito_process_functional(CausalFunctional mu,
                                        std::vector<CausalFunctional> sigma,
                                        BkConfig cfg) {
  const int L = cfg.max_level;
  const CausalFunctional drift = make_time_integral("int_mu", mu);
  // Stochastic part on the grid of w: sum_i (I(sigma^i, X^i) - sigma^i_0 x^i_0).
  auto stoch_values = [sigma, L](const CadlagPath& w) {
    if (static_cast<int>(sigma.size()) > w.dimension())
      throw std::invalid_argument("ito_process_functional: more sigmas than coordinates");
    std::vector<double> total(w.size(), 0.0);
    for (std::size_t i = 0; i < sigma.size(); ++i) {
      const auto z = sigma[i].values(w, w.grid().times());
      const auto x = w.coordinate(static_cast<int>(i));
      std::vector<double> I(w.size());
      level_sum_kernel(z, x, threshold_for(L), I);
      const double start = z[0] * x[0];
      for (std::size_t k = 0; k < w.size(); ++k) total[k] += I[k] - start;
    }
    return total;
  };
  CausalFunctional::Providers p;
  p.eval = [drift, stoch_values](double t, const CadlagPath& w) {
    const CadlagPath s = w.stop(t);
    return drift(t, s) + value_at(s, stoch_values(s), t);
  };
  p.values = [drift, stoch_values](const CadlagPath& w, std::span<const double> times) {
    auto out = drift.values(w, times);
    const auto st = sample_on(w, stoch_values(w), times);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += st[k];
    return out;
  };
  p.frozen = [drift, stoch_values](const CadlagPath& w, std::span<const double> times) {
    auto out = drift.frozen_values(w, times);
    const auto st = shift_previous(sample_on(w, stoch_values(w), times));
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += st[k];
    return out;
  };
  p.bundle = [mu, sigma](double t, const CadlagPath& w) {
    auto b = DerivativeBundle::zero(w.dimension());
    b.d0 = mu(t, w);
    const CadlagPath pre = w.without_jump(t);
    for (std::size_t i = 0; i < sigma.size(); ++i) b.grad[i] = sigma[i](t, pre);
    return b;
  };
  p.bundles = [mu, sigma](const CadlagPath& w, std::span<const double> times) {
    std::vector<DerivativeBundle> out(times.size(), DerivativeBundle::zero(w.dimension()));
    const auto m = mu.values(w, times);
    for (std::size_t k = 0; k < times.size(); ++k) out[k].d0 = m[k];
    for (std::size_t i = 0; i < sigma.size(); ++i) {
      const auto s = left_limit_values(sigma[i], w, times);
      for (std::size_t k = 0; k < times.size(); ++k) out[k].grad[i] = s[k];
    }
    return out;
  };
  p.frozen_bundles = [mu, sigma](const CadlagPath& w, std::span<const double> times) {
    std::vector<DerivativeBundle> out(times.size(), DerivativeBundle::zero(w.dimension()));
    const auto m = mu.frozen_values(w, times);
    for (std::size_t k = 0; k < times.size(); ++k) out[k].d0 = m[k];
    for (std::size_t i = 0; i < sigma.size(); ++i) {
      const auto s = sigma[i].frozen_values(w, times);
      for (std::size_t k = 0; k < times.size(); ++k) out[k].grad[i] = s[k];
    }
    return out;
  };
  return CausalFunctional("ito_process", std::move(p));
}

CausalFunctional levy_area(BkConfig cfg) {
  const int L = cfg.max_level;
  auto area_values = [L](const CadlagPath& w) {
    if (w.dimension() < 2) throw std::invalid_argument("levy_area: needs dimension >= 2");
    const auto x1 = w.coordinate(0);
    const auto x2 = w.coordinate(1);
    std::vector<double> a(w.size()), b(w.size());
    level_sum_kernel(x1, x2, threshold_for(L), a);
    level_sum_kernel(x2, x1, threshold_for(L), b);
    for (std::size_t k = 0; k < a.size(); ++k) a[k] -= b[k];
    return a;
  };
  auto bundle_for = [](int d, const Vector& x_before) {
    auto b = DerivativeBundle::zero(d);
    b.grad[0] = -x_before[1];
    b.grad[1] = x_before[0];
    return b;
  };
  CausalFunctional::Providers p;
  p.eval = [area_values](double t, const CadlagPath& w) {
    const CadlagPath s = w.stop(t);
    return value_at(s, area_values(s), t);
  };
  p.values = [area_values](const CadlagPath& w, std::span<const double> times) {
    return sample_on(w, area_values(w), times);
  };
  p.frozen = [area_values](const CadlagPath& w, std::span<const double> times) {
    return shift_previous(sample_on(w, area_values(w), times));
  };
  p.bundle = [bundle_for](double t, const CadlagPath& w) {
    return bundle_for(w.dimension(), left_limit_or_start(w, t));
  };
  p.bundles = [bundle_for](const CadlagPath& w, std::span<const double> times) {
    std::vector<DerivativeBundle> out;
    for (double t : times) out.push_back(bundle_for(w.dimension(), left_limit_or_start(w, t)));
    return out;
  };
  p.frozen_bundles = [bundle_for](const CadlagPath& w, std::span<const double> times) {
    std::vector<DerivativeBundle> out;
    for (std::size_t k = 0; k < times.size(); ++k)
      out.push_back(bundle_for(w.dimension(), k == 0 ? left_limit_or_start(w, times[0])
                                                     : w.eval(times[k - 1])));
    return out;
  };
  return CausalFunctional("levy_area", std::move(p));
}

void write_bk_metadata(std::ostream& out, const BkResult& result) {
  nlohmann::ordered_json j;
  j["converged"] = result.converged;
  j["levels_used"] = result.levels_used;
  if (std::isfinite(result.final_cauchy_gap)) {
    j["final_cauchy_gap"] = result.final_cauchy_gap;
  } else {
    j["final_cauchy_gap"] = nullptr;
  }
  out << j.dump() << '\n';
}

}  // namespace pathcalc

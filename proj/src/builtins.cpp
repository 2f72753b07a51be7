#include <algorithm>
#include <stdexcept>

#include "pathcalc/functional.hpp"

namespace pathcalc {

namespace {

// Samples omega at each time, and omega at the previous time for the frozen
// (stopped) variant. Row k of the result is a d-vector.
std::vector<Vector> rows_at(const CadlagPath& omega, std::span<const double> times,
                            bool frozen) {
  const int d = omega.dimension();
  std::vector<std::vector<double>> cols(d);
  for (int c = 0; c < d; ++c) cols[c] = sample_coordinate(omega, c, times);
  std::vector<Vector> rows(times.size(), Vector(d));
  for (std::size_t k = 0; k < times.size(); ++k) {
    const std::size_t src = (frozen && k > 0) ? k - 1 : k;
    for (int c = 0; c < d; ++c) rows[k][c] = cols[c][src];
  }
  return rows;
}

}  // namespace

CausalFunctional make_state_functional(std::string label, StateFn f, StateFn df_dt,
                                       StateGradFn df_dx, StateHessFn d2f_dx2) {
  CausalFunctional::Providers p;
  p.eval = [f](double t, const CadlagPath& w) { return f(t, w.eval(t)); };
  auto values = [f](bool frozen) {
    return [f, frozen](const CadlagPath& w, std::span<const double> times) {
      const auto rows = rows_at(w, times, frozen);
      std::vector<double> out(times.size());
      for (std::size_t k = 0; k < times.size(); ++k) out[k] = f(times[k], rows[k]);
      return out;
    };
  };
  p.values = values(false);
  p.frozen = values(true);
  if (df_dt && df_dx && d2f_dx2) {
    auto bundle_at = [=](double t, const Vector& x) {
      return DerivativeBundle{df_dt(t, x), df_dx(t, x), d2f_dx2(t, x)};
    };
    p.bundle = [=](double t, const CadlagPath& w) { return bundle_at(t, w.eval(t)); };
    auto bundles = [=](bool frozen) {
      return [=](const CadlagPath& w, std::span<const double> times) {
        const auto rows = rows_at(w, times, frozen);
        std::vector<DerivativeBundle> out;
        out.reserve(times.size());
        for (std::size_t k = 0; k < times.size(); ++k)
          out.push_back(bundle_at(times[k], rows[k]));
        return out;
      };
    };
    p.bundles = bundles(false);
    p.frozen_bundles = bundles(true);
  }
  return CausalFunctional(std::move(label), std::move(p));
}

CausalFunctional make_time_functional() {
  return make_state_functional(
      "time", [](double t, const Vector&) { return t; },
      [](double, const Vector&) { return 1.0; },
      [](double, const Vector& x) { return Vector(Vector::Zero(x.size())); },
      [](double, const Vector& x) { return Matrix(Matrix::Zero(x.size(), x.size())); });
}

CausalFunctional make_coordinate_functional(int i) {
  if (i < 0) throw std::invalid_argument("coordinate functional: negative index");
  return make_state_functional(
      "x" + std::to_string(i + 1),
      [i](double, const Vector& x) { return x[i]; },
      [](double, const Vector&) { return 0.0; },
      [i](double, const Vector& x) {
        Vector g = Vector::Zero(x.size());
        g[i] = 1.0;
        return g;
      },
      [](double, const Vector& x) { return Matrix(Matrix::Zero(x.size(), x.size())); });
}

CausalFunctional make_time_integral(std::string label, CausalFunctional G) {
  // Cumulative left-point sums over the grid of omega:
  //   acc_k = sum_{m<k} g_m (t_{m+1} - t_m),   F(t) = acc_j + g_j (t - t_j)
  // with t_j the last grid point <= t.
  struct Sums {
    std::vector<double> acc, g;
  };
  auto sums = [G](const CadlagPath& w, std::size_t upto) {
    const auto grid = w.grid().times().first(upto + 1);
    Sums s;
    s.g = G.values(w, grid);
    s.acc.resize(grid.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      s.acc[k] = acc;
      if (k + 1 < grid.size()) acc += s.g[k] * (grid[k + 1] - grid[k]);
    }
    return s;
  };

  CausalFunctional::Providers p;
  p.eval = [=](double t, const CadlagPath& w) {
    const std::size_t j = w.grid().index_at_or_before(t);
    const Sums s = sums(w, j);
    return s.acc[j] + s.g[j] * (t - w.grid()[j]);
  };
  p.values = [=](const CadlagPath& w, std::span<const double> times) {
    std::vector<double> out(times.size());
    if (times.empty()) return out;
    const std::size_t last = w.grid().index_at_or_before(times.back());
    const Sums s = sums(w, last);
    for (std::size_t k = 0; k < times.size(); ++k) {
      const std::size_t j = w.grid().index_at_or_before(times[k]);
      out[k] = s.acc[j] + s.g[j] * (times[k] - w.grid()[j]);
    }
    return out;
  };
  auto values = p.values;
  p.frozen = [G, values](const CadlagPath& w, std::span<const double> times) {
    const auto at = values(w, times);
    const auto g = G.values(w, times);
    std::vector<double> out(times.size());
    for (std::size_t k = 0; k < times.size(); ++k)
      out[k] = k == 0 ? at[0] : at[k - 1] + g[k - 1] * (times[k] - times[k - 1]);
    return out;
  };
  p.bundle = [G](double t, const CadlagPath& w) {
    auto b = DerivativeBundle::zero(w.dimension());
    b.d0 = G(t, w);
    return b;
  };
  auto from_d0 = [](const CadlagPath& w, const std::vector<double>& d0) {
    std::vector<DerivativeBundle> out(d0.size(), DerivativeBundle::zero(w.dimension()));
    for (std::size_t k = 0; k < d0.size(); ++k) out[k].d0 = d0[k];
    return out;
  };
  p.bundles = [G, from_d0](const CadlagPath& w, std::span<const double> times) {
    return from_d0(w, G.values(w, times));
  };
  p.frozen_bundles = [G, from_d0](const CadlagPath& w, std::span<const double> times) {
    return from_d0(w, G.frozen_values(w, times));
  };
  return CausalFunctional(std::move(label), std::move(p));
}

CausalFunctional make_running_integral(std::string label, StateFn f) {
  auto integrand = make_state_functional(label + ".integrand", std::move(f), {}, {}, {});
  return make_time_integral(std::move(label), std::move(integrand));
}

// --- composites --------------------------------------------------------------

namespace {

struct Parts {
  std::vector<CausalFunctional> fs;
  bool all_have_bundle() const {
    return std::all_of(fs.begin(), fs.end(),
                       [](const CausalFunctional& f) { return f.has_bundle(); });
  }
};

// Builds a composite from a pointwise rule: `value(v)` maps part values to
// the composite value, `chain(v, b, d)` maps part values and bundles to the
// composite bundle.
using ValueRule = std::function<double(const std::vector<double>&)>;
using ChainRule = std::function<DerivativeBundle(
    const std::vector<double>&, const std::vector<DerivativeBundle>&, int)>;

CausalFunctional make_composite(std::string label, std::vector<CausalFunctional> fs,
                                ValueRule value, ChainRule chain) {
  if (fs.empty()) throw std::invalid_argument("composite: empty list of functionals");
  auto parts = std::make_shared<const Parts>(Parts{std::move(fs)});
  const std::size_t m = parts->fs.size();

  CausalFunctional::Providers p;
  p.eval = [parts, value, m](double t, const CadlagPath& w) {
    std::vector<double> v(m);
    for (std::size_t a = 0; a < m; ++a) v[a] = parts->fs[a](t, w);
    return value(v);
  };
  auto sweep = [parts, value, m](bool frozen) {
    return [parts, value, m, frozen](const CadlagPath& w, std::span<const double> times) {
      std::vector<std::vector<double>> cols(m);
      for (std::size_t a = 0; a < m; ++a)
        cols[a] = frozen ? parts->fs[a].frozen_values(w, times)
                         : parts->fs[a].values(w, times);
      std::vector<double> out(times.size()), v(m);
      for (std::size_t k = 0; k < times.size(); ++k) {
        for (std::size_t a = 0; a < m; ++a) v[a] = cols[a][k];
        out[k] = value(v);
      }
      return out;
    };
  };
  p.values = sweep(false);
  p.frozen = sweep(true);

  if (parts->all_have_bundle()) {
    p.bundle = [parts, chain, m](double t, const CadlagPath& w) {
      std::vector<double> v(m);
      std::vector<DerivativeBundle> b(m);
      for (std::size_t a = 0; a < m; ++a) {
        v[a] = parts->fs[a](t, w);
        b[a] = parts->fs[a].bundle(t, w);
      }
      return chain(v, b, w.dimension());
    };
    auto bsweep = [parts, chain, m](bool frozen) {
      return [parts, chain, m, frozen](const CadlagPath& w,
                                       std::span<const double> times) {
        std::vector<std::vector<double>> vals(m);
        std::vector<std::vector<DerivativeBundle>> bs(m);
        for (std::size_t a = 0; a < m; ++a) {
          const auto& f = parts->fs[a];
          vals[a] = frozen ? f.frozen_values(w, times) : f.values(w, times);
          bs[a] = frozen ? f.frozen_bundles(w, times) : f.bundles(w, times);
        }
        std::vector<DerivativeBundle> out;
        out.reserve(times.size());
        std::vector<double> v(m);
        std::vector<DerivativeBundle> b(m);
        for (std::size_t k = 0; k < times.size(); ++k) {
          for (std::size_t a = 0; a < m; ++a) {
            v[a] = vals[a][k];
            b[a] = bs[a][k];
          }
          out.push_back(chain(v, b, w.dimension()));
        }
        return out;
      };
    };
    p.bundles = bsweep(false);
    p.frozen_bundles = bsweep(true);
  }
  return CausalFunctional(std::move(label), std::move(p));
}

std::string join_labels(const std::string& op, const std::vector<CausalFunctional>& fs) {
  std::string s = op + "(";
  for (std::size_t a = 0; a < fs.size(); ++a) {
    if (a) s += ",";
    s += fs[a].label();
  }
  return s + ")";
}

}  // namespace

CausalFunctional linear_combination(std::vector<double> weights,
                                    std::vector<CausalFunctional> parts) {
  if (weights.size() != parts.size())
    throw std::invalid_argument("linear_combination: weight count mismatch");
  std::string label = join_labels("lin", parts);
  ValueRule value = [weights](const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t a = 0; a < v.size(); ++a) s += weights[a] * v[a];
    return s;
  };
  ChainRule chain = [weights](const std::vector<double>&,
                              const std::vector<DerivativeBundle>& b, int d) {
    auto out = DerivativeBundle::zero(d);
    for (std::size_t a = 0; a < b.size(); ++a) {
      out.d0 += weights[a] * b[a].d0;
      out.grad += weights[a] * b[a].grad;
      out.hess += weights[a] * b[a].hess;
    }
    return out;
  };
  return make_composite(std::move(label), std::move(parts), value, chain);
}

CausalFunctional combine(Combine op, std::vector<CausalFunctional> parts) {
  if (parts.empty()) throw std::invalid_argument("combine: empty list of functionals");
  if (op == Combine::kSum)
    return linear_combination(std::vector<double>(parts.size(), 1.0), std::move(parts));

  std::string label = join_labels("prod", parts);
  ValueRule value = [](const std::vector<double>& v) {
    double s = 1.0;
    for (double x : v) s *= x;
    return s;
  };
  // Product rule folded left: (P, dP) * (f, df).
  ChainRule chain = [](const std::vector<double>& v,
                       const std::vector<DerivativeBundle>& b, int) {
    double P = v[0];
    DerivativeBundle acc = b[0];
    for (std::size_t a = 1; a < v.size(); ++a) {
      const double f = v[a];
      const DerivativeBundle& db = b[a];
      DerivativeBundle next;
      next.d0 = acc.d0 * f + P * db.d0;
      next.grad = acc.grad * f + P * db.grad;
      next.hess = acc.hess * f + P * db.hess + acc.grad * db.grad.transpose() +
                  db.grad * acc.grad.transpose();
      P *= f;
      acc = std::move(next);
    }
    return acc;
  };
  return make_composite(std::move(label), std::move(parts), value, chain);
}

CausalFunctional compose(SmoothMap g, std::vector<CausalFunctional> parts) {
  if (!g.value) throw std::invalid_argument("compose: missing map");
  std::string label = join_labels("compose", parts);
  ValueRule value = [g](const std::vector<double>& v) {
    return g.value(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
  };
  ChainRule chain;
  if (g.grad && g.hess) {
    chain = [g](const std::vector<double>& v, const std::vector<DerivativeBundle>& b,
                int d) {
      const Vector x = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
      const Vector dg = g.grad(x);
      const Matrix d2g = g.hess(x);
      auto out = DerivativeBundle::zero(d);
      for (std::size_t a = 0; a < b.size(); ++a) {
        out.d0 += dg[a] * b[a].d0;
        out.grad += dg[a] * b[a].grad;
        out.hess += dg[a] * b[a].hess;
      }
      for (std::size_t a = 0; a < b.size(); ++a)
        for (std::size_t c = 0; c < b.size(); ++c)
          out.hess += d2g(a, c) * b[a].grad * b[c].grad.transpose();
      return out;
    };
  }
  auto f = make_composite(std::move(label), std::move(parts), value,
                          chain ? chain : ChainRule([](auto&&, auto&&, int d) {
                            return DerivativeBundle::zero(d);
                          }));
  if (chain) return f;
  // Without derivatives of g the composite carries no analytic bundle.
  auto p = f.providers();
  p.bundle = {};
  p.bundles = {};
  p.frozen_bundles = {};
  return CausalFunctional(f.label(), std::move(p));
}

CausalFunctional make_jump_indicator() {
  return CausalFunctional("jump_indicator", [](double t, const CadlagPath& w) {
    const auto j = w.jump(t);
    return (j && j->cwiseAbs().maxCoeff() != 0.0) ? 1.0 : 0.0;
  });
}

CausalFunctional make_anticipating_functional() {
  return CausalFunctional("anticipating", [](double, const CadlagPath& w) {
    return w.eval(w.horizon(), 0);
  });
}

}  // namespace pathcalc

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "pathcalc/bk.hpp"
#include "pathcalc/functional.hpp"
#include "pathcalc/registry.hpp"

using namespace pathcalc;

namespace {

CadlagPath random_walk(std::uint64_t seed, int d, int level = 7, double scale = 0.3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nrm;
  const auto grid = dyadic_refinement(1.0, level);
  std::vector<double> v(grid.size() * d);
  for (int c = 0; c < d; ++c) {
    double x = nrm(rng) * 0.5;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      v[c * grid.size() + k] = x;
      x += scale * nrm(rng) * std::sqrt(grid.mesh());
    }
  }
  return CadlagPath(grid, d, v);
}

CadlagPath constant_path(double c, int level = 4) {
  return CadlagPath::constant(dyadic_refinement(1.0, level), Vector::Constant(1, c));
}

CausalFunctional t_x_squared() {
  return make_state_functional(
      "t*x^2", [](double t, const Vector& x) { return t * x[0] * x[0]; },
      [](double, const Vector& x) { return x[0] * x[0]; },
      [](double t, const Vector& x) { return Vector(Vector::Constant(1, 2.0 * t * x[0])); },
      [](double t, const Vector&) { return Matrix(Matrix::Constant(1, 1, 2.0 * t)); });
}

void expect_bundle_eq(const DerivativeBundle& a, const DerivativeBundle& b, double tol) {
  EXPECT_NEAR(a.d0, b.d0, tol);
  ASSERT_EQ(a.grad.size(), b.grad.size());
  EXPECT_LE((a.grad - b.grad).cwiseAbs().maxCoeff(), tol);
  EXPECT_LE((a.hess - b.hess).cwiseAbs().maxCoeff(), tol);
}

std::vector<std::string> smooth_names() {
  return {"time", "constant:2", "coordinate:1", "square:1", "cube:1", "sin:1", "cos:1", "exp:1"};
}

}  // namespace

TEST(Numeric, StateFunctionalExamples) {
  const auto F = t_x_squared();
  const auto w = constant_path(2.0);
  EXPECT_NEAR(numeric_time_derivative(F, 0.5, w, 1e-3), 4.0, 1e-9);
  EXPECT_NEAR(numeric_gradient(F, 1.0, w)[0], 4.0, 1e-8);
  EXPECT_NEAR(numeric_hessian(F, 1.0, w)(0, 0), 2.0, 1e-5);
  EXPECT_THROW(numeric_time_derivative(F, 0.5, w, 0.0), std::invalid_argument);
  EXPECT_THROW(numeric_gradient(F, 0.5, w, -1.0), std::invalid_argument);
  EXPECT_THROW(numeric_hessian(F, 0.5, w, 0.0), std::invalid_argument);
}

TEST(Numeric, DefaultTimeStepIsOneGridStep) {
  const auto F = t_x_squared();
  const auto w = constant_path(3.0, 3);
  EXPECT_NEAR(numeric_time_derivative(F, 0.25, w), 9.0, 1e-12);
  EXPECT_THROW(numeric_time_derivative(F, 1.0, w), std::domain_error);
}

TEST(StateFunctional, Bundles) {
  const auto w = constant_path(0.0);
  const auto x = make_coordinate_functional(0).bundle(0.3, w);
  expect_bundle_eq(x, {0.0, Vector::Ones(1), Matrix::Zero(1, 1)}, 0.0);
  const auto t = make_time_functional().bundle(0.3, w);
  expect_bundle_eq(t, {1.0, Vector::Zero(1), Matrix::Zero(1, 1)}, 0.0);
  const auto s = make_state_functional(
      "sin+t", [](double t, const Vector& v) { return std::sin(v[0]) + t; },
      [](double, const Vector&) { return 1.0; },
      [](double, const Vector& v) { return Vector(Vector::Constant(1, std::cos(v[0]))); },
      [](double, const Vector& v) { return Matrix(Matrix::Constant(1, 1, -std::sin(v[0]))); });
  expect_bundle_eq(s.bundle(0.3, w), {1.0, Vector::Ones(1), Matrix::Zero(1, 1)}, 0.0);
}

TEST(StateFunctional, NoBundleThrows) {
  const auto F = make_state_functional("f", [](double, const Vector& v) { return v[0]; }, {},
                                       {}, {});
  EXPECT_FALSE(F.has_bundle());
  EXPECT_THROW(F.bundle(0.0, constant_path(1.0)), std::logic_error);
}

TEST(RunningIntegral, Examples) {
  const auto one = make_running_integral("one", [](double, const Vector&) { return 1.0; });
  const auto w = random_walk(3, 1);
  for (double t : {0.0, 0.1, 0.5, 0.77, 1.0}) EXPECT_NEAR(one(t, w), t, 1e-15);
  const auto id = make_running_integral("x", [](double, const Vector& v) { return v[0]; });
  const auto c = constant_path(1.5);
  for (double t : {0.0, 0.3, 1.0}) EXPECT_NEAR(id(t, c), 1.5 * t, 1e-15);
}

TEST(RunningIntegral, GradientIsExactlyZero) {
  const auto F = make_simple_functional("running:1");
  const auto G = make_simple_functional("running_square:1");
  const auto w = random_walk(5, 1);
  for (double t : {0.0, 0.25, 0.6, 1.0}) {
    EXPECT_EQ(numeric_gradient(F, t, w)[0], 0.0);
    EXPECT_EQ(numeric_gradient(G, t, w)[0], 0.0);
    EXPECT_EQ(F.bundle(t, w).grad[0], 0.0);
    // FTC: d0 = g(omega(t)) up to one step
    EXPECT_NEAR(numeric_time_derivative(F, t < 1.0 ? t : 0.5, w, 1e-3),
                w.eval(t < 1.0 ? t : 0.5, 0), 1e-12);
  }
}

TEST(Causality, BuiltinsAreCausal) {
  std::vector<std::string> names = smooth_names();
  for (const char* n : {"running:1", "running_square:1", "jump_indicator"}) names.push_back(n);
  for (int trial = 0; trial < 20; ++trial) {
    const auto w = random_walk(100 + trial, 1);
    const auto times = w.grid().times();
    for (const auto& n : names)
      EXPECT_TRUE(check_causality(make_simple_functional(n), w, times)) << n;
    EXPECT_FALSE(check_causality(make_simple_functional("anticipating"), w, times));
  }
}

TEST(Causality, CompositesAreCausal) {
  const auto w = random_walk(17, 2);
  const auto F = combine(Combine::kProduct,
                         {make_simple_functional("sin:1"), make_simple_functional("running:2")});
  const auto G = compose(
      SmoothMap{[](const Vector& v) { return std::exp(v[0]) * v[1]; },
                [](const Vector& v) { return Vector(Vector{{std::exp(v[0]) * v[1], std::exp(v[0])}}); },
                [](const Vector& v) {
                  Matrix h(2, 2);
                  h << std::exp(v[0]) * v[1], std::exp(v[0]), std::exp(v[0]), 0.0;
                  return h;
                }},
      {make_simple_functional("coordinate:1"), make_simple_functional("coordinate:2")});
  EXPECT_TRUE(check_causality(F, w, w.grid().times()));
  EXPECT_TRUE(check_causality(G, w, w.grid().times()));
  EXPECT_TRUE(check_causality(doleans_dade(), random_walk(3, 1), dyadic_refinement(1.0, 5).times()));
}

TEST(Lifetime, ZeroPastLifetime) {
  const auto grid = dyadic_refinement(1.0, 4);
  const CadlagPath w(grid, 1, std::vector<double>(grid.size(), 2.0), 0.5);
  const auto F = make_simple_functional("square:1");
  EXPECT_EQ(F(0.25, w), 4.0);
  EXPECT_EQ(F(0.5, w), 0.0);
  EXPECT_EQ(F(0.9, w), 0.0);
  expect_bundle_eq(F.bundle(0.75, w), DerivativeBundle::zero(1), 0.0);
  EXPECT_EQ(numeric_gradient(F, 0.75, w)[0], 0.0);
}

TEST(Composite, SumWithNegationHasZeroBundle) {
  const auto w = random_walk(9, 1);
  const auto F = make_simple_functional("cube:1");
  const auto G = linear_combination({1.0, -1.0}, {F, F});
  for (double t : {0.0, 0.4, 1.0}) {
    EXPECT_EQ(G(t, w), 0.0);
    expect_bundle_eq(G.bundle(t, w), DerivativeBundle::zero(1), 0.0);
  }
  EXPECT_THROW(combine(Combine::kSum, {}), std::invalid_argument);
  EXPECT_THROW(compose(SmoothMap{}, {}), std::invalid_argument);
}

TEST(Composite, ProductRuleMatchesStateFunctional) {
  const auto w = random_walk(21, 1);
  const auto P = combine(Combine::kProduct,
                         {make_simple_functional("sin:1"), make_simple_functional("exp:1")});
  const auto ref = make_state_functional(
      "sin*exp", [](double, const Vector& x) { return std::sin(x[0]) * std::exp(x[0]); },
      [](double, const Vector&) { return 0.0; },
      [](double, const Vector& x) {
        return Vector(Vector::Constant(1, (std::cos(x[0]) + std::sin(x[0])) * std::exp(x[0])));
      },
      [](double, const Vector& x) {
        return Matrix(Matrix::Constant(1, 1, 2.0 * std::cos(x[0]) * std::exp(x[0])));
      });
  for (double t : {0.0, 0.3, 0.8}) expect_bundle_eq(P.bundle(t, w), ref.bundle(t, w), 1e-12);
}

TEST(Composite, LinearityIsExact) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const auto names = smooth_names();
  for (int trial = 0; trial < 50; ++trial) {
    const auto F = make_simple_functional(names[trial % names.size()]);
    const auto G = make_simple_functional(names[(trial * 3 + 1) % names.size()]);
    const double a = u(rng), b = u(rng);
    const auto L = linear_combination({a, b}, {F, G});
    const auto w = random_walk(trial, 1);
    const double t = w.grid()[trial % w.size()];
    const auto bf = F.bundle(t, w), bg = G.bundle(t, w), bl = L.bundle(t, w);
    EXPECT_EQ(bl.d0, a * bf.d0 + b * bg.d0);
    EXPECT_EQ(bl.grad, Vector(a * bf.grad + b * bg.grad));
    EXPECT_EQ(bl.hess, Matrix(a * bf.hess + b * bg.hess));
  }
}

TEST(Composite, ExpComposeReproducesDoleansDade) {
  const auto x = make_simple_functional("coordinate:1");
  const auto B = make_qv_functional(0, 0);
  const auto E = compose(
      SmoothMap{[](const Vector& v) { return std::exp(v[0] - 0.5 * v[1]); },
                [](const Vector& v) {
                  const double e = std::exp(v[0] - 0.5 * v[1]);
                  return Vector(Vector{{e, -0.5 * e}});
                },
                [](const Vector& v) {
                  const double e = std::exp(v[0] - 0.5 * v[1]);
                  Matrix h(2, 2);
                  h << e, -0.5 * e, -0.5 * e, 0.25 * e;
                  return h;
                }},
      {x, B});
  const auto DD = doleans_dade();
  // a path with a jump, so the jump-dependent terms are exercised
  auto w = random_walk(31, 1, 6);
  w = w.bump(0.5, Vector::Constant(1, 0.25));
  for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    EXPECT_NEAR(E(t, w), DD(t, w), 1e-14);
    expect_bundle_eq(E.bundle(t, w), DD.bundle(t, w), 1e-13);
  }
}

TEST(Sweeps, ProvidersMatchPointwiseDefinitions) {
  std::vector<std::string> names = smooth_names();
  names.push_back("running:1");
  names.push_back("running_square:1");
  const auto w = random_walk(41, 1, 6);
  std::vector<double> times;
  for (std::size_t k = 0; k < w.size(); k += 3) times.push_back(w.grid()[k]);
  times.push_back(0.999);
  for (const auto& n : names) {
    const auto F = make_simple_functional(n);
    const auto at = F.values(w, times);
    const auto fr = F.frozen_values(w, times);
    for (std::size_t k = 0; k < times.size(); ++k) {
      EXPECT_NEAR(at[k], F(times[k], w), 1e-14) << n;
      const double ref = k == 0 ? F(times[0], w) : F(times[k], w.stop(times[k - 1]));
      EXPECT_NEAR(fr[k], ref, 1e-14) << n << " k=" << k;
    }
    if (!F.has_bundle()) continue;
    const auto bs = F.bundles(w, times);
    const auto fb = F.frozen_bundles(w, times);
    for (std::size_t k = 0; k < times.size(); ++k) {
      expect_bundle_eq(bs[k], F.bundle(times[k], w), 1e-14);
      const auto ref = k == 0 ? F.bundle(times[0], w) : F.bundle(times[k], w.stop(times[k - 1]));
      expect_bundle_eq(fb[k], ref, 1e-14);
    }
  }
}

TEST(Sweeps, FallbacksMatchEval) {
  const CausalFunctional F("max", [](double t, const CadlagPath& w) {
    double m = -1e300;
    for (std::size_t k = 0; k <= w.grid().index_at_or_before(t); ++k) m = std::max(m, w.at(k, 0));
    return m;
  });
  const auto w = random_walk(2, 1, 5);
  const auto times = w.grid().times();
  const auto at = F.values(w, times);
  const auto fr = F.frozen_values(w, times);
  for (std::size_t k = 0; k < times.size(); ++k) {
    EXPECT_EQ(at[k], F(times[k], w));
    EXPECT_EQ(fr[k], k == 0 ? at[0] : F(times[k], w.stop(times[k - 1])));
  }
  EXPECT_THROW(F.bundles(w, times), std::logic_error);
  const auto traj = F.trajectory(w);
  EXPECT_EQ(traj.at(5, 0), at[5]);
}

TEST(Derivatives, NumericMatchesAnalyticRandomized) {
  std::mt19937_64 rng(8);
  for (const auto& n : smooth_names()) {
    const auto F = make_simple_functional(n);
    for (int trial = 0; trial < 10; ++trial) {
      const auto w = random_walk(rng(), 1, 6);
      const double t = w.grid()[rng() % (w.size() - 1)];
      const auto a = F.bundle(t, w);
      const auto num = numeric_bundle(F, t, w, {1e-4, 0.0});
      EXPECT_NEAR(num.grad[0], a.grad[0], 1e-6) << n;
      EXPECT_NEAR(num.hess(0, 0), a.hess(0, 0), 1e-4) << n;
      EXPECT_NEAR(num.d0, a.d0, 1e-9) << n;
    }
  }
}

TEST(Derivatives, GradientGapShrinksQuadratically) {
  const auto F = make_simple_functional("sin:1");
  const auto w = random_walk(12, 1, 6);
  const double t = 0.5;
  const double g = F.bundle(t, w).grad[0];
  const double e3 = std::abs(numeric_gradient(F, t, w, 1e-2)[0] - g);
  const double e4 = std::abs(numeric_gradient(F, t, w, 1e-3)[0] - g);
  EXPECT_NEAR(std::log10(e3 / e4), 2.0, 0.1);
}

TEST(Derivatives, MultiDimensionalHessianSymmetric) {
  const auto F = combine(Combine::kProduct,
                         {make_simple_functional("sin:1"), make_simple_functional("exp:2")});
  const auto w = random_walk(13, 2, 6);
  const auto H = numeric_hessian(F, 0.5, w);
  EXPECT_EQ(H(0, 1), H(1, 0));
  const auto a = F.bundle(0.5, w);
  EXPECT_EQ(a.hess(0, 1), a.hess(1, 0));
  EXPECT_LE((H - a.hess).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(Probes, LipschitzStateFunctional) {
  const auto F = make_simple_functional("sin:1");
  const auto w = random_walk(1, 1, 6);
  const auto rep = probe_space_continuity(F, w, 1.0, 2.0, {0.0, 1e-3, 1e-2, 1e-1});
  EXPECT_EQ(rep.sup_response[0], 0.0);
  for (std::size_t k = 0; k < rep.sizes.size(); ++k)
    EXPECT_LE(rep.sup_response[k], rep.sizes[k] + 1e-15);
  EXPECT_TRUE(rep.vanishing(2e-3));
}

TEST(Probes, JumpIndicatorIsNotContinuous) {
  const auto F = make_jump_indicator();
  auto w = random_walk(1, 1, 6);
  w = w.bump(0.5, Vector::Constant(1, 1.0));
  const auto rep = probe_space_continuity(F, w, 1.0, 2.0, {1e-6, 1e-3});
  EXPECT_EQ(rep.sup_response.front(), 1.0);
  EXPECT_FALSE(rep.vanishing(0.5));
}

TEST(Probes, TimeContinuity) {
  const auto w = random_walk(6, 1, 6);
  const auto T = probe_time_continuity(make_time_functional(), w, 0.5, 1.0, {0.0, 0.01, 0.1});
  EXPECT_EQ(T.sup_response[0], 0.0);
  EXPECT_NEAR(T.sup_response[1], 0.01, 1e-15);
  EXPECT_NEAR(T.sup_response[2], 0.1, 1e-15);
  const auto C = probe_time_continuity(make_simple_functional("constant:3"), w, 0.5, 1.0, {0.1});
  EXPECT_EQ(C.sup_response[0], 0.0);
  const auto R = probe_time_continuity(make_simple_functional("sin:1"), w, 0.5, 1.0, {0.05});
  const auto I = probe_time_continuity(
      make_running_integral("sin", [](double, const Vector& x) { return std::sin(x[0]); }), w,
      0.5, 1.0, {0.05});
  EXPECT_LE(I.sup_response[0], 0.05 + 1e-15);
  EXPECT_EQ(R.sup_response[0], 0.0);

  std::ostringstream os;
  write_probe_csv(os, T);
  EXPECT_EQ(os.str().substr(0, 18), "size,sup_response\n");
}

#include "pathcalc/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "pathcalc/bk.hpp"
#include "pathcalc/ensemble.hpp"
#include "pathcalc/ito_verify.hpp"
#include "pathcalc/registry.hpp"
#include "pathcalc/simulate.hpp"

namespace pathcalc::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kToolVersion = "pathcalc 0.1.0";

fs::path out_dir(const ExperimentConfig& cfg, const char* sub = nullptr) {
  fs::path p(cfg.out);
  if (sub) p /= sub;
  fs::create_directories(p);
  return p;
}

template <class Writer>
void write_file(const fs::path& file, Writer&& writer) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::ios_base::failure("cannot open '" + file.string() + "' for writing");
  writer(out);
  out.flush();
  if (!out) throw std::ios_base::failure("write to '" + file.string() + "' failed");
}

void write_meta(const ExperimentConfig& cfg, json results) {
  json meta;
  meta["tool"] = kToolVersion;
  meta["config"] = to_json(cfg);
  meta["results"] = std::move(results);
  write_file(out_dir(cfg) / "meta.txt", [&](std::ostream& o) { o << meta.dump(2) << '\n'; });
}

json bk_json(const BkResult& r) {
  json j;
  j["converged"] = r.converged;
  j["levels_used"] = r.levels_used;
  if (std::isfinite(r.final_cauchy_gap)) {
    j["final_cauchy_gap"] = r.final_cauchy_gap;
  } else {
    j["final_cauchy_gap"] = nullptr;
  }
  return j;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string numbered(const char* stem, std::size_t k, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%05zu%s", stem, k, ext);
  return buf;
}

CausalFunctional selected(const ExperimentConfig& cfg, int dimension) {
  return make_named_functional(cfg.functional, cfg.functional_params, dimension, cfg.bk);
}

// The input file when one is configured, otherwise path 0 of the generator.
CadlagPath input_path(const ExperimentConfig& cfg) {
  if (!cfg.input.empty()) {
    return read_csv_file(cfg.input);
  }
  cfg.require_seed();
  return generate(cfg.generator, 0);
}

// Keeps a copy of the path a run worked on next to its results.
void record_input(const ExperimentConfig& cfg, const CadlagPath& w) {
  write_file(out_dir(cfg, "paths") / "input.csv", [&](std::ostream& o) { write_csv(o, w); });
}

// Up to 33 evenly spaced grid times, enough to screen for anticipation.
std::vector<double> probe_times(const CadlagPath& w) {
  const auto g = w.grid().times();
  const std::size_t stride = std::max<std::size_t>(1, g.size() / 32);
  std::vector<double> out;
  for (std::size_t k = 0; k < g.size(); k += stride) out.push_back(g[k]);
  if (out.back() != g.back()) out.push_back(g.back());
  return out;
}

EnsembleOptions ensemble_options(const ExperimentConfig& cfg) {
  EnsembleOptions e;
  e.ensemble_size = cfg.ensemble;
  e.execution = cfg.threads == 1 ? Execution::kSerial : Execution::kParallel;
  e.threads = cfg.threads;
  e.threshold = cfg.threshold;
  e.upper_quantile = cfg.upper_quantile;
  return e;
}

json report_json(const ConvergenceReport& rep, double horizon) {
  json j;
  j["levels"] = rep.levels;
  j["median"] = rep.median;
  j["upper"] = rep.upper;
  j["upper_quantile"] = rep.upper_quantile;
  j["threshold"] = rep.threshold;
  j["causal"] = rep.causal;
  j["decreasing"] = rep.decreasing;
  j["final_below"] = rep.final_below;
  const double order = observed_order(rep, horizon);
  if (std::isfinite(order)) {
    j["observed_order"] = order;
  } else {
    j["observed_order"] = nullptr;
  }
  return j;
}

}  // namespace

int run_simulate(const ExperimentConfig& cfg) {
  cfg.require_seed();
  const fs::path dir = out_dir(cfg, "paths");
  std::vector<std::optional<CadlagPath>> paths(cfg.paths);
  run_ensemble(
      cfg.paths,
      [&](std::uint64_t k) {
        paths[k] = generate(cfg.generator, k);
        return std::vector<double>{};
      },
      cfg.threads == 1 ? Execution::kSerial : Execution::kParallel, cfg.threads);
  json files = json::array();
  for (std::size_t k = 0; k < cfg.paths; ++k) {
    const std::string name = numbered("path", k, ".csv");
    write_file(dir / name, [&](std::ostream& o) { write_csv(o, *paths[k]); });
    json side;
    side["path_index"] = k;
    side["stream_key"] = stream_key(cfg.generator.seed, k);
    side["generator"] = describe(cfg.generator);
    write_file(dir / numbered("path", k, ".json"),
               [&](std::ostream& o) { o << side.dump() << '\n'; });
    files.push_back("paths/" + name);
  }
  json res;
  res["generator"] = describe(cfg.generator);
  res["files"] = std::move(files);
  write_meta(cfg, std::move(res));
  return kOk;
}

int run_integrate(const ExperimentConfig& cfg) {
  const CadlagPath w = input_path(cfg);
  const CausalFunctional Z = selected(cfg, w.dimension());
  if (cfg.coordinate >= w.dimension())
    throw ConfigError("run.coordinate exceeds the input path's dimension");
  record_input(cfg, w);
  if (!check_causality(Z, w, probe_times(w)))
    throw ConfigError("integrand '" + Z.label() + "' is not causal on the input path");
  const CadlagPath z = Z.trajectory(w);
  const BkResult r = bk_integral(z, w, cfg.coordinate, cfg.bk);
  const fs::path dir = out_dir(cfg, "results");
  write_file(dir / "integral.csv", [&](std::ostream& o) { write_csv(o, r.path); });
  write_file(dir / "integral.json", [&](std::ostream& o) { write_bk_metadata(o, r); });
  json res;
  res["integrand"] = Z.label();
  res["coordinate"] = cfg.coordinate + 1;
  res["bk"] = bk_json(r);
  write_meta(cfg, std::move(res));
  return cfg.bk.strict && !r.converged ? kNotConverged : kOk;
}

int run_qv(const ExperimentConfig& cfg) {
  const CadlagPath w = input_path(cfg);
  record_input(cfg, w);
  const fs::path dir = out_dir(cfg, "results");
  json pairs = json::array();
  bool all = true;
  for (int i = 0; i < w.dimension(); ++i) {
    for (int j = i; j < w.dimension(); ++j) {
      const BkResult r = quad_variation(w, i, j, cfg.bk);
      const std::string stem = "qv_" + std::to_string(i + 1) + "_" + std::to_string(j + 1);
      write_file(dir / (stem + ".csv"), [&](std::ostream& o) { write_csv(o, r.path); });
      write_file(dir / (stem + ".json"), [&](std::ostream& o) { write_bk_metadata(o, r); });
      json p = bk_json(r);
      p["pair"] = {i + 1, j + 1};
      p["final_value"] = r.path.at(r.path.size() - 1, 0);
      pairs.push_back(std::move(p));
      all = all && r.converged;
    }
  }
  json res;
  res["pairs"] = std::move(pairs);
  write_meta(cfg, std::move(res));
  return cfg.bk.strict && !all ? kNotConverged : kOk;
}

namespace {

// Classical Ito sum on the fine grid of omega with squared increments in
// place of the pathwise covariation, sampled at `times`. NaN without a bundle.
std::vector<double> classical_ito_oracle(const CausalFunctional& F, const CadlagPath& w,
                                         std::span<const double> times) {
  if (!F.has_bundle())
    return std::vector<double>(times.size(), std::numeric_limits<double>::quiet_NaN());
  const auto g = w.grid().times();
  const auto b = F.bundles(w, g);
  const int d = w.dimension();
  std::vector<double> acc(g.size(), 0.0);
  Vector dx(d);
  for (std::size_t k = 1; k < g.size(); ++k) {
    for (int c = 0; c < d; ++c) dx[c] = w.at(k, c) - w.at(k - 1, c);
    const auto& p = b[k - 1];
    acc[k] = acc[k - 1] + p.d0 * (g[k] - g[k - 1]) + p.grad.dot(dx) +
             0.5 * dx.dot(p.hess * dx);
  }
  return sample_coordinate(CadlagPath::scalar(w.grid(), std::move(acc)), 0, times);
}

}  // namespace

int run_ito_check(const ExperimentConfig& cfg) {
  cfg.require_seed();
  const CausalFunctional F = selected(cfg, cfg.generator.dimension);
  if (!F.has_bundle() && !cfg.numeric_fallback)
    throw ConfigError("functional '" + F.label() +
                      "' has no analytic bundle (set run.numeric_fallback = true)");
  ItoOptions ito;
  ito.bk = cfg.bk;
  ito.numeric_fallback = cfg.numeric_fallback;
  ito.steps.space = cfg.h;
  const ConvergenceReport rep =
      ito_residual_study(F, cfg.generator, cfg.levels, ito, ensemble_options(cfg));
  const fs::path dir = out_dir(cfg, "results");
  write_file(dir / "ito_report.csv", [&](std::ostream& o) { write_convergence_csv(o, rep); });

  // Trace of the first ensemble member at the finest level.
  const CadlagPath w = generate(cfg.generator, 0);
  const ItoReport tr =
      ito_residual(F, w, dyadic_refinement(cfg.generator.horizon, cfg.levels.back()), ito);
  write_file(dir / "ito_trace.csv", [&](std::ostream& o) { write_ito_trace(o, tr); });
  const auto oracle = classical_ito_oracle(F, w, tr.rhs.grid().times());
  write_file(dir / "ito_components.csv", [&](std::ostream& o) {
    o << "t,lhs,rhs,time_part,stochastic_part,trace_part,oracle\n";
    const auto& g = tr.rhs.grid();
    for (std::size_t k = 0; k < g.size(); ++k)
      o << fmt(g[k]) << ',' << fmt(tr.lhs.at(k, 0)) << ',' << fmt(tr.rhs.at(k, 0)) << ','
        << fmt(tr.time_part.at(k, 0)) << ',' << fmt(tr.stochastic_part.at(k, 0)) << ','
        << fmt(tr.trace_part.at(k, 0)) << ',' << fmt(oracle[k]) << '\n';
  });
  json res;
  res["functional"] = F.label();
  res["report"] = report_json(rep, cfg.generator.horizon);
  res["trace_residual_sup"] = tr.residual_sup;
  write_meta(cfg, std::move(res));
  return kOk;
}

int run_derive(const ExperimentConfig& cfg) {
  const CadlagPath w = input_path(cfg);
  record_input(cfg, w);
  const CausalFunctional F = selected(cfg, w.dimension());
  const int d = w.dimension();
  std::vector<double> times = cfg.times;
  if (times.empty()) {
    const auto g = w.grid().times();
    const std::size_t n = g.size() - 1;
    for (std::size_t m = 1; m <= 8; ++m) {
      const std::size_t k = n * m / 9;
      if (times.empty() || g[k] > times.back()) times.push_back(g[k]);
    }
  }
  for (double t : times)
    if (t < 0.0 || t >= w.horizon())
      throw ConfigError("run.times: probe times must lie in [0, horizon)");

  auto flatten = [d](const DerivativeBundle& b) {
    std::vector<double> v{b.d0};
    for (int i = 0; i < d; ++i) v.push_back(b.grad[i]);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) v.push_back(b.hess(i, j));
    return v;
  };
  std::vector<std::string> cols{"d0"};
  for (int i = 0; i < d; ++i) cols.push_back("grad" + std::to_string(i + 1));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      cols.push_back("hess" + std::to_string(i + 1) + std::to_string(j + 1));

  const NumericSteps steps{cfg.h, 0.0};
  double max_gap = 0.0;
  const fs::path dir = out_dir(cfg, "results");
  write_file(dir / "derive.csv", [&](std::ostream& o) {
    o << 't';
    for (const char* suffix : {"", "_num", "_gap"})
      for (const auto& c : cols) o << ',' << c << suffix;
    o << '\n';
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (double t : times) {
      const auto num = flatten(numeric_bundle(F, t, w, steps));
      const auto ana = F.has_bundle() ? flatten(F.bundle(t, w))
                                      : std::vector<double>(num.size(), nan);
      o << fmt(t);
      for (double v : ana) o << ',' << fmt(v);
      for (double v : num) o << ',' << fmt(v);
      for (std::size_t c = 0; c < num.size(); ++c) {
        const double gap = std::abs(ana[c] - num[c]);
        if (std::isfinite(gap)) max_gap = std::max(max_gap, gap);
        o << ',' << fmt(gap);
      }
      o << '\n';
    }
  });
  json res;
  res["functional"] = F.label();
  res["analytic_bundle"] = F.has_bundle();
  res["times"] = times;
  res["max_gap"] = max_gap;
  write_meta(cfg, std::move(res));
  return kOk;
}

int run_regularity(const ExperimentConfig& cfg) {
  cfg.require_seed();
  const CausalFunctional F = selected(cfg, cfg.generator.dimension);
  const ConvergenceReport rep =
      regularity_report(F, cfg.generator, cfg.levels, ensemble_options(cfg));
  const fs::path dir = out_dir(cfg, "results");
  write_file(dir / "regularity.csv", [&](std::ostream& o) { write_convergence_csv(o, rep); });
  json res;
  res["functional"] = F.label();
  res["report"] = report_json(rep, cfg.generator.horizon);
  write_meta(cfg, std::move(res));
  if (!rep.causal) throw ConfigError("functional '" + F.label() + "' is not causal");
  return kOk;
}

int exit_code_for_current_exception(std::string* message) {
  auto keep = [&](const std::exception& e) {
    if (message) *message = e.what();
  };
  try {
    throw;
  } catch (const ConfigError& e) {
    keep(e);
    return kConfigError;
  } catch (const std::ios_base::failure& e) {
    keep(e);
    return kIoError;
  } catch (const fs::filesystem_error& e) {
    keep(e);
    return kIoError;
  } catch (const std::logic_error& e) {
    // invalid_argument, domain_error, missing bundles: bad inputs.
    keep(e);
    return kConfigError;
  } catch (const std::runtime_error& e) {
    // Malformed input files.
    keep(e);
    return kIoError;
  } catch (const std::exception& e) {
    keep(e);
    return kFailure;
  }
}

int run(const ExperimentConfig& cfg) {
  try {
    const std::string& s = cfg.subcommand;
    if (s == "simulate") return run_simulate(cfg);
    if (s == "integrate") return run_integrate(cfg);
    if (s == "qv") return run_qv(cfg);
    if (s == "ito-check") return run_ito_check(cfg);
    if (s == "derive") return run_derive(cfg);
    if (s == "regularity") return run_regularity(cfg);
    throw ConfigError("unknown subcommand '" + s + "'");
  } catch (...) {
    std::string msg;
    const int code = exit_code_for_current_exception(&msg);
    std::cerr << "pathcalc " << cfg.subcommand << ": " << msg << '\n';
    return code;
  }
}

}  // namespace pathcalc::cli

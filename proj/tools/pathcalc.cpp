#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "pathcalc/cli.hpp"
#include "pathcalc/config.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool strict_bk = false;
  std::string levels;
  std::optional<int> threads;
};

void add_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "INI-style experiment config");
  sub->add_option("--seed", f.seed, "64-bit seed (overrides generator.seed)");
  sub->add_option("--out", f.out, "output directory (overrides run.out)");
  sub->add_flag("--strict-bk", f.strict_bk,
                "zero result and exit code 4 when the BK iteration does not converge");
  sub->add_option("--levels", f.levels, "comma-separated grid levels, e.g. 10,12,14");
  sub->add_option("--threads", f.threads, "worker threads (0: OpenMP default)")
      ->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pathwise stochastic calculus experiments"};
  app.require_subcommand(1);
  Flags flags;
  const char* names[][2] = {
      {"simulate", "generate sample paths"},
      {"integrate", "pathwise integral of a functional against one coordinate"},
      {"qv", "pathwise quadratic covariations of a path"},
      {"ito-check", "functional Ito formula residuals across grid levels"},
      {"derive", "analytic vs finite-difference causal derivatives"},
      {"regularity", "sup-distance of F on piecewise-constant approximations"},
  };
  for (const auto& n : names) add_flags(app.add_subcommand(n[0], n[1]), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : pathcalc::cli::kConfigError;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  pathcalc::ExperimentConfig cfg;
  try {
    if (!flags.config.empty()) cfg = pathcalc::load_config(flags.config);
    cfg.subcommand = sub;
    if (flags.seed) cfg.seed = *flags.seed;
    if (!flags.out.empty()) cfg.out = flags.out;
    if (flags.strict_bk) cfg.bk.strict = true;
    if (!flags.levels.empty()) cfg.levels = pathcalc::parse_levels(flags.levels);
    if (flags.threads) cfg.threads = *flags.threads;
    cfg.finalize();
  } catch (...) {
    std::string msg;
    const int code = pathcalc::cli::exit_code_for_current_exception(&msg);
    std::cerr << "pathcalc " << sub << ": " << msg << '\n';
    return code;
  }
  return pathcalc::cli::run(cfg);
}

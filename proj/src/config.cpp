#include "pathcalc/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>

namespace pathcalc {

namespace pt = boost::property_tree;

namespace {

double to_double(const std::string& key, const std::string& text) {
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || errno || !std::isfinite(v))
    throw ConfigError(key + ": expected a number, got '" + text + "'");
  return v;
}

long long to_integer(const std::string& key, const std::string& text) {
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(text.c_str(), &end, 10);
  if (text.empty() || end != text.c_str() + text.size() || errno)
    throw ConfigError(key + ": expected an integer, got '" + text + "'");
  return v;
}

std::uint64_t to_u64(const std::string& key, const std::string& text) {
  char* end = nullptr;
  errno = 0;
  if (text.empty() || text[0] == '-')
    throw ConfigError(key + ": expected an unsigned integer, got '" + text + "'");
  const unsigned long long v = std::strtoull(text.c_str(), &end, 0);
  if (end != text.c_str() + text.size() || errno)
    throw ConfigError(key + ": expected an unsigned integer, got '" + text + "'");
  return v;
}

bool to_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + text + "'");
}

std::vector<double> to_doubles(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& s : split_list(text)) out.push_back(to_double(key, s));
  return out;
}

std::size_t to_count(const std::string& key, const std::string& text) {
  const long long v = to_integer(key, text);
  if (v < 1) throw ConfigError(key + ": must be at least 1");
  return static_cast<std::size_t>(v);
}

void check_keys(const pt::ptree& section, const std::string& name,
                const std::set<std::string>& allowed) {
  for (const auto& [key, child] : section) {
    if (!child.empty()) throw ConfigError("[" + name + "] " + key + ": nested keys");
    if (!allowed.count(key)) throw ConfigError("[" + name + "]: unknown key '" + key + "'");
  }
}

}  // namespace

std::vector<int> parse_levels(const std::string& text) {
  std::vector<int> out;
  for (const auto& s : split_list(text)) {
    const long long v = to_integer("levels", s);
    if (v < 1 || v > 24) throw ConfigError("levels: each level must be in [1, 24]");
    if (!out.empty() && v <= out.back()) throw ConfigError("levels: must be increasing");
    out.push_back(static_cast<int>(v));
  }
  if (out.empty()) throw ConfigError("levels: empty list");
  return out;
}

ExperimentConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  ExperimentConfig cfg;
  for (const auto& [name, section] : tree) {
    if (section.empty() && !section.data().empty())
      throw ConfigError("config: key '" + name + "' outside a section");
    if (name == "generator") {
      check_keys(section, name,
                 {"kind", "dimension", "horizon", "level", "seed", "x0", "drift", "vol",
                  "drift_rate", "vol_rate"});
      auto& g = cfg.generator;
      for (const auto& [key, child] : section) {
        const std::string v = child.data();
        const std::string k = "generator." + key;
        if (key == "kind") {
          try {
            g.kind = parse_generator_kind(v);
          } catch (const std::invalid_argument& e) {
            throw ConfigError(k + ": " + e.what());
          }
        } else if (key == "dimension") {
          g.dimension = static_cast<int>(to_integer(k, v));
        } else if (key == "horizon") {
          g.horizon = to_double(k, v);
        } else if (key == "level") {
          g.level = static_cast<int>(to_integer(k, v));
        } else if (key == "seed") {
          cfg.seed = to_u64(k, v);
        } else if (key == "x0") {
          const auto xs = to_doubles(k, v);
          g.x0 = Eigen::Map<const Vector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
        } else if (key == "drift") {
          cfg.drift_names = split_list(v);
        } else if (key == "vol") {
          cfg.vol_names = split_list(v);
        } else if (key == "drift_rate") {
          g.drift_rate = to_double(k, v);
        } else if (key == "vol_rate") {
          g.vol_rate = to_double(k, v);
        }
      }
    } else if (name == "functional") {
      for (const auto& [key, child] : section) {
        if (!child.empty()) throw ConfigError("[functional] " + key + ": nested keys");
        if (key == "name") {
          cfg.functional = child.data();
        } else {
          cfg.functional_params[key] = child.data();
        }
      }
    } else if (name == "bk") {
      check_keys(section, name,
                 {"max_level", "cauchy_tol", "scale_tolerance", "horizon", "strict"});
      for (const auto& [key, child] : section) {
        const std::string v = child.data();
        const std::string k = "bk." + key;
        if (key == "max_level") cfg.bk.max_level = static_cast<int>(to_integer(k, v));
        if (key == "cauchy_tol") cfg.bk.cauchy_tol = to_double(k, v);
        if (key == "scale_tolerance") cfg.bk.scale_tolerance = to_bool(k, v);
        if (key == "horizon") cfg.bk.horizon = to_double(k, v);
        if (key == "strict") cfg.bk.strict = to_bool(k, v);
      }
    } else if (name == "run") {
      check_keys(section, name,
                 {"input", "coordinate", "levels", "ensemble", "paths", "threads", "threshold",
                  "upper_quantile", "times", "h", "numeric_fallback", "out"});
      for (const auto& [key, child] : section) {
        const std::string v = child.data();
        const std::string k = "run." + key;
        if (key == "input") cfg.input = v;
        if (key == "coordinate") {
          const long long c = to_integer(k, v);
          if (c < 1) throw ConfigError(k + ": coordinates are 1-based");
          cfg.coordinate = static_cast<int>(c - 1);
        }
        if (key == "levels") cfg.levels = parse_levels(v);
        if (key == "ensemble") cfg.ensemble = to_count(k, v);
        if (key == "paths") cfg.paths = to_count(k, v);
        if (key == "threads") cfg.threads = static_cast<int>(to_integer(k, v));
        if (key == "threshold") cfg.threshold = to_double(k, v);
        if (key == "upper_quantile") cfg.upper_quantile = to_double(k, v);
        if (key == "times") cfg.times = to_doubles(k, v);
        if (key == "h") cfg.h = to_double(k, v);
        if (key == "numeric_fallback") cfg.numeric_fallback = to_bool(k, v);
        if (key == "out") cfg.out = v;
      }
    } else {
      throw ConfigError("config: unknown section [" + name + "]");
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::ios_base::failure("cannot open config file '" + file + "'");
  return parse_config(in);
}

void ExperimentConfig::finalize() {
  auto& g = generator;
  g.seed = seed.value_or(0);
  if (g.dimension < 1 || g.dimension > 64) throw ConfigError("generator.dimension: out of range");
  const int d = g.dimension;
  try {
    g.drift.clear();
    g.vol.clear();
    if (g.kind == GeneratorKind::kItoEuler) {
      if (drift_names.empty()) drift_names.assign(d, "constant:0");
      if (vol_names.empty()) {
        for (int c = 0; c < d; ++c)
          for (int j = 0; j < d; ++j) vol_names.push_back(c == j ? "constant:1" : "constant:0");
      }
      if (static_cast<int>(drift_names.size()) != d)
        throw ConfigError("generator.drift: needs " + std::to_string(d) + " entries");
      if (static_cast<int>(vol_names.size()) != d * d)
        throw ConfigError("generator.vol: needs " + std::to_string(d * d) + " entries");
      for (const auto& n : drift_names) g.drift.push_back(make_simple_functional(n, d));
      for (const auto& n : vol_names) g.vol.push_back(make_simple_functional(n, d));
      const CadlagPath probe = causality_probe_path(d);
      for (const auto* list : {&g.drift, &g.vol})
        for (const auto& f : *list)
          if (!check_causality(f, probe, probe.grid().times()))
            throw ConfigError("generator: coefficient '" + f.label() + "' is not causal");
    }
    g.validate();
    if (input.empty()) (void)make_named_functional(functional, functional_params, d, bk);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (bk.max_level < 1 || bk.max_level > 30) throw ConfigError("bk.max_level: out of range");
  if (!(bk.cauchy_tol > 0.0)) throw ConfigError("bk.cauchy_tol: must be positive");
  if (bk.horizon < 0.0) throw ConfigError("bk.horizon: must be non-negative");
  if (input.empty() && coordinate >= d) throw ConfigError("run.coordinate: exceeds dimension");
  if (threads < 0) throw ConfigError("run.threads: must be non-negative");
  if (!(upper_quantile >= 0.0 && upper_quantile <= 1.0))
    throw ConfigError("run.upper_quantile: outside [0, 1]");
  if (!(h > 0.0)) throw ConfigError("run.h: must be positive");
  if (!(threshold >= 0.0)) throw ConfigError("run.threshold: must be non-negative");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1])) throw ConfigError("run.times: must be increasing");
}

std::uint64_t ExperimentConfig::require_seed() const {
  if (!seed) throw ConfigError(subcommand + ": a seed is required (generator.seed or --seed)");
  return *seed;
}

nlohmann::ordered_json to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["subcommand"] = cfg.subcommand;
  auto& g = j["generator"];
  g["kind"] = to_string(cfg.generator.kind);
  g["dimension"] = cfg.generator.dimension;
  g["horizon"] = cfg.generator.horizon;
  g["level"] = cfg.generator.level;
  if (cfg.seed) {
    g["seed"] = *cfg.seed;
  } else {
    g["seed"] = nullptr;
  }
  g["x0"] = std::vector<double>(cfg.generator.x0.data(),
                                cfg.generator.x0.data() + cfg.generator.x0.size());
  g["drift"] = cfg.drift_names;
  g["vol"] = cfg.vol_names;
  g["drift_rate"] = cfg.generator.drift_rate;
  g["vol_rate"] = cfg.generator.vol_rate;
  auto& f = j["functional"];
  f["name"] = cfg.functional;
  for (const auto& [k, v] : cfg.functional_params) f[k] = v;
  auto& b = j["bk"];
  b["max_level"] = cfg.bk.max_level;
  b["cauchy_tol"] = cfg.bk.cauchy_tol;
  b["scale_tolerance"] = cfg.bk.scale_tolerance;
  b["horizon"] = cfg.bk.horizon;
  b["strict"] = cfg.bk.strict;
  auto& r = j["run"];
  r["input"] = cfg.input;
  r["coordinate"] = cfg.coordinate + 1;
  r["levels"] = cfg.levels;
  r["ensemble"] = cfg.ensemble;
  r["paths"] = cfg.paths;
  r["threshold"] = cfg.threshold;
  r["upper_quantile"] = cfg.upper_quantile;
  r["times"] = cfg.times;
  r["h"] = cfg.h;
  r["numeric_fallback"] = cfg.numeric_fallback;
  return j;
}

}  // namespace pathcalc

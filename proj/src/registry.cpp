#include "pathcalc/registry.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace pathcalc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& text, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v))
    throw std::invalid_argument(what + ": '" + text + "' is not a number");
  return v;
}

// 1-based index text -> 0-based coordinate.
int parse_index(const std::string& text, const std::string& what) {
  const double v = parse_number(text, what);
  if (v < 1 || v != std::floor(v) || v > 1024)
    throw std::invalid_argument(what + ": index '" + text + "' must be a positive integer");
  return static_cast<int>(v) - 1;
}

Vector unit(int d, int i) {
  Vector g = Vector::Zero(d);
  g[i] = 1.0;
  return g;
}

Matrix single(int d, int i, double v) {
  Matrix h = Matrix::Zero(d, d);
  h(i, i) = v;
  return h;
}

// f(x_i) with derivatives df, d2f.
CausalFunctional scalar_map(const std::string& label, int i, std::function<double(double)> f,
                            std::function<double(double)> df,
                            std::function<double(double)> d2f) {
  return make_state_functional(
      label, [i, f](double, const Vector& x) { return f(x[i]); },
      [](double, const Vector&) { return 0.0; },
      [i, df](double, const Vector& x) { return Vector(df(x[i]) * unit(x.size(), i)); },
      [i, d2f](double, const Vector& x) {
        return single(static_cast<int>(x.size()), i, d2f(x[i]));
      });
}

}  // namespace

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  if (trim(text).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.push_back(trim(text.substr(start, comma == std::string::npos ? std::string::npos
                                                                     : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<std::string> simple_functional_names() {
  return {"time",   "constant", "coordinate",     "square",         "cube",
          "sin",    "cos",      "exp",            "running",        "running_square",
          "jump_indicator",     "anticipating"};
}

std::vector<std::string> composite_functional_names() {
  return {"doleans_dade", "qv", "levy_area", "bk_integral", "ito_process"};
}

CausalFunctional make_simple_functional(const std::string& spec) {
  const std::string s = trim(spec);
  const auto colon = s.find(':');
  const std::string name = s.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : trim(s.substr(colon + 1));
  auto index = [&] { return arg.empty() ? 0 : parse_index(arg, name); };
  auto no_arg = [&] {
    if (!arg.empty()) throw std::invalid_argument(name + ": takes no argument");
  };

  if (name == "time") {
    no_arg();
    return make_time_functional();
  }
  if (name == "constant") {
    const double c = arg.empty() ? 1.0 : parse_number(arg, name);
    return make_state_functional(
        "constant:" + (arg.empty() ? std::string("1") : arg),
        [c](double, const Vector&) { return c; }, [](double, const Vector&) { return 0.0; },
        [](double, const Vector& x) { return Vector(Vector::Zero(x.size())); },
        [](double, const Vector& x) { return Matrix(Matrix::Zero(x.size(), x.size())); });
  }
  if (name == "coordinate") return make_coordinate_functional(index());
  auto tag = [&] { return name + ":" + std::to_string(index() + 1); };
  if (name == "square")
    return scalar_map(tag(), index(), [](double x) { return x * x; },
                      [](double x) { return 2.0 * x; }, [](double) { return 2.0; });
  if (name == "cube")
    return scalar_map(tag(), index(), [](double x) { return x * x * x; },
                      [](double x) { return 3.0 * x * x; }, [](double x) { return 6.0 * x; });
  if (name == "sin")
    return scalar_map(tag(), index(), [](double x) { return std::sin(x); },
                      [](double x) { return std::cos(x); },
                      [](double x) { return -std::sin(x); });
  if (name == "cos")
    return scalar_map(tag(), index(), [](double x) { return std::cos(x); },
                      [](double x) { return -std::sin(x); },
                      [](double x) { return -std::cos(x); });
  if (name == "exp")
    return scalar_map(tag(), index(), [](double x) { return std::exp(x); },
                      [](double x) { return std::exp(x); },
                      [](double x) { return std::exp(x); });
  if (name == "running") {
    const int i = index();
    return make_running_integral(tag(), [i](double, const Vector& x) { return x[i]; });
  }
  if (name == "running_square") {
    const int i = index();
    return make_running_integral(tag(), [i](double, const Vector& x) { return x[i] * x[i]; });
  }
  if (name == "jump_indicator") {
    no_arg();
    return make_jump_indicator();
  }
  if (name == "anticipating") {
    no_arg();
    return make_anticipating_functional();
  }
  throw std::invalid_argument("unknown functional '" + name + "'");
}

CausalFunctional make_simple_functional(const std::string& spec, int dimension) {
  const std::string s = trim(spec);
  const auto colon = s.find(':');
  const std::string name = s.substr(0, colon);
  if (colon != std::string::npos && name != "constant" &&
      parse_index(trim(s.substr(colon + 1)), name) >= dimension)
    throw std::invalid_argument(s + ": index exceeds dimension " + std::to_string(dimension));
  return make_simple_functional(s);
}

CausalFunctional make_named_functional(const std::string& name, const ParamMap& params,
                                       int dimension, const BkConfig& bk) {
  auto param = [&](const std::string& key, const std::string& fallback) {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  auto coordinate = [&](const std::string& key) {
    const int i = parse_index(param(key, "1"), name + "." + key);
    if (i >= dimension)
      throw std::invalid_argument(name + "." + key + ": index exceeds dimension");
    return i;
  };

  if (name == "doleans_dade") return doleans_dade(bk);
  if (name == "qv") return make_qv_functional(coordinate("index"), coordinate("index2"), bk);
  if (name == "levy_area") {
    if (dimension < 2) throw std::invalid_argument("levy_area: needs dimension >= 2");
    return levy_area(bk);
  }
  if (name == "bk_integral")
    return make_bk_functional(make_simple_functional(param("integrand", "coordinate:1"), dimension),
                              coordinate("index"), dimension, bk);
  if (name == "ito_process") {
    std::vector<CausalFunctional> sigma;
    for (const auto& s : split_list(param("sigma", "constant:1")))
      sigma.push_back(make_simple_functional(s, dimension));
    if (static_cast<int>(sigma.size()) > dimension)
      throw std::invalid_argument("ito_process: more sigma entries than coordinates");
    return ito_process_functional(make_simple_functional(param("mu", "constant:0"), dimension),
                                  std::move(sigma), bk);
  }
  if (name.find(':') == std::string::npos) {
    if (name == "constant" && params.count("value"))
      return make_simple_functional(name + ":" + params.at("value"));
    if (params.count("index")) {
      coordinate("index");
      return make_simple_functional(name + ":" + params.at("index"), dimension);
    }
  }
  return make_simple_functional(name, dimension);
}

}  // namespace pathcalc

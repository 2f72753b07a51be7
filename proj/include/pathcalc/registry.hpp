#pragma once

#include <map>
#include <string>
#include <vector>

#include "pathcalc/bk.hpp"
#include "pathcalc/functional.hpp"

namespace pathcalc {

/// Named functionals for configs and the command line.
///
/// Simple names take an optional argument after a colon; coordinates are
/// 1-based:
///   time, constant:c, coordinate:i, square:i, cube:i, sin:i, cos:i, exp:i,
///   running:i (int x_i dr), running_square:i (int x_i^2 dr),
///   jump_indicator, anticipating
///
/// Composite names read extra keys from `params`:
///   doleans_dade
///   qv            index, index2
///   levy_area
///   bk_integral   integrand (simple name), index
///   ito_process   mu (simple name), sigma (comma list of simple names)
/// Any other name is looked up as a simple name. Throws
/// std::invalid_argument for unknown names or bad arguments.
using ParamMap = std::map<std::string, std::string>;

CausalFunctional make_simple_functional(const std::string& spec);
/// As above, rejecting coordinates beyond `dimension`.
CausalFunctional make_simple_functional(const std::string& spec, int dimension);
CausalFunctional make_named_functional(const std::string& name, const ParamMap& params,
                                       int dimension, const BkConfig& bk);

std::vector<std::string> simple_functional_names();
std::vector<std::string> composite_functional_names();

/// Splits on commas and trims blanks; empty input gives an empty list.
std::vector<std::string> split_list(const std::string& text);

}  // namespace pathcalc

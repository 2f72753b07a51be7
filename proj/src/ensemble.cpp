#include "pathcalc/ensemble.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>

namespace pathcalc {

std::vector<std::vector<double>> run_ensemble_serial(std::size_t count,
                                                     const PathKernel& kernel) {
  std::vector<std::vector<double>> rows(count);
  for (std::size_t k = 0; k < count; ++k) rows[k] = kernel(k);
  return rows;
}

std::vector<std::vector<double>> run_ensemble_parallel(std::size_t count,
                                                       const PathKernel& kernel,
                                                       int threads) {
  std::vector<std::vector<double>> rows(count);
  std::vector<std::exception_ptr> errors(count);
  const long n = static_cast<long>(count);
  const int nthreads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(nthreads)
  for (long k = 0; k < n; ++k) {
    try {
      rows[k] = kernel(static_cast<std::uint64_t>(k));
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

std::vector<std::vector<double>> run_ensemble(std::size_t count, const PathKernel& kernel,
                                              Execution exec, int threads) {
  return exec == Execution::kSerial ? run_ensemble_serial(count, kernel)
                                    : run_ensemble_parallel(count, kernel, threads);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile: no values");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<double> column(const std::vector<std::vector<double>>& rows, std::size_t col) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.at(col));
  return out;
}

}  // namespace pathcalc

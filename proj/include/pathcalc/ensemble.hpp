#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace pathcalc {

enum class Execution { kSerial, kParallel };

/// Computes one row of statistics for ensemble member `path_index`.
using PathKernel = std::function<std::vector<double>(std::uint64_t path_index)>;

/// Row k is kernel(k). The serial loop is the reference; the OpenMP loop
/// writes the same rows into the same slots, so both agree bit for bit.
std::vector<std::vector<double>> run_ensemble_serial(std::size_t count,
                                                     const PathKernel& kernel);
/// `threads` <= 0 uses the OpenMP default.
std::vector<std::vector<double>> run_ensemble_parallel(std::size_t count,
                                                       const PathKernel& kernel,
                                                       int threads = 0);
std::vector<std::vector<double>> run_ensemble(std::size_t count, const PathKernel& kernel,
                                              Execution exec, int threads = 0);

/// Linear-interpolation quantile (q in [0, 1]) of the values.
double quantile(std::vector<double> values, double q);

/// Column `col` of an ensemble result.
std::vector<double> column(const std::vector<std::vector<double>>& rows, std::size_t col);

}  // namespace pathcalc

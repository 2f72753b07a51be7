#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>

#include "pathcalc/functional.hpp"

namespace pathcalc {

namespace {

// Up to `count` grid points r <= t, evenly spread, always including t itself.
std::vector<double> probe_times(const CadlagPath& w, double t, int count) {
  const auto grid = w.grid().times();
  const std::size_t last = w.grid().index_at_or_before(t);
  std::vector<double> out;
  const std::size_t n = last + 1;
  const std::size_t step = std::max<std::size_t>(1, n / std::max(1, count));
  for (std::size_t k = 0; k < n; k += step) out.push_back(grid[k]);
  if (out.back() != t) out.push_back(t);
  return out;
}

void finish(ContinuityProbeReport& report) {
  report.modulus.resize(report.sizes.size());
  double running = 0.0;
  for (std::size_t k = 0; k < report.sizes.size(); ++k) {
    running = std::max(running, report.sup_response[k]);
    report.modulus[k] = running;
  }
}

std::vector<double> sorted_sizes(std::vector<double> sizes) {
  for (double s : sizes)
    if (!(s >= 0.0)) throw std::invalid_argument("probe: sizes must be non-negative");
  std::sort(sizes.begin(), sizes.end());
  return sizes;
}

}  // namespace

bool ContinuityProbeReport::vanishing(double tol) const {
  for (std::size_t k = 0; k < sizes.size(); ++k)
    if (sizes[k] > 0.0) return modulus[k] <= tol;
  return true;
}

ContinuityProbeReport probe_space_continuity(const CausalFunctional& F,
                                             const CadlagPath& omega, double t,
                                             double R, std::vector<double> sizes,
                                             ProbeOptions options) {
  ContinuityProbeReport report;
  report.radius = R;
  report.horizon = t;
  report.sizes = sorted_sizes(std::move(sizes));
  report.sup_response.assign(report.sizes.size(), 0.0);

  const int d = omega.dimension();
  const auto times = probe_times(omega, t, options.max_probe_times);
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unif(-R, R);
  std::bernoulli_distribution coin(0.5);

  for (std::size_t s = 0; s < report.sizes.size(); ++s) {
    const double size = report.sizes[s];
    double sup = 0.0;
    for (double r : times) {
      for (int sample = 0; sample <= options.samples; ++sample) {
        Vector base(d);
        if (sample == options.samples) {
          // The profile that cancels the path's own jump at r.
          const auto j = omega.jump(r);
          base = j ? Vector(-*j) : Vector(Vector::Zero(d));
        } else {
          for (int c = 0; c < d; ++c) base[c] = unif(rng);
        }
        Vector shifted = base;
        for (int c = 0; c < d; ++c) shifted[c] += coin(rng) ? size : -size;
        const double a = F(r, omega.bump(r, base));
        const double b = F(r, omega.bump(r, shifted));
        sup = std::max(sup, std::abs(a - b));
      }
    }
    report.sup_response[s] = sup;
  }
  finish(report);
  return report;
}

ContinuityProbeReport probe_time_continuity(const CausalFunctional& F,
                                            const CadlagPath& omega, double t,
                                            double R, std::vector<double> sizes,
                                            ProbeOptions options) {
  ContinuityProbeReport report;
  report.radius = R;
  report.horizon = t;
  report.sizes = sorted_sizes(std::move(sizes));
  report.sup_response.assign(report.sizes.size(), 0.0);

  const auto times = probe_times(omega, t, options.max_probe_times);
  for (std::size_t s = 0; s < report.sizes.size(); ++s) {
    const double size = report.sizes[s];
    double sup = 0.0;
    for (double r : times) {
      if (r + size > omega.horizon()) continue;
      const double shifted = F(r + size, omega.stop(r));
      sup = std::max(sup, std::abs(shifted - F(r, omega)));
    }
    report.sup_response[s] = sup;
  }
  finish(report);
  return report;
}

void write_probe_csv(std::ostream& out, const ContinuityProbeReport& report) {
  out << "size,sup_response\n";
  out.precision(17);
  for (std::size_t k = 0; k < report.sizes.size(); ++k)
    out << report.sizes[k] << ',' << report.sup_response[k] << '\n';
}

}  // namespace pathcalc

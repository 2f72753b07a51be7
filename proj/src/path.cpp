#include "pathcalc/path.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pathcalc {

namespace {

void require_in_domain(double t, double horizon, const char* what) {
  if (!(t >= 0.0 && t <= horizon)) {
    throw std::domain_error(std::string(what) + ": time " + std::to_string(t) +
                            " outside [0, " + std::to_string(horizon) + "]");
  }
}

}  // namespace

Partition::Partition(std::vector<double> times) : times_(std::move(times)) {
  if (times_.empty()) throw std::invalid_argument("partition: empty");
  if (times_.front() != 0.0)
    throw std::invalid_argument("partition: first point must be 0");
  for (std::size_t k = 1; k < times_.size(); ++k) {
    if (!(times_[k] > times_[k - 1]) || !std::isfinite(times_[k]))
      throw std::invalid_argument("partition: times must be strictly increasing");
  }
}

double Partition::mesh() const {
  double m = 0.0;
  for (std::size_t k = 1; k < times_.size(); ++k)
    m = std::max(m, times_[k] - times_[k - 1]);
  return m;
}

std::size_t Partition::index_at_or_before(double t) const {
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin())
    throw std::domain_error("partition: time before 0");
  return static_cast<std::size_t>(it - times_.begin()) - 1;
}

std::size_t Partition::index_before(double t) const {
  auto it = std::lower_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin())
    throw std::domain_error("partition: no point strictly before t");
  return static_cast<std::size_t>(it - times_.begin()) - 1;
}

std::optional<std::size_t> Partition::find(double t) const {
  auto it = std::lower_bound(times_.begin(), times_.end(), t);
  if (it == times_.end() || *it != t) return std::nullopt;
  return static_cast<std::size_t>(it - times_.begin());
}

Bracket bracket(const Partition& pi, double t, Bracketing convention) {
  require_in_domain(t, pi.horizon(), "bracket");
  const auto times = pi.times();
  if (convention == Bracketing::kClosedLeft) {
    const std::size_t k = pi.index_at_or_before(t);
    if (k + 1 >= pi.size())
      throw std::domain_error("bracket: no partition point right of t");
    return {times[k], times[k + 1]};
  }
  if (t == 0.0)
    throw std::domain_error("bracket: no partition point strictly left of 0");
  const std::size_t k = pi.index_before(t);
  return {times[k], times[k + 1]};
}

double nearest_left(const Partition& pi, double t, Bracketing convention) {
  return bracket(pi, t, convention).lower;
}

double nearest_right(const Partition& pi, double t, Bracketing convention) {
  return bracket(pi, t, convention).upper;
}

Partition dyadic_refinement(double horizon, int level) {
  if (level < 0) throw std::invalid_argument("dyadic_refinement: level < 0");
  if (!(horizon > 0.0))
    throw std::invalid_argument("dyadic_refinement: horizon must be positive");
  const std::size_t n = std::size_t{1} << level;
  std::vector<double> times(n + 1);
  for (std::size_t k = 0; k < n; ++k)
    times[k] = horizon * std::ldexp(static_cast<double>(k), -level);
  times[n] = horizon;
  return Partition(std::move(times));
}

// --- CadlagPath -------------------------------------------------------------

CadlagPath::CadlagPath(Partition grid, int dimension, std::vector<double> values,
                       std::optional<double> lifetime)
    : grid_(std::move(grid)),
      dim_(dimension),
      values_(std::move(values)),
      lifetime_(lifetime) {
  if (dim_ < 1) throw std::invalid_argument("path: dimension must be >= 1");
  if (values_.size() != grid_.size() * static_cast<std::size_t>(dim_))
    throw std::invalid_argument("path: value count does not match grid");
  if (lifetime_ && !(*lifetime_ > 0.0))
    throw std::invalid_argument("path: lifetime must be positive");
}

CadlagPath CadlagPath::scalar(Partition grid, std::vector<double> values) {
  return CadlagPath(std::move(grid), 1, std::move(values));
}

CadlagPath CadlagPath::from_rows(Partition grid, const std::vector<Vector>& rows) {
  if (rows.size() != grid.size())
    throw std::invalid_argument("path: row count does not match grid");
  const int d = rows.empty() ? 1 : static_cast<int>(rows.front().size());
  std::vector<double> values(rows.size() * d);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].size() != d)
      throw std::invalid_argument("path: ragged rows");
    for (int c = 0; c < d; ++c) values[c * rows.size() + k] = rows[k][c];
  }
  return CadlagPath(std::move(grid), d, std::move(values));
}

CadlagPath CadlagPath::constant(Partition grid, const Vector& value) {
  const std::size_t n = grid.size();
  const int d = static_cast<int>(value.size());
  std::vector<double> values(n * d);
  for (int c = 0; c < d; ++c)
    std::fill_n(values.begin() + c * n, n, value[c]);
  return CadlagPath(std::move(grid), d, std::move(values));
}

std::span<const double> CadlagPath::coordinate(int c) const {
  return std::span<const double>(values_).subspan(c * size(), size());
}

Vector CadlagPath::sample(std::size_t k) const {
  Vector v(dim_);
  for (int c = 0; c < dim_; ++c) v[c] = at(k, c);
  return v;
}

Vector CadlagPath::eval(double t) const {
  require_in_domain(t, horizon(), "eval");
  return sample(grid_.index_at_or_before(t));
}

double CadlagPath::eval(double t, int c) const {
  require_in_domain(t, horizon(), "eval");
  return at(grid_.index_at_or_before(t), c);
}

std::optional<Vector> CadlagPath::left_limit(double t) const {
  require_in_domain(t, horizon(), "left_limit");
  if (t == 0.0) return std::nullopt;
  return sample(grid_.index_before(t));
}

std::optional<Vector> CadlagPath::jump(double t) const {
  auto before = left_limit(t);
  if (!before) return std::nullopt;
  return Vector(eval(t) - *before);
}

namespace {

// Grid {points < t} + {t} + {horizon}, with the samples at points < t copied
// and `tail` written at t and at the horizon.
CadlagPath frozen_after(const CadlagPath& path, double t, const Vector& tail) {
  const auto times = path.grid().times();
  const std::size_t keep =
      static_cast<std::size_t>(std::lower_bound(times.begin(), times.end(), t) -
                               times.begin());
  std::vector<double> grid(times.begin(), times.begin() + keep);
  grid.push_back(t);
  if (t < path.horizon()) grid.push_back(path.horizon());
  const std::size_t n = grid.size();
  const int d = path.dimension();
  std::vector<double> values(n * d);
  for (int c = 0; c < d; ++c) {
    const auto src = path.coordinate(c);
    std::copy_n(src.begin(), keep, values.begin() + c * n);
    for (std::size_t k = keep; k < n; ++k) values[c * n + k] = tail[c];
  }
  return CadlagPath(Partition(std::move(grid)), d, std::move(values),
                    path.lifetime());
}

}  // namespace

CadlagPath CadlagPath::stop(double t) const {
  return frozen_after(*this, t, eval(t));
}

CadlagPath CadlagPath::bump(double t, const Vector& r) const {
  if (r.size() != dim_) throw std::invalid_argument("bump: dimension mismatch");
  Vector tail = eval(t);
  tail += r;
  return frozen_after(*this, t, tail);
}

CadlagPath CadlagPath::without_jump(double t) const {
  auto before = left_limit(t);
  if (!before) return stop(t);
  return frozen_after(*this, t, *before);
}

double CadlagPath::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool CadlagPath::operator==(const CadlagPath& other) const {
  return dim_ == other.dim_ && grid_ == other.grid_ &&
         values_ == other.values_ && lifetime_ == other.lifetime_;
}

PathBuilder::PathBuilder(Partition grid, int dimension)
    : path_(grid, dimension,
            std::vector<double>(grid.size() * static_cast<std::size_t>(dimension),
                                0.0)) {}

// --- free operations --------------------------------------------------------

CadlagPath piecewise_constant(const CadlagPath& path, const Partition& pi) {
  const double T = path.horizon();
  if (pi.horizon() < T)
    throw std::invalid_argument("piecewise_constant: partition does not reach horizon");
  const auto pts = pi.times();
  std::vector<double> grid;
  for (double t : pts) {
    if (t > T) break;
    grid.push_back(t);
  }
  const bool appended = grid.back() != T;
  if (appended) grid.push_back(T);
  const int d = path.dimension();
  const std::size_t n = grid.size();
  std::vector<double> values(n * d);
  for (int c = 0; c < d; ++c) {
    const auto s = sample_coordinate(path, c, grid);
    std::copy(s.begin(), s.end(), values.begin() + c * n);
  }
  // The appended horizon point (if any) carries no jump.
  if (appended) {
    for (int c = 0; c < d; ++c) values[c * n + n - 1] = values[c * n + n - 2];
  }
  return CadlagPath(Partition(std::move(grid)), d, std::move(values),
                    path.lifetime());
}

Partition merge_grids(const Partition& a, const Partition& b, double T) {
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  const auto ta = a.times();
  const auto tb = b.times();
  std::size_t i = 0, j = 0;
  while (i < ta.size() || j < tb.size()) {
    double next;
    if (j >= tb.size() || (i < ta.size() && ta[i] < tb[j])) {
      next = ta[i++];
    } else if (i >= ta.size() || tb[j] < ta[i]) {
      next = tb[j++];
    } else {
      next = ta[i++];
      ++j;
    }
    if (next > T) break;
    out.push_back(next);
  }
  if (out.back() != T) out.push_back(T);
  return Partition(std::move(out));
}

std::vector<double> sample_coordinate(const CadlagPath& path, int c,
                                      std::span<const double> times) {
  const auto grid = path.grid().times();
  const auto vals = path.coordinate(c);
  std::vector<double> out(times.size());
  std::size_t k = 0;
  for (std::size_t j = 0; j < times.size(); ++j) {
    const double t = times[j];
    require_in_domain(t, path.horizon(), "sample_coordinate");
    if (j > 0 && t < times[j - 1]) {
      k = path.grid().index_at_or_before(t);
    }
    while (k + 1 < grid.size() && grid[k + 1] <= t) ++k;
    out[j] = vals[k];
  }
  return out;
}

double sup_distance(const CadlagPath& a, const CadlagPath& b, double T) {
  if (a.dimension() != b.dimension())
    throw std::invalid_argument("sup_distance: dimension mismatch");
  if (a.horizon() < T || b.horizon() < T)
    throw std::domain_error("sup_distance: horizon shorter than T");
  const Partition grid = merge_grids(a.grid(), b.grid(), T);
  double sup = 0.0;
  for (int c = 0; c < a.dimension(); ++c) {
    const auto va = sample_coordinate(a, c, grid.times());
    const auto vb = sample_coordinate(b, c, grid.times());
    for (std::size_t k = 0; k < va.size(); ++k)
      sup = std::max(sup, std::abs(va[k] - vb[k]));
  }
  return sup;
}

}  // namespace pathcalc

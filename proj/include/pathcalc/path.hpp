#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pathcalc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Strictly increasing time grid with times[0] == 0.
class Partition {
 public:
  explicit Partition(std::vector<double> times);

  std::size_t size() const { return times_.size(); }
  std::span<const double> times() const { return times_; }
  double operator[](std::size_t k) const { return times_[k]; }
  double horizon() const { return times_.back(); }

  /// Largest gap between consecutive points; 0 for a single-point grid.
  double mesh() const;

  /// Index of the last point <= t. Requires 0 <= t.
  std::size_t index_at_or_before(double t) const;
  /// Index of the last point < t. Requires t > 0.
  std::size_t index_before(double t) const;
  /// Index k with times[k] == t, if t is a grid point.
  std::optional<std::size_t> find(double t) const;

  bool operator==(const Partition&) const = default;

 private:
  std::vector<double> times_;
};

/// Which half-open convention brackets t between neighbouring points.
enum class Bracketing {
  kClosedLeft,  // t in [lower, upper)
  kClosedRight  // t in (lower, upper]
};

struct Bracket {
  double lower;
  double upper;
};

/// Nearest partition points around t. Under kClosedLeft, t = horizon has no
/// upper neighbour; under kClosedRight, t = 0 has no lower one. Both throw
/// std::domain_error, as does any t outside [0, horizon].
Bracket bracket(const Partition& pi, double t,
                Bracketing convention = Bracketing::kClosedLeft);
double nearest_left(const Partition& pi, double t,
                    Bracketing convention = Bracketing::kClosedLeft);
double nearest_right(const Partition& pi, double t,
                     Bracketing convention = Bracketing::kClosedLeft);

/// Uniform grid {k * horizon / 2^level}; last point is exactly `horizon`.
Partition dyadic_refinement(double horizon, int level);

/// Right-continuous step path on [0, horizon] in R^d.
///
/// The value on [t_k, t_{k+1}) is the k-th sample. Values are stored
/// coordinate-major so that one coordinate is a contiguous span.
class CadlagPath {
 public:
  /// `values` holds dimension * grid.size() entries, coordinate-major.
  CadlagPath(Partition grid, int dimension, std::vector<double> values,
             std::optional<double> lifetime = std::nullopt);

  /// Scalar path from one value per grid point.
  static CadlagPath scalar(Partition grid, std::vector<double> values);
  /// Path built from per-point rows (row k is the value at grid[k]).
  static CadlagPath from_rows(Partition grid,
                              const std::vector<Vector>& rows);
  static CadlagPath constant(Partition grid, const Vector& value);

  const Partition& grid() const { return grid_; }
  int dimension() const { return dim_; }
  std::size_t size() const { return grid_.size(); }
  double horizon() const { return grid_.horizon(); }
  std::optional<double> lifetime() const { return lifetime_; }
  /// True once t has reached the lifetime (always false without one).
  bool dead_at(double t) const { return lifetime_ && t >= *lifetime_; }

  /// Samples of coordinate c at the grid points.
  std::span<const double> coordinate(int c) const;
  double at(std::size_t k, int c) const { return values_[c * size() + k]; }
  Vector sample(std::size_t k) const;

  /// Value at t (right-continuous). Throws std::domain_error outside
  /// [0, horizon].
  Vector eval(double t) const;
  double eval(double t, int c) const;

  /// Value at the last grid time strictly before t. Returns std::nullopt at
  /// t == 0: the left limit there is the pre-start state, not a number.
  std::optional<Vector> left_limit(double t) const;

  /// eval(t) - left_limit(t); std::nullopt at t == 0.
  std::optional<Vector> jump(double t) const;

  /// Path stopped at t: equal on [0, t], constant afterwards. The result's
  /// grid is {grid points < t} + {t} + {horizon}.
  CadlagPath stop(double t) const;

  /// Path equal on [0, t) and constant eval(t) + r from t on.
  CadlagPath bump(double t, const Vector& r) const;

  /// Path equal on [0, t) and constant at the left limit from t on, i.e.
  /// the stopped path with its jump at t removed. At t == 0 this is stop(0).
  CadlagPath without_jump(double t) const;

  /// Sup over the grid of the max-norm of the values.
  double sup_norm() const;

  bool operator==(const CadlagPath& other) const;

 private:
  Partition grid_;
  int dim_;
  std::vector<double> values_;
  std::optional<double> lifetime_;

  friend class PathBuilder;
};

/// Mutable construction buffer over a fixed grid. Used by generators that
/// fill a path left to right while evaluating causal coefficients on the
/// partial result: causal consumers never read past the current index.
class PathBuilder {
 public:
  PathBuilder(Partition grid, int dimension);

  void set(std::size_t k, int c, double v) {
    path_.values_[c * path_.size() + k] = v;
  }
  double get(std::size_t k, int c) const { return path_.at(k, c); }
  const CadlagPath& view() const { return path_; }
  CadlagPath finish() && { return std::move(path_); }

 private:
  CadlagPath path_;
};

/// Piecewise-constant approximation of `path` along `pi`: the step path on
/// the points of pi (up to the path's horizon) taking the value path(t_k)
/// on [t_k, t_{k+1}). pi must reach the path's horizon.
CadlagPath piecewise_constant(const CadlagPath& path, const Partition& pi);

/// Sup over [0, T] of |a(t) - b(t)|_max, attained on the union of grids.
double sup_distance(const CadlagPath& a, const CadlagPath& b, double T);

/// Union of two grids restricted to [0, T] (T is appended if missing).
Partition merge_grids(const Partition& a, const Partition& b, double T);

/// Samples of coordinate c at the given times (each in [0, horizon]).
/// Times must be non-decreasing.
std::vector<double> sample_coordinate(const CadlagPath& path, int c,
                                      std::span<const double> times);

// CSV format: header `t,x1,...,xd`, one row per grid point, first row t=0.
void write_csv(std::ostream& out, const CadlagPath& path);
CadlagPath read_csv(std::istream& in);
void write_csv_file(const std::string& file, const CadlagPath& path);
CadlagPath read_csv_file(const std::string& file);

}  // namespace pathcalc

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace velmat {

using Point = std::array<double, 3>;

/// Ball removed from the box; its surface is part of the boundary.
struct ExcludedBall {
  Point center{0.0, 0.0, 0.0};
  double radius = 0.1;
};

/// Axis-aligned box in R^d (d <= 3). lower/upper are always finite: on an
/// unbounded side they delimit the sampling window only, and the domain
/// itself extends to infinity past them.
struct BoxDomain {
  int dim = 1;
  Point lower{0.0, 0.0, 0.0};
  Point upper{1.0, 1.0, 1.0};
  std::array<bool, 3> unbounded_lower{false, false, false};
  std::array<bool, 3> unbounded_upper{false, false, false};
  std::optional<ExcludedBall> hole;

  /// Throws ScenarioError on inverted bounds or bad dimension.
  void check() const;

  bool contains(std::span<const double> x) const;
  /// Euclidean distance to the finite part of the boundary (bounded faces
  /// and the excluded ball); +inf when there is none.
  double boundary_distance(std::span<const double> x) const;
  bool has_finite_boundary() const;
  bool all_unbounded() const;
  double extent(int axis) const { return upper[axis] - lower[axis]; }
  Point center() const;
  std::string describe() const;
};

/// Uniform rectilinear lattice. Axis 0 varies fastest in the linear index.
class Grid {
 public:
  Grid() = default;
  Grid(int dim, std::array<std::size_t, 3> nodes, Point origin, Point spacing);

  /// Cell-centred nodes strictly inside the window: x_i = lo + (i + 1/2) h.
  /// Requires at least 8 nodes per axis.
  static Grid cell_centered(const BoxDomain& dom, std::span<const std::size_t> nodes);
  /// Nodes on [lo, hi] including both endpoints.
  static Grid vertex(int dim, const Point& lower, const Point& upper, std::span<const std::size_t> nodes);

  int dim() const noexcept { return dim_; }
  std::size_t nodes(int axis) const { return n_[axis]; }
  const std::array<std::size_t, 3>& shape() const noexcept { return n_; }
  double spacing(int axis) const { return h_[axis]; }
  double origin(int axis) const { return origin_[axis]; }
  double min_spacing() const;
  double cell_volume() const;
  std::size_t size() const noexcept { return n_[0] * n_[1] * n_[2]; }

  double coord(std::size_t i, int axis) const { return origin_[axis] + static_cast<double>(i) * h_[axis]; }
  Point point(std::size_t idx) const;
  std::size_t index(std::size_t i, std::size_t j = 0, std::size_t k = 0) const { return i + n_[0] * (j + n_[1] * k); }
  std::array<std::size_t, 3> unravel(std::size_t idx) const;
  std::size_t stride(int axis) const { return axis == 0 ? 1 : axis == 1 ? n_[0] : n_[0] * n_[1]; }
  /// Nearest node (ties towards the lower index), clamped into the grid.
  std::size_t nearest(std::span<const double> x) const;

 private:
  int dim_ = 1;
  std::array<std::size_t, 3> n_{1, 1, 1};
  Point origin_{0.0, 0.0, 0.0};
  Point h_{1.0, 1.0, 1.0};
};

/// Quasi-random points in the box window (Halton bases 2, 3, 5), skipping
/// points in the excluded ball. Deterministic.
std::vector<Point> halton_points(const BoxDomain& dom, std::size_t count);

/// "(x1, x2, ...)" with 6 significant digits, for error messages.
std::string format_point(std::span<const double> x);

}  // namespace velmat

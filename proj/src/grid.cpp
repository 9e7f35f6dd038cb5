#include "grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "errors.hpp"

namespace velmat {

void BoxDomain::check() const {
  if (dim < 1 || dim > 3) throw ScenarioError("domain dimension must be 1, 2 or 3, got " + std::to_string(dim));
  for (int i = 0; i < dim; ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]))
      throw ScenarioError("domain window bounds must be finite on axis " + std::to_string(i + 1));
    if (!(lower[i] < upper[i]))
      throw ScenarioError("domain lower bound must be below upper bound on axis " + std::to_string(i + 1));
  }
  if (hole && !(hole->radius > 0.0)) throw ScenarioError("excluded ball radius must be positive");
}

bool BoxDomain::contains(std::span<const double> x) const {
  if (static_cast<int>(x.size()) < dim) return false;
  for (int i = 0; i < dim; ++i) {
    if (!std::isfinite(x[i])) return false;
    if (!unbounded_lower[i] && !(x[i] > lower[i])) return false;
    if (!unbounded_upper[i] && !(x[i] < upper[i])) return false;
  }
  if (hole) {
    double r2 = 0.0;
    for (int i = 0; i < dim; ++i) r2 += (x[i] - hole->center[i]) * (x[i] - hole->center[i]);
    if (!(std::sqrt(r2) > hole->radius)) return false;
  }
  return true;
}

double BoxDomain::boundary_distance(std::span<const double> x) const {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < dim; ++i) {
    if (!unbounded_lower[i]) best = std::min(best, x[i] - lower[i]);
    if (!unbounded_upper[i]) best = std::min(best, upper[i] - x[i]);
  }
  if (hole) {
    double r2 = 0.0;
    for (int i = 0; i < dim; ++i) r2 += (x[i] - hole->center[i]) * (x[i] - hole->center[i]);
    best = std::min(best, std::sqrt(r2) - hole->radius);
  }
  return best;
}

bool BoxDomain::has_finite_boundary() const {
  if (hole) return true;
  for (int i = 0; i < dim; ++i)
    if (!unbounded_lower[i] || !unbounded_upper[i]) return true;
  return false;
}

bool BoxDomain::all_unbounded() const {
  for (int i = 0; i < dim; ++i)
    if (!unbounded_lower[i] || !unbounded_upper[i]) return false;
  return true;
}

Point BoxDomain::center() const {
  Point c{0.0, 0.0, 0.0};
  for (int i = 0; i < dim; ++i) c[i] = 0.5 * (lower[i] + upper[i]);
  return c;
}

std::string BoxDomain::describe() const {
  std::ostringstream os;
  for (int i = 0; i < dim; ++i) {
    if (i) os << " x ";
    os << (unbounded_lower[i] ? "(-inf" : "(" + std::to_string(lower[i])) << ", "
       << (unbounded_upper[i] ? "+inf)" : std::to_string(upper[i]) + ")");
  }
  if (hole) os << " minus ball(r=" << hole->radius << ")";
  return os.str();
}

Grid::Grid(int dim, std::array<std::size_t, 3> nodes, Point origin, Point spacing)
    : dim_(dim), n_(nodes), origin_(origin), h_(spacing) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("grid dimension must be 1..3");
  for (int i = dim; i < 3; ++i) {
    n_[i] = 1;
    origin_[i] = 0.0;
    h_[i] = 1.0;
  }
  for (int i = 0; i < dim; ++i)
    if (n_[i] < 1 || !(h_[i] > 0.0)) throw std::invalid_argument("grid needs positive node count and spacing");
}

Grid Grid::cell_centered(const BoxDomain& dom, std::span<const std::size_t> nodes) {
  if (static_cast<int>(nodes.size()) != dom.dim)
    throw ScenarioError("grid node counts must match domain dimension");
  std::array<std::size_t, 3> n{1, 1, 1};
  Point origin{}, h{1.0, 1.0, 1.0};
  for (int i = 0; i < dom.dim; ++i) {
    if (nodes[i] < 8) throw ScenarioError("grid needs at least 8 nodes per axis");
    n[i] = nodes[i];
    h[i] = dom.extent(i) / static_cast<double>(nodes[i]);
    origin[i] = dom.lower[i] + 0.5 * h[i];
  }
  return Grid(dom.dim, n, origin, h);
}

Grid Grid::vertex(int dim, const Point& lower, const Point& upper, std::span<const std::size_t> nodes) {
  if (static_cast<int>(nodes.size()) != dim) throw std::invalid_argument("grid node counts must match dimension");
  std::array<std::size_t, 3> n{1, 1, 1};
  Point h{1.0, 1.0, 1.0};
  for (int i = 0; i < dim; ++i) {
    if (nodes[i] < 2) throw std::invalid_argument("vertex grid needs at least 2 nodes per axis");
    n[i] = nodes[i];
    h[i] = (upper[i] - lower[i]) / static_cast<double>(nodes[i] - 1);
  }
  return Grid(dim, n, lower, h);
}

double Grid::min_spacing() const {
  double m = h_[0];
  for (int i = 1; i < dim_; ++i) m = std::min(m, h_[i]);
  return m;
}

double Grid::cell_volume() const {
  double v = 1.0;
  for (int i = 0; i < dim_; ++i) v *= h_[i];
  return v;
}

Point Grid::point(std::size_t idx) const {
  const auto ijk = unravel(idx);
  Point p{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) p[a] = coord(ijk[a], a);
  return p;
}

std::array<std::size_t, 3> Grid::unravel(std::size_t idx) const {
  return {idx % n_[0], (idx / n_[0]) % n_[1], idx / (n_[0] * n_[1])};
}

std::size_t Grid::nearest(std::span<const double> x) const {
  std::array<std::size_t, 3> ijk{0, 0, 0};
  for (int a = 0; a < dim_; ++a) {
    const double f = (x[a] - origin_[a]) / h_[a];
    // Round half down so ties go to the lower index.
    double r = std::ceil(f - 0.5);
    r = std::clamp(r, 0.0, static_cast<double>(n_[a] - 1));
    ijk[a] = static_cast<std::size_t>(r);
  }
  return index(ijk[0], ijk[1], ijk[2]);
}

namespace {

double radical_inverse(std::size_t i, unsigned base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

}  // namespace

std::vector<Point> halton_points(const BoxDomain& dom, std::size_t count) {
  constexpr unsigned bases[3] = {2, 3, 5};
  std::vector<Point> out;
  out.reserve(count);
  // Index 0 maps onto the window corner; start at 1.
  for (std::size_t i = 1; out.size() < count && i < 64 * count + 64; ++i) {
    Point p{0.0, 0.0, 0.0};
    for (int a = 0; a < dom.dim; ++a) p[a] = dom.lower[a] + radical_inverse(i, bases[a]) * dom.extent(a);
    if (dom.contains(std::span<const double>(p.data(), dom.dim))) out.push_back(p);
  }
  return out;
}

std::string format_point(std::span<const double> x) {
  std::ostringstream os;
  os.precision(6);
  os << '(';
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ')';
  return os.str();
}

}  // namespace velmat

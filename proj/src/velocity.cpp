#include "velocity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "diagnostics.hpp"
#include "errors.hpp"

namespace velmat {

SymMatrix SymMatrix::identity(int dim, double s) {
  SymMatrix m(dim);
  for (int i = 0; i < dim; ++i) m(i, i) = s;
  return m;
}

double SymMatrix::quad(std::span<const double> u, std::span<const double> v) const {
  double acc = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) acc += u[i] * (*this)(i, j) * v[j];
  return acc;
}

std::vector<double> SymMatrix::eigenvalues() const {
  if (n == 1) return {a[0]};
  if (n == 2) {
    const double m = 0.5 * (a[0] + a[4]);
    const double r = std::hypot(0.5 * (a[0] - a[4]), a[1]);
    return {m - r, m + r};
  }
  return eig_herm(HermitianMatrix(to_matrix())).values;
}

double SymMatrix::max_abs_entry() const {
  double m = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m = std::max(m, std::abs((*this)(i, j)));
  return m;
}

double SymMatrix::norm() const {
  const auto ev = eigenvalues();
  return std::max(std::abs(ev.front()), std::abs(ev.back()));
}

SymMatrix SymMatrix::inverse() const {
  SymMatrix out(n);
  if (n == 1) {
    out(0, 0) = 1.0 / a[0];
    return out;
  }
  if (n == 2) {
    const double det = a[0] * a[4] - a[1] * a[3];
    out(0, 0) = a[4] / det;
    out(1, 1) = a[0] / det;
    out(0, 1) = out(1, 0) = -a[1] / det;
    return out;
  }
  const SymMatrix& m = *this;
  const double c00 = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
  const double c01 = m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2);
  const double c02 = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
  const double det = m(0, 0) * c00 + m(0, 1) * c01 + m(0, 2) * c02;
  out(0, 0) = c00 / det;
  out(0, 1) = out(1, 0) = c01 / det;
  out(0, 2) = out(2, 0) = c02 / det;
  out(1, 1) = (m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0)) / det;
  out(1, 2) = out(2, 1) = (m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2)) / det;
  out(2, 2) = (m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0)) / det;
  return out;
}

Matrix SymMatrix::to_matrix() const {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = (*this)(i, j);
  return m;
}

SymMatrix operator+(SymMatrix a, const SymMatrix& b) {
  for (int i = 0; i < 9; ++i) a.a[i] += b.a[i];
  return a;
}

SymMatrix operator-(SymMatrix a, const SymMatrix& b) {
  for (int i = 0; i < 9; ++i) a.a[i] -= b.a[i];
  return a;
}

SymMatrix operator*(double s, SymMatrix a) {
  for (double& v : a.a) v *= s;
  return a;
}

namespace {

// Re Tr(X Y) for square X, Y without forming the product.
double re_trace_product(const Matrix& X, const Matrix& Y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < X.rows(); ++i)
    for (std::size_t m = 0; m < X.cols(); ++m) acc += (X(i, m) * Y(m, i)).real();
  return acc;
}

// Re Tr(X Y^*) for equally shaped X, Y.
double re_trace_adjoint(const Matrix& X, const Matrix& Y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < X.rows(); ++i)
    for (std::size_t m = 0; m < X.cols(); ++m) acc += (X(i, m) * std::conj(Y(i, m))).real();
  return acc;
}

SymMatrix gram(int d, const std::vector<Matrix>& P, double scale, bool adjoint_form) {
  SymMatrix M(d);
  for (int j = 0; j < d; ++j)
    for (int l = j; l < d; ++l) {
      const double v = scale * (adjoint_form ? re_trace_adjoint(P[j], P[l]) : re_trace_product(P[j], P[l]));
      M(j, l) = M(l, j) = v;
    }
  return M;
}

}  // namespace

std::vector<HermitianMatrix> canonical_principal_parts(const CoefficientSystem& sys, std::span<const double> x) {
  const Coefficients c = sys.eval(x);
  std::vector<HermitianMatrix> out;
  out.reserve(c.A.size());
  if (sys.canonical()) return c.A;
  const Matrix B = spd_inv_sqrt(c.E).matrix();
  for (const auto& A : c.A) out.emplace_back(B * A.matrix() * B);
  return out;
}

SymMatrix velocity_matrix(const CoefficientSystem& sys, std::span<const double> x) {
  const auto At = canonical_principal_parts(sys, x);
  std::vector<Matrix> P;
  for (const auto& a : At) P.push_back(a.matrix());
  return gram(sys.dim(), P, 1.0, false);
}

SymMatrix velocity_matrix_structured(const CoefficientSystem& sys, std::span<const double> x) {
  const int d = sys.dim();
  if (sys.kind() == SystemKind::maxwell && sys.maxwell_medium()) {
    if (!sys.domain().contains(x)) throw DomainError("point " + format_point(x) + " is outside the domain");
    const MaxwellMedium m = sys.maxwell_medium()(x);
    const Matrix ei = spd_inv_sqrt(SPDMatrix(HermitianMatrix(m.eps))).matrix();
    const Matrix mi = spd_inv_sqrt(SPDMatrix(HermitianMatrix(m.mu))).matrix();
    // M_jl = 2 Tr(P_j P_l^T),  P_j = eps^{-1/2} a^j mu^{-1/2}
    std::vector<Matrix> P;
    for (int j = 0; j < d; ++j) P.push_back(ei * maxwell_curl_block(j) * mi);
    return gram(d, P, 2.0, true);
  }
  if (sys.kind() == SystemKind::elastic && sys.elastic_medium()) {
    if (!sys.domain().contains(x)) throw DomainError("point " + format_point(x) + " is outside the domain");
    const ElasticMedium m = sys.elastic_medium()(x);
    Matrix c = m.stiffness + m.stiffness.transpose();
    c *= 0.5;
    const Matrix s = spd_sqrt(SPDMatrix(HermitianMatrix(std::move(c)))).matrix();
    // M_jl = (2/rho) Tr(C^{1/2} a^j (C^{1/2} a^l)^T)
    std::vector<Matrix> P;
    for (int j = 0; j < d; ++j) P.push_back(s * elastic_strain_block(j));
    return gram(d, P, 2.0 / m.rho, true);
  }
  throw UnsupportedError("velocity_matrix_structured supports only the Maxwell and elastic built-ins, not " +
                         sys.label());
}

namespace {

HermitianMatrix directional(const std::vector<HermitianMatrix>& At, std::span<const double> n) {
  const std::size_t k = At.front().dim();
  Matrix s(k, k);
  for (std::size_t j = 0; j < At.size(); ++j) {
    if (n[j] == 0.0) continue;
    Matrix t = At[j].matrix();
    t *= n[j];
    s += t;
  }
  return HermitianMatrix(std::move(s));
}

}  // namespace

double char_speed(const CoefficientSystem& sys, std::span<const double> x, std::span<const double> n) {
  if (static_cast<int>(n.size()) < sys.dim()) throw std::invalid_argument("char_speed: direction has too few components");
  double n2 = 0.0;
  for (int j = 0; j < sys.dim(); ++j) n2 += n[j] * n[j];
  if (std::abs(n2 - 1.0) > 1e-12) throw std::invalid_argument("char_speed: direction must be a unit vector");
  return op_norm(directional(canonical_principal_parts(sys, x), n));
}

const std::vector<Point>& sphere_directions(int dim) {
  static const std::vector<Point> dirs[3] = {
      {Point{1.0, 0.0, 0.0}, Point{-1.0, 0.0, 0.0}},
      [] {
        std::vector<Point> v;
        for (int m = 0; m < 128; ++m) {
          const double t = std::numbers::pi * m / 128.0;
          v.push_back({std::cos(t), std::sin(t), 0.0});
        }
        return v;
      }(),
      [] {
        std::vector<Point> v;
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (int i = 0; i < 256; ++i) {
          const double z = 1.0 - (2.0 * i + 1.0) / 256.0;
          const double r = std::sqrt(1.0 - z * z);
          v.push_back({r * std::cos(golden * i), r * std::sin(golden * i), z});
        }
        return v;
      }(),
  };
  return dirs[dim - 1];
}

namespace {

double fattorini_from(const std::vector<HermitianMatrix>& At) {
  double r = 0.0;
  for (const auto& a : At) r = std::max(r, op_norm(a));
  return r;
}

Bracket chernoff_from(const std::vector<HermitianMatrix>& At, int d) {
  Bracket b;
  for (const Point& n : sphere_directions(d)) b.lower = std::max(b.lower, op_norm(directional(At, n)));
  std::vector<Matrix> P;
  for (const auto& a : At) P.push_back(a.matrix());
  const SymMatrix M = gram(d, P, 1.0, false);
  const double lam = std::max(0.0, M.eigenvalues().back());
  b.upper = std::min(std::sqrt(lam), std::sqrt(static_cast<double>(d)) * fattorini_from(At));
  // Both ends are exact up to rounding; never report an inverted bracket.
  if (b.lower > b.upper) b.upper = b.lower;
  return b;
}

}  // namespace

double chernoff_upper(const CoefficientSystem& sys, std::span<const double> x) {
  const auto At = canonical_principal_parts(sys, x);
  std::vector<Matrix> P;
  for (const auto& a : At) P.push_back(a.matrix());
  const double lam = std::max(0.0, gram(sys.dim(), P, 1.0, false).eigenvalues().back());
  return std::min(std::sqrt(lam), std::sqrt(static_cast<double>(sys.dim())) * fattorini_from(At));
}

Bracket chernoff_c(const CoefficientSystem& sys, std::span<const double> x) {
  return chernoff_from(canonical_principal_parts(sys, x), sys.dim());
}

double fattorini_r(const CoefficientSystem& sys, std::span<const double> x) {
  return fattorini_from(canonical_principal_parts(sys, x));
}

std::vector<double> radial_envelope(const CoefficientSystem& sys, std::span<const double> radii) {
  const BoxDomain& dom = sys.domain();
  bool any_unbounded = false;
  for (int a = 0; a < dom.dim; ++a) any_unbounded = any_unbounded || dom.unbounded_lower[a] || dom.unbounded_upper[a];
  if (!any_unbounded)
    throw UnsupportedError("radial_envelope needs an unbounded domain; for bounded domains use the "
                           "boundary-distance criterion");
  const int d = sys.dim();
  // Shell directions: the full sphere (both signs in 2-D).
  std::vector<Point> dirs;
  if (d == 2) {
    for (int m = 0; m < 64; ++m) {
      const double t = 2.0 * std::numbers::pi * m / 64.0;
      dirs.push_back({std::cos(t), std::sin(t), 0.0});
    }
  } else {
    dirs = sphere_directions(d);
  }
  constexpr int kSubShells = 4;
  std::vector<double> out;
  double running = 0.0, prev = 0.0;
  bool have_origin = false;
  for (double r : radii) {
    if (!(r >= prev)) throw std::invalid_argument("radial_envelope: radii must be nondecreasing and nonnegative");
    auto sample = [&](const Point& p) {
      const std::span<const double> x(p.data(), d);
      if (!dom.contains(x)) return;
      running = std::max(running, chernoff_upper(sys, x));
    };
    if (!have_origin) {
      sample(Point{0.0, 0.0, 0.0});
      have_origin = true;
    }
    for (int s = 1; s <= kSubShells; ++s) {
      const double rho = prev + (r - prev) * s / kSubShells;
      if (rho == 0.0) continue;
      for (const Point& n : dirs) sample(Point{rho * n[0], rho * n[1], rho * n[2]});
    }
    out.push_back(running);
    prev = r;
  }
  return out;
}

VelocityField sample_velocity_field(const CoefficientSystem& sys, const Grid& grid, bool structured) {
  if (grid.dim() != sys.dim()) throw ScenarioError("grid dimension does not match the system");
  VelocityField f;
  f.grid = grid;
  f.M.assign(grid.size(), SymMatrix(sys.dim()));
  f.valid.assign(grid.size(), 0);
  double scale = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point p = grid.point(i);
    const std::span<const double> x(p.data(), sys.dim());
    if (!sys.domain().contains(x)) continue;
    f.M[i] = structured ? velocity_matrix_structured(sys, x) : velocity_matrix(sys, x);
    f.valid[i] = 1;
    scale = std::max(scale, f.M[i].norm());
  }
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (f.valid[i] && f.M[i].eigenvalues().front() <= 1e-12 * scale) ++f.degenerate_nodes;
  if (f.degenerate_nodes > 0)
    diag::warn("velocity matrix is degenerate (smallest eigenvalue <= 1e-12 max ||M||) at " +
               std::to_string(f.degenerate_nodes) + " grid nodes");
  return f;
}

namespace {

// One pass of the [1 4 6 4 1]/16 kernel along an axis; invalid or missing
// neighbours drop out and the remaining weights are renormalised.
std::vector<SymMatrix> smooth_axis(const VelocityField& f, const std::vector<SymMatrix>& in, int axis) {
  static constexpr double w[5] = {1.0, 4.0, 6.0, 4.0, 1.0};
  const Grid& g = f.grid;
  const std::size_t stride = g.stride(axis);
  const long n = static_cast<long>(g.nodes(axis));
  std::vector<SymMatrix> out(in.size(), SymMatrix(g.dim()));
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (!f.valid[i]) continue;
    const long pos = static_cast<long>(g.unravel(i)[axis]);
    SymMatrix acc(g.dim());
    double wsum = 0.0;
    for (int o = -2; o <= 2; ++o) {
      const long q = pos + o;
      if (q < 0 || q >= n) continue;
      const std::size_t nb = static_cast<std::size_t>(static_cast<long>(i) + o * static_cast<long>(stride));
      if (!f.valid[nb]) continue;
      acc = acc + w[o + 2] * in[nb];
      wsum += w[o + 2];
    }
    out[i] = (1.0 / wsum) * acc;
  }
  return out;
}

}  // namespace

double majorant_margin(const VelocityField& f) {
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f.M.size(); ++i) {
    if (!f.valid[i]) continue;
    const double scale = std::max(f.majorant[i].norm(), 1e-300);
    worst = std::min(worst, (f.majorant[i] - f.M[i]).eigenvalues().front() / scale);
  }
  return worst;
}

VelocityField majorant(VelocityField f, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("majorant: delta must lie in (0, 1)");
  if (f.M.empty()) throw std::invalid_argument("majorant: velocity field has no samples");
  const int d = f.grid.dim();
  double max_norm = 0.0;
  for (std::size_t i = 0; i < f.M.size(); ++i)
    if (f.valid[i]) max_norm = std::max(max_norm, f.M[i].norm());
  f.eps_reg = std::max(1e-12 * max_norm, 1e-300);
  if (max_norm == 0.0) diag::warn("velocity matrix vanishes identically; majorant is the regularisation eps_reg * I");

  std::vector<SymMatrix> mol = f.M;
  for (int pass = 0; pass < 2; ++pass)
    for (int axis = 0; axis < d; ++axis) mol = smooth_axis(f, mol, axis);

  double dl = delta;
  for (int attempt = 0; attempt <= 3; ++attempt) {
    f.majorant.assign(f.M.size(), SymMatrix(d));
    for (std::size_t i = 0; i < f.M.size(); ++i)
      if (f.valid[i]) f.majorant[i] = (1.0 + dl) * mol[i] + SymMatrix::identity(d, f.eps_reg);
    f.delta = dl;
    if (majorant_margin(f) >= -1e-10) {
      if (attempt > 0) {
        std::ostringstream os;
        os << "majorant slack escalated from " << delta << " to " << dl;
        diag::warn(os.str());
      }
      return f;
    }
    dl *= 2.0;
  }
  std::ostringstream os;
  os << "majorant construction failed: M_hat >= M still violated with slack " << dl / 2.0
     << "; the velocity field is too rough for this grid";
  throw NumericalError(os.str());
}

}  // namespace velmat

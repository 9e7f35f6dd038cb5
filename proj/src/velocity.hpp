#pragma once

#include <array>
#include <span>
#include <vector>

#include "grid.hpp"
#include "systems.hpp"

namespace velmat {

/// Real symmetric d x d matrix, d <= 3.
struct SymMatrix {
  int n = 0;
  std::array<double, 9> a{};

  SymMatrix() = default;
  explicit SymMatrix(int dim) : n(dim) {}
  static SymMatrix identity(int dim, double s = 1.0);

  double& operator()(int i, int j) { return a[3 * i + j]; }
  double operator()(int i, int j) const { return a[3 * i + j]; }

  /// <u, S v>
  double quad(std::span<const double> u, std::span<const double> v) const;
  double quad(std::span<const double> u) const { return quad(u, u); }
  /// Ascending eigenvalues.
  std::vector<double> eigenvalues() const;
  double max_abs_entry() const;
  /// Spectral norm.
  double norm() const;
  SymMatrix inverse() const;
  Matrix to_matrix() const;
};

SymMatrix operator+(SymMatrix a, const SymMatrix& b);
SymMatrix operator-(SymMatrix a, const SymMatrix& b);
SymMatrix operator*(double s, SymMatrix a);

/// Velocity matrix M_jl = Tr(E^{-1/2} A^j E^{-1} A^l E^{-1/2}).
SymMatrix velocity_matrix(const CoefficientSystem& sys, std::span<const double> x);

/// Closed-form M for the Maxwell and elastic built-ins, written in terms of
/// the medium tensors instead of the full k x k blocks. Throws
/// UnsupportedError for other systems.
SymMatrix velocity_matrix_structured(const CoefficientSystem& sys, std::span<const double> x);

/// Largest characteristic speed in the unit direction n:
/// || E^{-1/2} sigma(x, n) E^{-1/2} ||.
double char_speed(const CoefficientSystem& sys, std::span<const double> x, std::span<const double> n);

/// Canonical principal parts E^{-1/2} A^j E^{-1/2} at x.
std::vector<HermitianMatrix> canonical_principal_parts(const CoefficientSystem& sys, std::span<const double> x);

struct Bracket {
  double lower = 0.0;
  double upper = 0.0;
};

/// Direction set used for sampled sup over the unit sphere: 1-D {+1, -1},
/// 2-D 128 angles over a half circle, 3-D 256 Fibonacci-sphere points.
const std::vector<Point>& sphere_directions(int dim);

/// Bracket for c(x) = sup_{|xi|=1} || sum_j xi_j A~^j(x) ||: sampled maximum
/// below, min(sqrt(lambda_max M), sqrt(d) r(x)) above.
Bracket chernoff_c(const CoefficientSystem& sys, std::span<const double> x);

/// Upper end of the bracket alone (no direction sampling).
double chernoff_upper(const CoefficientSystem& sys, std::span<const double> x);

/// r(x) = max_j || A~^j(x) ||.
double fattorini_r(const CoefficientSystem& sys, std::span<const double> x);

/// b(r) = sup over |x| <= r of the Chernoff upper bound, sampled on shells
/// (points outside the domain are skipped). Throws UnsupportedError on a
/// bounded domain.
std::vector<double> radial_envelope(const CoefficientSystem& sys, std::span<const double> radii);

/// M sampled on a grid, optionally with a majorant.
struct VelocityField {
  Grid grid;
  std::vector<SymMatrix> M;
  std::vector<char> valid;  // 0 where the node lies outside the domain
  std::vector<SymMatrix> majorant;
  double delta = 0.0;    // slack actually used by the majorant
  double eps_reg = 0.0;  // regularisation added to the majorant
  std::size_t degenerate_nodes = 0;

  bool has_majorant() const { return !majorant.empty(); }
};

/// Samples M on every grid node inside the domain. structured selects the
/// closed-form path for the Maxwell and elastic built-ins.
VelocityField sample_velocity_field(const CoefficientSystem& sys, const Grid& grid, bool structured = false);

/// Grid-level smooth majorant: (1 + delta) * mollified M + eps_reg I, with
/// eps_reg = 1e-12 max ||M||. The mollifier is a separable [1 4 6 4 1]/16
/// kernel applied twice per axis. If M_hat >= M fails at some node delta is
/// doubled, at most three times, before a NumericalError.
VelocityField majorant(VelocityField field, double delta);

/// Smallest eigenvalue of M_hat - M over valid nodes, relative to ||M_hat||.
double majorant_margin(const VelocityField& field);

}  // namespace velmat

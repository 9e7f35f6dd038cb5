#pragma once

// First-order symmetric systems  D = E^{-1} ( 1/2 sum_j (A^j D_j + D_j A^j) + V ),
// D_j = -i d/dx_j, given pointwise by matrix fields (E, A^1..A^d, V) on a
// box domain.

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "grid.hpp"
#include "matkernel.hpp"

namespace velmat {

enum class SystemKind { telegraph, maxwell, elastic, dirac, custom, canonical };

std::string_view to_string(SystemKind k);

/// Unchecked pointwise coefficient data as produced by an evaluator.
struct RawCoefficients {
  Matrix E;
  std::vector<Matrix> A;
  Matrix V;
};

/// Validated pointwise coefficients.
struct Coefficients {
  SPDMatrix E;
  std::vector<HermitianMatrix> A;
  HermitianMatrix V;
};

/// Permittivity and permeability tensors (real, 3x3) at a point.
struct MaxwellMedium {
  Matrix eps;
  Matrix mu;
};

/// Density and 6x6 stiffness matrix (Voigt order 11,22,33,12,23,31) at a
/// point. The stiffness is returned as supplied, not symmetrised.
struct ElasticMedium {
  double rho = 1.0;
  Matrix stiffness;
};

class CoefficientSystem {
 public:
  using Evaluator = std::function<RawCoefficients(std::span<const double>)>;
  using MaxwellEvaluator = std::function<MaxwellMedium(std::span<const double>)>;
  using ElasticEvaluator = std::function<ElasticMedium(std::span<const double>)>;
  /// Returns d_j E^{-1/2}(x) for j = 1..d.
  using InvSqrtGradient = std::function<std::vector<Matrix>(std::span<const double>)>;

  CoefficientSystem(std::string label, SystemKind kind, BoxDomain domain, std::size_t k, Evaluator eval);

  const std::string& label() const noexcept { return label_; }
  SystemKind kind() const noexcept { return kind_; }
  const BoxDomain& domain() const noexcept { return domain_; }
  int dim() const noexcept { return domain_.dim; }
  std::size_t k() const noexcept { return k_; }

  /// Validated coefficients at x. Throws DomainError outside the domain and
  /// ValidationError (naming field, entry and point) on non-Hermitian or
  /// non-positive data.
  Coefficients eval(std::span<const double> x) const;
  /// Evaluator output without structural checks (still domain-checked).
  RawCoefficients eval_raw(std::span<const double> x) const;

  /// True when E is the identity everywhere (canonical form).
  bool canonical() const noexcept { return canonical_; }
  /// True when every A^j is independent of x.
  bool constant_principal_part() const noexcept { return constant_a_; }

  const MaxwellEvaluator& maxwell_medium() const noexcept { return maxwell_; }
  const ElasticEvaluator& elastic_medium() const noexcept { return elastic_; }
  /// Analytic gradient of E^{-1/2}; empty when finite differences are used.
  const InvSqrtGradient& inv_sqrt_gradient() const noexcept { return grad_; }

  CoefficientSystem& set_canonical(bool v) { canonical_ = v; return *this; }
  CoefficientSystem& set_constant_principal_part(bool v) { constant_a_ = v; return *this; }
  CoefficientSystem& set_maxwell_medium(MaxwellEvaluator f) { maxwell_ = std::move(f); return *this; }
  CoefficientSystem& set_elastic_medium(ElasticEvaluator f) { elastic_ = std::move(f); return *this; }
  CoefficientSystem& set_inv_sqrt_gradient(InvSqrtGradient f) { grad_ = std::move(f); return *this; }

 private:
  std::string label_;
  SystemKind kind_;
  BoxDomain domain_;
  std::size_t k_;
  Evaluator eval_;
  bool canonical_ = false;
  bool constant_a_ = false;
  MaxwellEvaluator maxwell_;
  ElasticEvaluator elastic_;
  InvSqrtGradient grad_;
};

/// Principal symbol sum_j xi_j A^j(x).
HermitianMatrix symbol(const CoefficientSystem& sys, std::span<const double> x, std::span<const double> xi);

/// Unitarily equivalent system with E = 1 under Psi -> E^{1/2} Psi:
///   A~^j = E^{-1/2} A^j E^{-1/2},
///   V~   = E^{-1/2} V E^{-1/2}
///          + 1/2 sum_j ( E^{-1/2} A^j (D_j E^{-1/2}) - (D_j E^{-1/2}) A^j E^{-1/2} ).
/// Derivatives of E^{-1/2} are central differences with step
/// max(1e-5, 1e-5 * axis extent), one-sided near the boundary.
CoefficientSystem canonicalize(const CoefficientSystem& sys);

/// Finite-difference step used by canonicalize on the given axis.
double canonical_fd_step(const BoxDomain& dom, int axis);

struct ValidationReport {
  bool pass = true;
  std::size_t samples = 0;
  double worst_hermiticity_defect = 0.0;  // relative to the matrix norm
  double min_eig_E = 0.0;
  std::optional<double> min_eig_stiffness;
  std::vector<std::string> failures;
};

/// Samples quasi-random interior points (Halton) and checks the structural
/// assumptions: E SPD, A^j and V Hermitian, stiffness symmetric and SPD.
ValidationReport validate_system(const CoefficientSystem& sys, std::size_t sample_count = 256);

// ---- built-in physical systems ------------------------------------------

/// Lossless transmission line, Psi = (current, voltage):
/// E = diag(L, C), A^1 = [[0,1],[1,0]]. One-dimensional domains only.
CoefficientSystem telegraph(const BoxDomain& dom, std::string_view L, std::string_view C);

/// Maxwell equations in an isotropic medium, Psi = (E-field, H-field).
/// On 1-D/2-D domains the fields are 3-D but independent of the missing
/// coordinates, so only A^1..A^d appear.
CoefficientSystem maxwell_isotropic(const BoxDomain& dom, std::string_view eps, std::string_view mu);

/// Anisotropic Maxwell: eps and mu each given as 9 entries (row-major) or 6
/// upper-triangle entries.
CoefficientSystem maxwell_anisotropic(const BoxDomain& dom, std::span<const std::string> eps,
                                      std::span<const std::string> mu);

/// Velocity-stress elastic waves with Psi = (Sigma, P), E = diag(rho C^{-1}, 1_3),
/// isotropic stiffness from bulk modulus K and shear modulus mu.
CoefficientSystem elastic_isotropic(const BoxDomain& dom, std::string_view rho, std::string_view K,
                                    std::string_view mu);

/// General elastic medium. stiffness holds the 21 upper-triangle entries of
/// the Voigt matrix in row-major order (mirrored), or all 36 entries.
CoefficientSystem elastic(const BoxDomain& dom, std::string_view rho, std::span<const std::string> stiffness);

/// Massless free Dirac operator, alpha matrices in the Dirac representation,
/// on R^3 minus a ball of the given radius about the origin.
CoefficientSystem dirac_free(BoxDomain dom, double radius = 0.1);

/// Complex matrix entry given as real and imaginary expressions.
struct EntryExpr {
  std::string re = "0";
  std::string im = "0";
};
using MatrixExpr = std::vector<std::vector<EntryExpr>>;

/// User-defined system from matrix-entry expressions.
CoefficientSystem custom_system(const BoxDomain& dom, std::size_t k, const MatrixExpr& E,
                                const std::vector<MatrixExpr>& A, const MatrixExpr& V);

/// Constant 3x3 curl blocks a^1..a^3 of the Maxwell system.
const Matrix& maxwell_curl_block(int axis);
/// Constant 6x3 blocks a^1..a^3 of the elastic system.
const Matrix& elastic_strain_block(int axis);
/// Dirac alpha matrices.
const Matrix& dirac_alpha(int axis);
/// Isotropic Voigt stiffness matrix for bulk modulus K and shear modulus mu.
Matrix isotropic_stiffness(double K, double mu);

}  // namespace velmat

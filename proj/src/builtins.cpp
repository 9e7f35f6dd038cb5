// Built-in physical systems and the user-defined (custom) system.

#include <cmath>
#include <sstream>

#include "dsl.hpp"
#include "errors.hpp"
#include "systems.hpp"

namespace velmat {

namespace {

constexpr std::size_t kConstructionSamples = 256;

struct Field {
  std::string name;
  dsl::Expr expr;
  double operator()(std::span<const double> x) const { return dsl::eval(expr, x); }
  bool constant() const { return expr.arity() == 0; }
};

Field compile(std::string name, std::string_view src, int dim) {
  dsl::Expr e;
  try {
    e = dsl::parse(src);
  } catch (const dsl::ParseError& err) {
    throw dsl::ParseError(err.offset(), err.expected(), "in '" + name + "': " + err.what());
  }
  if (e.arity() > dim) {
    static const char* names[3] = {"x", "y", "z"};
    throw ScenarioError("expression for '" + name + "' uses coordinate " + names[e.arity() - 1] + " but the domain is " +
                        std::to_string(dim) + "-D");
  }
  return Field{std::move(name), std::move(e)};
}

/// Checks that every field is strictly positive on the construction samples.
void require_positive(const BoxDomain& dom, std::string_view system, std::initializer_list<const Field*> fields) {
  for (const Point& p : halton_points(dom, kConstructionSamples)) {
    const std::span<const double> x(p.data(), dom.dim);
    for (const Field* f : fields) {
      const double v = (*f)(x);
      if (!(v > 0.0)) {
        std::ostringstream os;
        os << system << ": " << f->name << " must be positive, got " << v << " at " << format_point(x);
        throw ValidationError(os.str());
      }
    }
  }
}

Matrix block_offdiag(const Matrix& a) {
  // -[[0, a], [a^T, 0]]
  const std::size_t m = a.rows(), n = a.cols();
  Matrix out(m + n, m + n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      out(i, m + j) = -a(i, j);
      out(m + j, i) = -a(i, j);
    }
  return out;
}

Matrix block_diag(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() + b.rows(), a.cols() + b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j);
  for (std::size_t i = 0; i < b.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) out(a.rows() + i, a.cols() + j) = b(i, j);
  return out;
}

std::vector<Matrix> principal_parts(int dim, const Matrix& (*block)(int)) {
  std::vector<Matrix> out;
  for (int j = 0; j < dim; ++j) out.push_back(block_offdiag(block(j)));
  return out;
}

std::vector<Field> compile_list(std::string_view prefix, std::span<const std::string> src, int dim) {
  std::vector<Field> out;
  for (std::size_t i = 0; i < src.size(); ++i)
    out.push_back(compile(std::string(prefix) + "[" + std::to_string(i) + "]", src[i], dim));
  return out;
}

/// 3x3 symmetric tensor from 9 row-major or 6 upper-triangle fields.
Matrix tensor3(const std::vector<Field>& f, std::span<const double> x) {
  Matrix m(3, 3);
  if (f.size() == 9) {
    for (std::size_t i = 0; i < 9; ++i) m(i / 3, i % 3) = f[i](x);
  } else {
    std::size_t n = 0;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = i; j < 3; ++j) m(i, j) = m(j, i) = f[n++](x);
  }
  return m;
}

void require_spd_tensor(const Matrix& m, std::string_view what, std::span<const double> x) {
  const double scale = std::max(m.frobenius_norm(), 1e-300);
  if (m.hermiticity_defect() > HermitianMatrix::kHermitianTolerance * scale)
    throw ValidationError(std::string(what) + " is not symmetric at " + format_point(x));
  if (!(eig_herm(HermitianMatrix(m)).values.front() > 0.0))
    throw ValidationError(std::string(what) + " is not positive definite at " + format_point(x));
}

}  // namespace

const Matrix& maxwell_curl_block(int axis) {
  static const Matrix a[3] = {
      Matrix::from_rows({{0, 0, 0}, {0, 0, -1}, {0, 1, 0}}),
      Matrix::from_rows({{0, 0, 1}, {0, 0, 0}, {-1, 0, 0}}),
      Matrix::from_rows({{0, -1, 0}, {1, 0, 0}, {0, 0, 0}}),
  };
  return a[axis];
}

const Matrix& elastic_strain_block(int axis) {
  static const Matrix a[3] = {
      Matrix::from_rows({{1, 0, 0}, {0, 0, 0}, {0, 0, 0}, {0, 1, 0}, {0, 0, 0}, {0, 0, 1}}),
      Matrix::from_rows({{0, 0, 0}, {0, 1, 0}, {0, 0, 0}, {1, 0, 0}, {0, 0, 1}, {0, 0, 0}}),
      Matrix::from_rows({{0, 0, 0}, {0, 0, 0}, {0, 0, 1}, {0, 0, 0}, {0, 1, 0}, {1, 0, 0}}),
  };
  return a[axis];
}

const Matrix& dirac_alpha(int axis) {
  using namespace std::complex_literals;
  // alpha_j = [[0, sigma_j], [sigma_j, 0]]
  auto alpha = [](const Matrix& sigma) {
    Matrix m(4, 4);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) m(i, 2 + j) = m(2 + i, j) = sigma(i, j);
    return m;
  };
  static const Matrix a[3] = {
      alpha(Matrix::from_rows({{0, 1}, {1, 0}})),
      alpha(Matrix::from_rows({{0, -1i}, {1i, 0}})),
      alpha(Matrix::from_rows({{1, 0}, {0, -1}})),
  };
  return a[axis];
}

Matrix isotropic_stiffness(double K, double mu) {
  Matrix c(6, 6);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) c(i, j) = (i == j) ? K + 4.0 * mu / 3.0 : K - 2.0 * mu / 3.0;
    c(3 + i, 3 + i) = mu;
  }
  return c;
}

CoefficientSystem telegraph(const BoxDomain& dom, std::string_view L_src, std::string_view C_src) {
  if (dom.dim != 1) throw ScenarioError("telegraph system needs a 1-D domain, got " + std::to_string(dom.dim) + "-D");
  Field L = compile("L", L_src, 1), C = compile("C", C_src, 1);
  require_positive(dom, "telegraph", {&L, &C});
  const Matrix A1 = Matrix::from_rows({{0, 1}, {1, 0}});
  CoefficientSystem sys("telegraph(L=" + std::string(L_src) + ", C=" + std::string(C_src) + ")", SystemKind::telegraph,
                        dom, 2, [L, C, A1](std::span<const double> x) {
                          const double d[2] = {L(x), C(x)};
                          return RawCoefficients{Matrix::diagonal(d), {A1}, Matrix(2, 2)};
                        });
  sys.set_constant_principal_part(true);
  return sys;
}

CoefficientSystem maxwell_isotropic(const BoxDomain& dom, std::string_view eps_src, std::string_view mu_src) {
  Field eps = compile("eps", eps_src, dom.dim), mu = compile("mu", mu_src, dom.dim);
  require_positive(dom, "maxwell_isotropic", {&eps, &mu});
  const auto A = principal_parts(dom.dim, maxwell_curl_block);
  CoefficientSystem sys("maxwell_isotropic(eps=" + std::string(eps_src) + ", mu=" + std::string(mu_src) + ")",
                        SystemKind::maxwell, dom, 6, [eps, mu, A](std::span<const double> x) {
                          const double e = eps(x), m = mu(x);
                          const double d[6] = {e, e, e, m, m, m};
                          return RawCoefficients{Matrix::diagonal(d), A, Matrix(6, 6)};
                        });
  sys.set_constant_principal_part(true);
  sys.set_maxwell_medium([eps, mu](std::span<const double> x) {
    Matrix e = Matrix::identity(3), m = Matrix::identity(3);
    e *= eps(x);
    m *= mu(x);
    return MaxwellMedium{e, m};
  });
  return sys;
}

CoefficientSystem maxwell_anisotropic(const BoxDomain& dom, std::span<const std::string> eps_src,
                                      std::span<const std::string> mu_src) {
  for (auto n : {eps_src.size(), mu_src.size()})
    if (n != 9 && n != 6)
      throw ScenarioError("maxwell_anisotropic: eps and mu need 9 (row-major) or 6 (upper triangle) entries, got " +
                          std::to_string(n));
  auto eps = compile_list("eps", eps_src, dom.dim);
  auto mu = compile_list("mu", mu_src, dom.dim);
  for (const Point& p : halton_points(dom, kConstructionSamples)) {
    const std::span<const double> x(p.data(), dom.dim);
    require_spd_tensor(tensor3(eps, x), "maxwell_anisotropic: eps", x);
    require_spd_tensor(tensor3(mu, x), "maxwell_anisotropic: mu", x);
  }
  const auto A = principal_parts(dom.dim, maxwell_curl_block);
  auto medium = [eps, mu](std::span<const double> x) { return MaxwellMedium{tensor3(eps, x), tensor3(mu, x)}; };
  CoefficientSystem sys("maxwell_anisotropic", SystemKind::maxwell, dom, 6, [medium, A](std::span<const double> x) {
    const MaxwellMedium m = medium(x);
    return RawCoefficients{block_diag(m.eps, m.mu), A, Matrix(6, 6)};
  });
  sys.set_constant_principal_part(true);
  sys.set_maxwell_medium(medium);
  return sys;
}

namespace {

CoefficientSystem elastic_from_medium(const BoxDomain& dom, std::string label, CoefficientSystem::ElasticEvaluator medium) {
  for (const Point& p : halton_points(dom, kConstructionSamples)) {
    const std::span<const double> x(p.data(), dom.dim);
    const ElasticMedium m = medium(x);
    if (!(m.rho > 0.0)) {
      std::ostringstream os;
      os << label << ": rho must be positive, got " << m.rho << " at " << format_point(x);
      throw ValidationError(os.str());
    }
    Matrix s = m.stiffness + m.stiffness.transpose();
    s *= 0.5;
    if (!(eig_herm(HermitianMatrix(s)).values.front() > 0.0))
      throw ValidationError(label + ": stiffness is not positive definite at " + format_point(x));
  }
  const auto A = principal_parts(dom.dim, elastic_strain_block);
  CoefficientSystem sys(label, SystemKind::elastic, dom, 9, [medium, A](std::span<const double> x) {
    const ElasticMedium m = medium(x);
    Matrix c = m.stiffness + m.stiffness.transpose();
    c *= 0.5;
    Matrix cinv = spd_inverse(SPDMatrix(HermitianMatrix(std::move(c)))).matrix();
    cinv *= m.rho;
    return RawCoefficients{block_diag(cinv, Matrix::identity(3)), A, Matrix(9, 9)};
  });
  sys.set_constant_principal_part(true);
  sys.set_elastic_medium(std::move(medium));
  return sys;
}

}  // namespace

CoefficientSystem elastic_isotropic(const BoxDomain& dom, std::string_view rho_src, std::string_view K_src,
                                    std::string_view mu_src) {
  Field rho = compile("rho", rho_src, dom.dim), K = compile("K", K_src, dom.dim), mu = compile("mu", mu_src, dom.dim);
  require_positive(dom, "elastic_isotropic", {&rho, &K, &mu});
  return elastic_from_medium(dom,
                             "elastic_isotropic(rho=" + std::string(rho_src) + ", K=" + std::string(K_src) +
                                 ", mu=" + std::string(mu_src) + ")",
                             [rho, K, mu](std::span<const double> x) {
                               return ElasticMedium{rho(x), isotropic_stiffness(K(x), mu(x))};
                             });
}

CoefficientSystem elastic(const BoxDomain& dom, std::string_view rho_src, std::span<const std::string> stiffness) {
  if (stiffness.size() != 21 && stiffness.size() != 36)
    throw ScenarioError("elastic: stiffness needs 21 upper-triangle entries (or 36 full entries), got " +
                        std::to_string(stiffness.size()));
  Field rho = compile("rho", rho_src, dom.dim);
  auto c = compile_list("stiffness", stiffness, dom.dim);
  return elastic_from_medium(dom, "elastic", [rho, c](std::span<const double> x) {
    Matrix m(6, 6);
    if (c.size() == 36) {
      for (std::size_t i = 0; i < 36; ++i) m(i / 6, i % 6) = c[i](x);
    } else {
      std::size_t n = 0;
      for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = i; j < 6; ++j) m(i, j) = m(j, i) = c[n++](x);
    }
    return ElasticMedium{rho(x), m};
  });
}

CoefficientSystem dirac_free(BoxDomain dom, double radius) {
  if (dom.dim != 3) throw ScenarioError("dirac_free needs a 3-D domain");
  if (!(radius > 0.0)) throw ScenarioError("dirac_free: excluded radius must be positive");
  dom.hole = ExcludedBall{{0.0, 0.0, 0.0}, radius};
  std::ostringstream label;
  label << "dirac_free(radius=" << radius << ")";
  std::vector<Matrix> A{dirac_alpha(0), dirac_alpha(1), dirac_alpha(2)};
  CoefficientSystem sys(label.str(), SystemKind::dirac, dom, 4, [A](std::span<const double>) {
    return RawCoefficients{Matrix::identity(4), A, Matrix(4, 4)};
  });
  sys.set_canonical(true).set_constant_principal_part(true);
  return sys;
}

CoefficientSystem custom_system(const BoxDomain& dom, std::size_t k, const MatrixExpr& E_src,
                                const std::vector<MatrixExpr>& A_src, const MatrixExpr& V_src) {
  if (k == 0 || k > 16) throw ScenarioError("custom system: k must be in 1..16");
  if (static_cast<int>(A_src.size()) != dom.dim)
    throw ScenarioError("custom system: need one A matrix per axis (" + std::to_string(dom.dim) + "), got " +
                        std::to_string(A_src.size()));
  struct EntryField {
    Field re, im;
  };
  using FieldMatrix = std::vector<EntryField>;
  auto compile_matrix = [&](const MatrixExpr& m, const std::string& name) {
    if (m.empty()) {
      FieldMatrix zero;
      for (std::size_t i = 0; i < k * k; ++i)
        zero.push_back({compile(name, "0", dom.dim), compile(name, "0", dom.dim)});
      return zero;
    }
    if (m.size() != k) throw ScenarioError("custom system: " + name + " must have " + std::to_string(k) + " rows");
    FieldMatrix out;
    for (std::size_t i = 0; i < k; ++i) {
      if (m[i].size() != k)
        throw ScenarioError("custom system: row " + std::to_string(i + 1) + " of " + name + " must have " +
                            std::to_string(k) + " entries");
      for (std::size_t j = 0; j < k; ++j) {
        const std::string ij = name + "(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
        out.push_back({compile(ij, m[i][j].re, dom.dim), compile(ij + ".im", m[i][j].im, dom.dim)});
      }
    }
    return out;
  };
  auto to_matrix = [k](const FieldMatrix& f, std::span<const double> x) {
    Matrix m(k, k);
    for (std::size_t n = 0; n < k * k; ++n) m(n / k, n % k) = Complex(f[n].re(x), f[n].im(x));
    return m;
  };
  if (E_src.empty()) throw ScenarioError("custom system: E is required");
  FieldMatrix E = compile_matrix(E_src, "E");
  std::vector<FieldMatrix> A;
  bool constant_a = true;
  for (std::size_t j = 0; j < A_src.size(); ++j) {
    A.push_back(compile_matrix(A_src[j], "A" + std::to_string(j + 1)));
    for (const auto& e : A.back()) constant_a = constant_a && e.re.constant() && e.im.constant();
  }
  FieldMatrix V = compile_matrix(V_src, "V");
  CoefficientSystem sys("custom(k=" + std::to_string(k) + ")", SystemKind::custom, dom, k,
                        [E, A, V, to_matrix](std::span<const double> x) {
                          RawCoefficients r;
                          r.E = to_matrix(E, x);
                          for (const auto& a : A) r.A.push_back(to_matrix(a, x));
                          r.V = to_matrix(V, x);
                          return r;
                        });
  sys.set_constant_principal_part(constant_a);
  // Surface structural violations (non-Hermitian entries, E not positive) at
  // construction, naming the entry and point.
  for (const Point& p : halton_points(dom, kConstructionSamples)) (void)sys.eval(std::span<const double>(p.data(), dom.dim));
  return sys;
}

}  // namespace velmat

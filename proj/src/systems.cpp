#include "systems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "diagnostics.hpp"
#include "errors.hpp"

namespace velmat {

std::string_view to_string(SystemKind k) {
  switch (k) {
    case SystemKind::telegraph: return "telegraph";
    case SystemKind::maxwell: return "maxwell";
    case SystemKind::elastic: return "elastic";
    case SystemKind::dirac: return "dirac";
    case SystemKind::custom: return "custom";
    case SystemKind::canonical: return "canonical";
  }
  return "unknown";
}

CoefficientSystem::CoefficientSystem(std::string label, SystemKind kind, BoxDomain domain, std::size_t k,
                                     Evaluator eval)
    : label_(std::move(label)), kind_(kind), domain_(std::move(domain)), k_(k), eval_(std::move(eval)) {
  domain_.check();
  if (k_ == 0) throw ScenarioError("fiber dimension k must be positive");
  if (!eval_) throw std::invalid_argument("coefficient evaluator is empty");
}

RawCoefficients CoefficientSystem::eval_raw(std::span<const double> x) const {
  if (static_cast<int>(x.size()) < dim()) throw DomainError("point has fewer coordinates than the domain dimension");
  if (!domain_.contains(x)) throw DomainError("point " + format_point(x.first(dim())) + " is outside the domain " + domain_.describe());
  RawCoefficients raw = eval_(x.first(dim()));
  auto check_shape = [&](const Matrix& m, const char* what) {
    if (m.rows() != k_ || m.cols() != k_)
      throw ValidationError(std::string(what) + " has shape " + std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()) + ", expected " + std::to_string(k_) + "x" + std::to_string(k_));
  };
  check_shape(raw.E, "E");
  check_shape(raw.V, "V");
  if (static_cast<int>(raw.A.size()) != dim())
    throw ValidationError("system supplies " + std::to_string(raw.A.size()) + " matrices A^j for a " +
                          std::to_string(dim()) + "-D domain");
  for (const auto& a : raw.A) check_shape(a, "A^j");
  return raw;
}

namespace {

std::string entry_label(const Matrix& m) {
  std::size_t bi = 0, bj = 0;
  double worst = -1.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) {
      const double d = std::abs(m(i, j) - std::conj(m(j, i)));
      if (d > worst) { worst = d; bi = i; bj = j; }
    }
  std::ostringstream os;
  os << "entry (" << bi + 1 << "," << bj + 1 << ") = " << m(bi, bj) << " vs conj of (" << bj + 1 << "," << bi + 1
     << ") = " << std::conj(m(bj, bi));
  return os.str();
}

HermitianMatrix checked_hermitian(const Matrix& m, const std::string& field, std::span<const double> x) {
  const double scale = std::max(m.frobenius_norm(), 1e-300);
  if (m.hermiticity_defect() > HermitianMatrix::kHermitianTolerance * scale)
    throw ValidationError(field + " is not Hermitian at " + format_point(x) + ": " + entry_label(m));
  return HermitianMatrix(m);
}

}  // namespace

Coefficients CoefficientSystem::eval(std::span<const double> x) const {
  RawCoefficients raw = eval_raw(x);
  x = x.first(dim());
  Coefficients c;
  HermitianMatrix e = checked_hermitian(raw.E, "E", x);
  try {
    c.E = SPDMatrix(std::move(e));
  } catch (const ValidationError& err) {
    throw ValidationError("E is not positive definite at " + format_point(x) + ": " + err.what());
  }
  c.A.reserve(raw.A.size());
  for (std::size_t j = 0; j < raw.A.size(); ++j)
    c.A.push_back(checked_hermitian(raw.A[j], "A^" + std::to_string(j + 1), x));
  c.V = checked_hermitian(raw.V, "V", x);
  return c;
}

HermitianMatrix symbol(const CoefficientSystem& sys, std::span<const double> x, std::span<const double> xi) {
  if (static_cast<int>(xi.size()) < sys.dim()) throw std::invalid_argument("symbol: direction has too few components");
  const Coefficients c = sys.eval(x);
  Matrix s(sys.k(), sys.k());
  for (int j = 0; j < sys.dim(); ++j) {
    if (xi[j] == 0.0) continue;
    Matrix t = c.A[j].matrix();
    t *= xi[j];
    s += t;
  }
  return HermitianMatrix(std::move(s));
}

double canonical_fd_step(const BoxDomain& dom, int axis) { return std::max(1e-5, 1e-5 * dom.extent(axis)); }

namespace {

Matrix inv_sqrt_E(const CoefficientSystem& sys, std::span<const double> x) {
  const Coefficients c = sys.eval(x);
  return spd_inv_sqrt(c.E).matrix();
}

// d/dx_axis of E^{-1/2} at x by second-order finite differences.
Matrix fd_inv_sqrt_derivative(const CoefficientSystem& sys, std::span<const double> x, int axis, const Matrix& b0) {
  const BoxDomain& dom = sys.domain();
  double h = canonical_fd_step(dom, axis);
  Point p{0.0, 0.0, 0.0};
  std::copy(x.begin(), x.end(), p.begin());
  auto shifted = [&](double s) {
    Point q = p;
    q[axis] += s;
    return q;
  };
  auto inside = [&](const Point& q) { return dom.contains(std::span<const double>(q.data(), dom.dim)); };
  auto B = [&](const Point& q) { return inv_sqrt_E(sys, std::span<const double>(q.data(), dom.dim)); };
  for (int attempt = 0; attempt < 6; ++attempt) {
    const Point pp = shifted(h), pm = shifted(-h), pp2 = shifted(2 * h), pm2 = shifted(-2 * h);
    if (inside(pp) && inside(pm)) {
      Matrix d = B(pp) - B(pm);
      d *= 1.0 / (2 * h);
      return d;
    }
    if (inside(pp) && inside(pp2)) {
      Matrix d = -3.0 * b0;
      d += 4.0 * B(pp);
      d -= B(pp2);
      d *= 1.0 / (2 * h);
      return d;
    }
    if (inside(pm) && inside(pm2)) {
      Matrix d = 3.0 * b0;
      d -= 4.0 * B(pm);
      d += B(pm2);
      d *= 1.0 / (2 * h);
      return d;
    }
    h *= 0.1;
    std::ostringstream os;
    os << "canonicalize: finite-difference step on axis " << axis + 1 << " shrunk to " << h
       << " to stay inside the domain";
    diag::warn(os.str());
  }
  throw NumericalError("canonicalize: no finite-difference stencil fits inside the domain at " + format_point(x));
}

}  // namespace

CoefficientSystem canonicalize(const CoefficientSystem& sys) {
  if (sys.canonical()) return sys;
  const std::size_t k = sys.k();
  const int d = sys.dim();
  auto evaluator = [sys, k, d](std::span<const double> x) {
    const Coefficients c = sys.eval(x);
    const Matrix B = spd_inv_sqrt(c.E).matrix();
    std::vector<Matrix> dB;
    if (sys.inv_sqrt_gradient()) {
      dB = sys.inv_sqrt_gradient()(x);
      if (static_cast<int>(dB.size()) != d) throw ValidationError("analytic E^{-1/2} gradient has wrong length");
    } else {
      for (int j = 0; j < d; ++j) dB.push_back(fd_inv_sqrt_derivative(sys, x, j, B));
    }
    RawCoefficients out;
    out.E = Matrix::identity(k);
    out.V = B * c.V.matrix() * B;
    for (int j = 0; j < d; ++j) {
      const Matrix& A = c.A[j].matrix();
      out.A.push_back(B * A * B);
      // D_j B = -i d_j B;  V0 += 1/2 (B A (D_j B) - (D_j B) A B)
      Matrix DjB = dB[j];
      DjB *= Complex(0.0, -1.0);
      Matrix v0 = B * A * DjB - DjB * A * B;
      v0 *= 0.5;
      out.V += v0;
    }
    return out;
  };
  CoefficientSystem out("canonical(" + sys.label() + ")", SystemKind::canonical, sys.domain(), k, evaluator);
  out.set_canonical(true);
  return out;
}

namespace {

const char* kVoigt[6] = {"11", "22", "33", "12", "23", "31"};

double min_eig_symmetrised(const Matrix& m) {
  Matrix s = m + m.adjoint();
  s *= 0.5;
  return eig_herm(HermitianMatrix(std::move(s))).values.front();
}

}  // namespace

ValidationReport validate_system(const CoefficientSystem& sys, std::size_t sample_count) {
  ValidationReport rep;
  rep.min_eig_E = std::numeric_limits<double>::infinity();
  constexpr std::size_t kMaxMessages = 20;
  auto fail = [&](const std::string& msg) {
    rep.pass = false;
    if (rep.failures.size() < kMaxMessages && std::find(rep.failures.begin(), rep.failures.end(), msg) == rep.failures.end())
      rep.failures.push_back(msg);
  };
  const auto points = halton_points(sys.domain(), sample_count);
  for (const Point& p : points) {
    const std::span<const double> x(p.data(), sys.dim());
    ++rep.samples;
    RawCoefficients raw;
    try {
      raw = sys.eval_raw(x);
    } catch (const Error& e) {
      fail(std::string("evaluation failed at ") + format_point(x) + ": " + e.what());
      continue;
    }
    auto herm = [&](const Matrix& m, const std::string& name) {
      const double rel = m.hermiticity_defect() / std::max(m.frobenius_norm(), 1e-300);
      rep.worst_hermiticity_defect = std::max(rep.worst_hermiticity_defect, rel);
      if (rel > HermitianMatrix::kHermitianTolerance)
        fail(name + " is not Hermitian at " + format_point(x) + ": " + entry_label(m));
    };
    herm(raw.E, "E");
    for (std::size_t j = 0; j < raw.A.size(); ++j) herm(raw.A[j], "A^" + std::to_string(j + 1));
    herm(raw.V, "V");
    try {
      const double lam = min_eig_symmetrised(raw.E);
      rep.min_eig_E = std::min(rep.min_eig_E, lam);
      if (!(lam > 0.0)) fail("E is not positive definite at " + format_point(x));
    } catch (const Error& e) {
      fail(std::string("eigensolver failed on E at ") + format_point(x) + ": " + e.what());
    }
    if (sys.elastic_medium()) {
      const ElasticMedium med = sys.elastic_medium()(x);
      const Matrix& C = med.stiffness;
      const double scale = std::max(C.frobenius_norm(), 1e-300);
      for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = i + 1; j < 6; ++j)
          if (std::abs(C(i, j) - C(j, i)) > HermitianMatrix::kHermitianTolerance * scale) {
            std::ostringstream os;
            os << "stiffness asymmetry: c(" << kVoigt[i] << "," << kVoigt[j] << ") = " << C(i, j).real() << " but c("
               << kVoigt[j] << "," << kVoigt[i] << ") = " << C(j, i).real();
            fail(os.str());
          }
      const double lam = min_eig_symmetrised(C);
      rep.min_eig_stiffness = std::min(rep.min_eig_stiffness.value_or(lam), lam);
      if (!(lam > 0.0)) fail("stiffness is not positive definite at " + format_point(x));
      if (!(med.rho > 0.0)) fail("density is not positive at " + format_point(x));
    }
  }
  if (rep.samples == 0) {
    rep.min_eig_E = 0.0;
    fail("no interior sample points");
  }
  return rep;
}

}  // namespace velmat

#include "matkernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "errors.hpp"

namespace velmat {

namespace {

constexpr double kNormFloor = 1e-300;
constexpr double kJacobiTolerance = 1e-14;
constexpr int kMaxSweeps = 100;

void require_same_shape(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("matrix shape mismatch");
}

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

}  // namespace

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<Complex>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  Matrix m(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) throw std::invalid_argument("ragged matrix literal");
    std::size_t j = 0;
    for (const auto& v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

Matrix Matrix::adjoint() const {
  Matrix out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
  return out;
}

Matrix Matrix::transpose() const {
  Matrix out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
  return out;
}

Complex Matrix::trace() const {
  Complex t = 0.0;
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
  return t;
}

double Matrix::frobenius_norm() const {
  double s = 0.0;
  for (const auto& v : data_) s += std::norm(v);
  return std::sqrt(s);
}

double Matrix::hermiticity_defect() const {
  if (!square()) throw std::invalid_argument("hermiticity_defect on non-square matrix");
  double worst = 0.0;
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = i; j < cols_; ++j)
      worst = std::max(worst, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
  return worst;
}

bool Matrix::is_real(double tol) const {
  return std::all_of(data_.begin(), data_.end(), [tol](const Complex& v) { return std::abs(v.imag()) <= tol; });
}

std::vector<Complex> Matrix::apply(std::span<const Complex> v) const {
  if (v.size() != cols_) throw std::invalid_argument("matrix-vector size mismatch");
  std::vector<Complex> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    Complex acc = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) acc += (*this)(i, j) * v[j];
    out[i] = acc;
  }
  return out;
}

Matrix& Matrix::operator+=(const Matrix& o) {
  require_same_shape(*this, o);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
  require_same_shape(*this, o);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(Complex s) {
  for (auto& v : data_) v *= s;
  return *this;
}

std::string Matrix::to_string() const {
  std::ostringstream os;
  os.precision(17);
  os << '[';
  for (std::size_t i = 0; i < rows_; ++i) {
    os << (i ? ", [" : "[");
    for (std::size_t j = 0; j < cols_; ++j) {
      const Complex v = (*this)(i, j);
      if (j) os << ", ";
      os << v.real();
      if (v.imag() != 0.0) os << (v.imag() < 0 ? "-" : "+") << std::abs(v.imag()) << 'i';
    }
    os << ']';
  }
  os << ']';
  return os.str();
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Complex s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matrix product shape mismatch");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t m = 0; m < a.cols(); ++m) {
      const Complex aim = a(i, m);
      if (aim == Complex(0.0)) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aim * b(m, j);
    }
  return out;
}

HermitianMatrix::HermitianMatrix(Matrix m) {
  if (!m.square()) throw ValidationError("Hermitian matrix must be square");
  const std::size_t n = m.rows();
  const double scale = std::max(m.frobenius_norm(), kNormFloor);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double defect = std::abs(m(i, j) - std::conj(m(j, i)));
      if (defect > kHermitianTolerance * scale) {
        std::ostringstream os;
        os.precision(17);
        os << "matrix is not Hermitian: entry (" << i + 1 << ',' << j + 1 << ")=" << m(i, j) << " vs conj of ("
           << j + 1 << ',' << i + 1 << ")=" << m(j, i);
        throw ValidationError(os.str());
      }
      const Complex avg = 0.5 * (m(i, j) + std::conj(m(j, i)));
      m(i, j) = avg;
      m(j, i) = std::conj(avg);
    }
  m_ = std::move(m);
}

HermitianMatrix HermitianMatrix::zeros(std::size_t n) { return HermitianMatrix(Matrix(n, n)); }
HermitianMatrix HermitianMatrix::identity(std::size_t n) { return HermitianMatrix(Matrix::identity(n)); }

EigenDecomposition eig_herm(const HermitianMatrix& h) {
  const std::size_t n = h.dim();
  Matrix a = h.matrix();
  Matrix v = Matrix::identity(n);
  const double scale = std::max(a.frobenius_norm(), kNormFloor);
  const double target = kJacobiTolerance * scale;

  int sweep = 0;
  while (off_diagonal_norm(a) >= target) {
    if (++sweep > kMaxSweeps)
      throw NumericalError("eig_herm: Jacobi iteration did not converge after 100 sweeps for " + h.matrix().to_string());
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const Complex g = a(p, q);
        const double mag = std::abs(g);
        if (mag <= 1e-300) continue;
        // Phase d moves a(p,q) onto the positive real axis; then a real
        // rotation annihilates it.
        const Complex d = std::conj(g) / mag;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double tau = (aqq - app) / (2.0 * mag);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // U restricted to (p,q): [[c, s], [-s d, c d]]
        const Complex upp = c, upq = s, uqp = -s * d, uqq = c * d;
        for (std::size_t r = 0; r < n; ++r) {
          const Complex arp = a(r, p), arq = a(r, q);
          a(r, p) = arp * upp + arq * uqp;
          a(r, q) = arp * upq + arq * uqq;
          const Complex vrp = v(r, p), vrq = v(r, q);
          v(r, p) = vrp * upp + vrq * uqp;
          v(r, q) = vrp * upq + vrq * uqq;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const Complex apr = a(p, r), aqr = a(q, r);
          a(p, r) = std::conj(upp) * apr + std::conj(uqp) * aqr;
          a(q, r) = std::conj(upq) * apr + std::conj(uqq) * aqr;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });
  EigenDecomposition out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]).real();
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
  }
  return out;
}

SPDMatrix::SPDMatrix(HermitianMatrix h) : h_(std::move(h)), eig_(eig_herm(h_)) {
  if (!(eig_.values.front() > 0.0)) {
    std::ostringstream os;
    os.precision(17);
    os << "matrix is not positive definite (smallest eigenvalue " << eig_.values.front() << "): "
       << h_.matrix().to_string();
    throw ValidationError(os.str());
  }
}

namespace {

void require_nonsingular(const SPDMatrix& s) {
  const double scale = std::max(s.max_eigenvalue(), kNormFloor);
  if (s.min_eigenvalue() < kSingularThreshold * scale) {
    std::ostringstream os;
    os.precision(17);
    os << "numerically singular E: eigenvalue ratio " << s.min_eigenvalue() / scale << " below " << kSingularThreshold;
    throw NumericalError(os.str());
  }
}

}  // namespace

SPDMatrix spd_sqrt(const SPDMatrix& s) {
  require_nonsingular(s);
  return SPDMatrix(spectral_map(s.eigen(), [](double l) { return std::sqrt(l); }));
}

SPDMatrix spd_inv_sqrt(const SPDMatrix& s) {
  require_nonsingular(s);
  return SPDMatrix(spectral_map(s.eigen(), [](double l) { return 1.0 / std::sqrt(l); }));
}

SPDMatrix spd_inverse(const SPDMatrix& s) {
  require_nonsingular(s);
  return SPDMatrix(spectral_map(s.eigen(), [](double l) { return 1.0 / l; }));
}

double op_norm(const HermitianMatrix& h) {
  const auto e = eig_herm(h);
  return std::max(std::abs(e.values.front()), std::abs(e.values.back()));
}

double op_norm(const Matrix& a) {
  const auto e = eig_herm(HermitianMatrix(a.adjoint() * a));
  return std::sqrt(std::max(e.values.back(), 0.0));
}

}  // namespace velmat

#pragma once

// Small dense complex linear algebra. Everything here is sized for the
// pointwise algebra of coefficient matrices (k <= 16, d <= 3); nothing is
// blocked or vectorised.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace velmat {

using Complex = std::complex<double>;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);
  static Matrix from_rows(std::initializer_list<std::initializer_list<Complex>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  Complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const Complex> data() const noexcept { return data_; }
  std::span<Complex> data() noexcept { return data_; }

  Matrix adjoint() const;
  Matrix transpose() const;
  Complex trace() const;
  double frobenius_norm() const;
  /// max_ij |a_ij - conj(a_ji)|
  double hermiticity_defect() const;
  bool is_real(double tol = 0.0) const;

  std::vector<Complex> apply(std::span<const Complex> v) const;

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(Complex s);

  std::string to_string() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(Complex s, Matrix a);

/// Hermitian k x k matrix. Construction symmetrises the input and rejects
/// inputs whose Hermiticity defect exceeds 1e-13 relative to the Frobenius
/// norm.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(Matrix m);

  static HermitianMatrix zeros(std::size_t n);
  static HermitianMatrix identity(std::size_t n);

  std::size_t dim() const noexcept { return m_.rows(); }
  const Matrix& matrix() const noexcept { return m_; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return m_(r, c); }

  static constexpr double kHermitianTolerance = 1e-13;

 private:
  Matrix m_;
};

struct EigenDecomposition {
  std::vector<double> values;  // ascending
  Matrix vectors;              // orthonormal columns, vectors(:, i) <-> values[i]
};

/// Cyclic Jacobi. Converges when the off-diagonal Frobenius norm drops below
/// 1e-14 * ||H||_F; gives up after 100 sweeps with a NumericalError.
EigenDecomposition eig_herm(const HermitianMatrix& h);

/// Positive definite Hermitian matrix; caches its eigendecomposition.
class SPDMatrix {
 public:
  SPDMatrix() = default;
  explicit SPDMatrix(HermitianMatrix h);

  std::size_t dim() const noexcept { return h_.dim(); }
  const HermitianMatrix& hermitian() const noexcept { return h_; }
  const Matrix& matrix() const noexcept { return h_.matrix(); }
  const EigenDecomposition& eigen() const noexcept { return eig_; }
  double min_eigenvalue() const { return eig_.values.front(); }
  double max_eigenvalue() const { return eig_.values.back(); }

 private:
  HermitianMatrix h_;
  EigenDecomposition eig_;
};

/// Relative threshold under which the smallest eigenvalue counts as zero for
/// square roots and inverses.
inline constexpr double kSingularThreshold = 1e-14;

SPDMatrix spd_sqrt(const SPDMatrix& s);
SPDMatrix spd_inv_sqrt(const SPDMatrix& s);
SPDMatrix spd_inverse(const SPDMatrix& s);

/// Spectral norm of a Hermitian matrix, max |lambda_i|.
double op_norm(const HermitianMatrix& h);
/// Spectral norm of an arbitrary matrix, sqrt(lambda_max(A* A)).
double op_norm(const Matrix& a);

/// f(H) = V f(Lambda) V*, returned Hermitian.
template <class F>
HermitianMatrix spectral_map(const EigenDecomposition& e, F f) {
  const std::size_t n = e.values.size();
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      Complex acc = 0.0;
      for (std::size_t m = 0; m < n; ++m) acc += e.vectors(i, m) * f(e.values[m]) * std::conj(e.vectors(j, m));
      out(i, j) = acc;
    }
  }
  return HermitianMatrix(std::move(out));
}

}  // namespace velmat

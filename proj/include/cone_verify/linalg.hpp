#pragma once

// Small dense linear algebra for the n <= 8 problems this library handles.
// Everything is value-typed and row-major.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace cone_verify {

using Vector = std::vector<double>;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> entries);
  static Matrix from_columns(const std::vector<Vector>& columns);
  static Matrix from_rows(std::size_t rows, std::size_t cols,
                          std::span<const double> row_major);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  Vector column(std::size_t j) const;
  void set_column(std::size_t j, std::span<const double> values);
  std::vector<Vector> columns() const;
  Vector row(std::size_t i) const;

  Matrix transpose() const;
  /// Columns [first, first + count).
  Matrix column_block(std::size_t first, std::size_t count) const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, std::span<const double> v);

Vector operator+(const Vector& a, const Vector& b);
Vector operator-(const Vector& a, const Vector& b);
Vector operator*(double s, const Vector& a);

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
double max_abs(std::span<const double> a);
double frobenius_norm(const Matrix& a);
/// Largest singular value.
double spectral_norm(const Matrix& a);
Matrix outer(std::span<const double> a, std::span<const double> b);
Matrix symmetrize(const Matrix& a);
double trace(const Matrix& a);
bool all_finite(std::span<const double> a);

/// Eigen-decomposition of a symmetric matrix. Values ascend; column k of
/// `vectors` is the unit eigenvector of values[k].
struct SymmetricEigen {
  Vector values;
  Matrix vectors;
};

/// Cyclic Jacobi rotations. The input is symmetrized first.
SymmetricEigen symmetric_eigen(const Matrix& a);
double min_eigenvalue(const Matrix& symmetric);
double max_eigenvalue(const Matrix& symmetric);

/// Eigenvalues of a general real square matrix (balancing, Hessenberg
/// reduction, Francis double-shift QR).
std::vector<std::complex<double>> eigenvalues(const Matrix& a);

/// Partial-pivoting LU factorization.
class LU {
 public:
  explicit LU(const Matrix& a);
  bool singular() const { return singular_; }
  double determinant() const;
  Vector solve(std::span<const double> b) const;
  Matrix solve(const Matrix& b) const;
  Matrix inverse() const;
  /// Ratio of smallest to largest |pivot|; a cheap conditioning hint.
  double pivot_ratio() const;

 private:
  Matrix lu_;
  std::vector<std::size_t> perm_;
  int sign_ = 1;
  bool singular_ = false;
};

Matrix inverse(const Matrix& a);
double determinant(const Matrix& a);
Vector solve(const Matrix& a, std::span<const double> b);

/// Orthonormal basis of the column span (modified Gram-Schmidt, two passes).
/// Columns whose residual falls below rel_tol * scale are dropped.
Matrix orthonormalize_columns(const Matrix& a, double rel_tol = 1e-12);
/// Orthonormal basis of the orthogonal complement of the column span.
Matrix orthogonal_complement(const Matrix& a, double rel_tol = 1e-12);

/// Largest principal angle between span(a) and span(b), in radians.
/// Both must have the same column rank.
double max_principal_angle(const Matrix& a, const Matrix& b);
/// Smallest principal angle between two subspaces.
double min_principal_angle(const Matrix& a, const Matrix& b);

/// Singular values, descending.
Vector singular_values(const Matrix& a);

/// Principal square root of a matrix with spectrum in the open right half
/// plane (scaled Denman-Beavers iteration).
Matrix sqrt_positive(const Matrix& a);

}  // namespace cone_verify

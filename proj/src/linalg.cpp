#include "cone_verify/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cone_verify/errors.hpp"

namespace cone_verify {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionMismatch("ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> entries) {
  Matrix m(entries.size(), entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) m(i, i) = entries[i];
  return m;
}

Matrix Matrix::from_columns(const std::vector<Vector>& columns) {
  if (columns.empty()) return {};
  Matrix m(columns.front().size(), columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j].size() != m.rows())
      throw DimensionMismatch("columns of unequal length");
    m.set_column(j, columns[j]);
  }
  return m;
}

Matrix Matrix::from_rows(std::size_t rows, std::size_t cols,
                         std::span<const double> row_major) {
  if (row_major.size() != rows * cols)
    throw DimensionMismatch("row-major data does not match shape");
  Matrix m(rows, cols);
  std::copy(row_major.begin(), row_major.end(), m.data_.begin());
  return m;
}

Vector Matrix::column(std::size_t j) const {
  Vector c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

void Matrix::set_column(std::size_t j, std::span<const double> values) {
  if (values.size() != rows_) throw DimensionMismatch("set_column");
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = values[i];
}

std::vector<Vector> Matrix::columns() const {
  std::vector<Vector> out;
  out.reserve(cols_);
  for (std::size_t j = 0; j < cols_; ++j) out.push_back(column(j));
  return out;
}

Vector Matrix::row(std::size_t i) const {
  return Vector(data_.begin() + i * cols_, data_.begin() + (i + 1) * cols_);
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix Matrix::column_block(std::size_t first, std::size_t count) const {
  if (first + count > cols_) throw DimensionMismatch("column_block");
  Matrix b(rows_, count);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < count; ++j) b(i, j) = (*this)(i, first + j);
  return b;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw DimensionMismatch("matrix sum");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw DimensionMismatch("matrix difference");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& x : data_) x *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DimensionMismatch("matrix product");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Vector operator*(const Matrix& a, std::span<const double> v) {
  if (a.cols() != v.size()) throw DimensionMismatch("matrix-vector product");
  Vector out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * v[j];
    out[i] = s;
  }
  return out;
}

Vector operator+(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionMismatch("vector sum");
  Vector c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
  return c;
}

Vector operator-(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionMismatch("vector difference");
  Vector c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] - b[i];
  return c;
}

Vector operator*(double s, const Vector& a) {
  Vector c(a);
  for (double& x : c) x *= s;
  return c;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch("dot product");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) {
  double scale = max_abs(a);
  if (scale == 0.0) return 0.0;
  double s = 0.0;
  for (double x : a) s += (x / scale) * (x / scale);
  return scale * std::sqrt(s);
}

double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

double frobenius_norm(const Matrix& a) { return norm(a.data()); }

double spectral_norm(const Matrix& a) {
  if (a.empty()) return 0.0;
  return singular_values(a).front();
}

Matrix outer(std::span<const double> a, std::span<const double> b) {
  Matrix m(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = a[i] * b[j];
  return m;
}

Matrix symmetrize(const Matrix& a) {
  if (!a.is_square()) throw DimensionMismatch("symmetrize needs square input");
  Matrix s(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      s(i, j) = 0.5 * (a(i, j) + a(j, i));
  return s;
}

double trace(const Matrix& a) {
  double t = 0.0;
  for (std::size_t i = 0; i < std::min(a.rows(), a.cols()); ++i) t += a(i, i);
  return t;
}

bool all_finite(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(),
                     [](double x) { return std::isfinite(x); });
}

// ---------------------------------------------------------------------------
// Symmetric eigenproblem: cyclic Jacobi.

SymmetricEigen symmetric_eigen(const Matrix& input) {
  if (!input.is_square())
    throw DimensionMismatch("symmetric_eigen needs a square matrix");
  const std::size_t n = input.rows();
  Matrix a = symmetrize(input);
  Matrix v = Matrix::identity(n);

  const double scale = frobenius_norm(a);
  if (scale > 0.0) {
    for (int sweep = 0; sweep < 100; ++sweep) {
      double off = 0.0;
      for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
      if (std::sqrt(off) <= 1e-16 * scale) break;

      for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
          const double apq = a(p, q);
          if (apq == 0.0) continue;
          const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
          const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          const double c = 1.0 / std::sqrt(t * t + 1.0);
          const double s = t * c;
          for (std::size_t k = 0; k < n; ++k) {
            const double akp = a(k, p);
            const double akq = a(k, q);
            a(k, p) = c * akp - s * akq;
            a(k, q) = s * akp + c * akq;
          }
          for (std::size_t k = 0; k < n; ++k) {
            const double apk = a(p, k);
            const double aqk = a(q, k);
            a(p, k) = c * apk - s * aqk;
            a(q, k) = s * apk + c * aqk;
          }
          for (std::size_t k = 0; k < n; ++k) {
            const double vkp = v(k, p);
            const double vkq = v(k, q);
            v(k, p) = c * vkp - s * vkq;
            v(k, q) = s * vkp + c * vkq;
          }
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

  SymmetricEigen out{Vector(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    out.values[k] = a(src, src);
    // Sign convention: the first entry of largest magnitude is positive.
    std::size_t pivot = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(v(i, src)) > best + 1e-12) {
        best = std::abs(v(i, src));
        pivot = i;
      }
    }
    const double sign = v(pivot, src) < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = sign * v(i, src);
  }
  return out;
}

double min_eigenvalue(const Matrix& symmetric) {
  return symmetric_eigen(symmetric).values.front();
}

double max_eigenvalue(const Matrix& symmetric) {
  return symmetric_eigen(symmetric).values.back();
}

// ---------------------------------------------------------------------------
// General eigenvalues. Indices below are 1-based to follow the classical
// EISPACK formulation; row/column 0 of the work array is unused.

namespace {

using Work = std::vector<std::vector<double>>;

void balance(Work& a, int n) {
  constexpr double radix = 2.0;
  constexpr double sqrdx = radix * radix;
  bool done = false;
  while (!done) {
    done = true;
    for (int i = 1; i <= n; ++i) {
      double r = 0.0, c = 0.0;
      for (int j = 1; j <= n; ++j) {
        if (j != i) {
          c += std::abs(a[j][i]);
          r += std::abs(a[i][j]);
        }
      }
      if (c != 0.0 && r != 0.0) {
        double g = r / radix;
        double f = 1.0;
        const double s = c + r;
        while (c < g) {
          f *= radix;
          c *= sqrdx;
        }
        g = r * radix;
        while (c > g) {
          f /= radix;
          c /= sqrdx;
        }
        if ((c + r) / f < 0.95 * s) {
          done = false;
          g = 1.0 / f;
          for (int j = 1; j <= n; ++j) a[i][j] *= g;
          for (int j = 1; j <= n; ++j) a[j][i] *= f;
        }
      }
    }
  }
}

void reduce_to_hessenberg(Work& a, int n) {
  for (int m = 2; m < n; ++m) {
    double x = 0.0;
    int i = m;
    for (int j = m; j <= n; ++j) {
      if (std::abs(a[j][m - 1]) > std::abs(x)) {
        x = a[j][m - 1];
        i = j;
      }
    }
    if (i != m) {
      for (int j = m - 1; j <= n; ++j) std::swap(a[i][j], a[m][j]);
      for (int j = 1; j <= n; ++j) std::swap(a[j][i], a[j][m]);
    }
    if (x != 0.0) {
      for (i = m + 1; i <= n; ++i) {
        double y = a[i][m - 1];
        if (y != 0.0) {
          y /= x;
          a[i][m - 1] = y;
          for (int j = m; j <= n; ++j) a[i][j] -= y * a[m][j];
          for (int j = 1; j <= n; ++j) a[j][m] += y * a[j][i];
        }
      }
    }
  }
  for (int i = 3; i <= n; ++i)
    for (int j = 1; j < i - 1; ++j) a[i][j] = 0.0;
}

double sign_of(double a, double b) { return b >= 0.0 ? std::abs(a) : -std::abs(a); }

void hessenberg_qr(Work& a, int n, std::vector<double>& wr,
                   std::vector<double>& wi) {
  double anorm = 0.0;
  for (int i = 1; i <= n; ++i)
    for (int j = std::max(i - 1, 1); j <= n; ++j) anorm += std::abs(a[i][j]);

  int nn = n;
  double t = 0.0;
  double p = 0.0, q = 0.0, r = 0.0, s = 0.0, w = 0.0, x = 0.0, y = 0.0,
         z = 0.0;
  while (nn >= 1) {
    int its = 0;
    int l = 0;
    do {
      for (l = nn; l >= 2; --l) {
        s = std::abs(a[l - 1][l - 1]) + std::abs(a[l][l]);
        if (s == 0.0) s = anorm;
        if (std::abs(a[l][l - 1]) + s == s) {
          a[l][l - 1] = 0.0;
          break;
        }
      }
      x = a[nn][nn];
      if (l == nn) {
        wr[nn] = x + t;
        wi[nn--] = 0.0;
      } else {
        y = a[nn - 1][nn - 1];
        w = a[nn][nn - 1] * a[nn - 1][nn];
        if (l == nn - 1) {
          p = 0.5 * (y - x);
          q = p * p + w;
          z = std::sqrt(std::abs(q));
          x += t;
          if (q >= 0.0) {
            z = p + sign_of(z, p);
            wr[nn - 1] = wr[nn] = x + z;
            if (z != 0.0) wr[nn] = x - w / z;
            wi[nn - 1] = wi[nn] = 0.0;
          } else {
            wr[nn - 1] = wr[nn] = x + p;
            wi[nn] = z;
            wi[nn - 1] = -z;
          }
          nn -= 2;
        } else {
          if (its == 60)
            throw NoConvergence("Hessenberg QR did not converge", 0.0);
          if (its == 10 || its == 20 || its == 40) {
            t += x;
            for (int i = 1; i <= nn; ++i) a[i][i] -= x;
            s = std::abs(a[nn][nn - 1]) + std::abs(a[nn - 1][nn - 2]);
            y = x = 0.75 * s;
            w = -0.4375 * s * s;
          }
          ++its;
          int m = nn - 2;
          for (; m >= l; --m) {
            z = a[m][m];
            r = x - z;
            s = y - z;
            p = (r * s - w) / a[m + 1][m] + a[m][m + 1];
            q = a[m + 1][m + 1] - z - r - s;
            r = a[m + 2][m + 1];
            s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            const double u = std::abs(a[m][m - 1]) * (std::abs(q) + std::abs(r));
            const double v = std::abs(p) * (std::abs(a[m - 1][m - 1]) +
                                            std::abs(z) +
                                            std::abs(a[m + 1][m + 1]));
            if (u + v == v) break;
          }
          for (int i = m + 2; i <= nn; ++i) {
            a[i][i - 2] = 0.0;
            if (i != m + 2) a[i][i - 3] = 0.0;
          }
          for (int k = m; k <= nn - 1; ++k) {
            if (k != m) {
              p = a[k][k - 1];
              q = a[k + 1][k - 1];
              r = 0.0;
              if (k != nn - 1) r = a[k + 2][k - 1];
              if ((x = std::abs(p) + std::abs(q) + std::abs(r)) != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            if ((s = sign_of(std::sqrt(p * p + q * q + r * r), p)) != 0.0) {
              if (k == m) {
                if (l != m) a[k][k - 1] = -a[k][k - 1];
              } else {
                a[k][k - 1] = -s * x;
              }
              p += s;
              x = p / s;
              y = q / s;
              z = r / s;
              q /= p;
              r /= p;
              for (int j = k; j <= nn; ++j) {
                p = a[k][j] + q * a[k + 1][j];
                if (k != nn - 1) {
                  p += r * a[k + 2][j];
                  a[k + 2][j] -= p * z;
                }
                a[k + 1][j] -= p * y;
                a[k][j] -= p * x;
              }
              const int mmin = nn < k + 3 ? nn : k + 3;
              for (int i = l; i <= mmin; ++i) {
                p = x * a[i][k] + y * a[i][k + 1];
                if (k != nn - 1) {
                  p += z * a[i][k + 2];
                  a[i][k + 2] -= p * r;
                }
                a[i][k + 1] -= p * q;
                a[i][k] -= p;
              }
            }
          }
        }
      }
    } while (l < nn - 1);
  }
}

}  // namespace

std::vector<std::complex<double>> eigenvalues(const Matrix& m) {
  if (!m.is_square()) throw DimensionMismatch("eigenvalues needs a square matrix");
  const int n = static_cast<int>(m.rows());
  if (n == 0) return {};
  if (!all_finite(m.data())) throw NonFiniteState("eigenvalues of non-finite matrix");
  Work a(n + 1, std::vector<double>(n + 1, 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a[i + 1][j + 1] = m(i, j);
  balance(a, n);
  reduce_to_hessenberg(a, n);
  std::vector<double> wr(n + 1, 0.0), wi(n + 1, 0.0);
  hessenberg_qr(a, n, wr, wi);
  std::vector<std::complex<double>> out;
  out.reserve(n);
  for (int i = 1; i <= n; ++i) out.emplace_back(wr[i], wi[i]);
  std::sort(out.begin(), out.end(), [](auto lhs, auto rhs) {
    if (lhs.real() != rhs.real()) return lhs.real() < rhs.real();
    return lhs.imag() < rhs.imag();
  });
  return out;
}

// ---------------------------------------------------------------------------
// LU

LU::LU(const Matrix& a) : lu_(a), perm_(a.rows()) {
  if (!a.is_square()) throw DimensionMismatch("LU needs a square matrix");
  const std::size_t n = a.rows();
  std::iota(perm_.begin(), perm_.end(), 0);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(lu_(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(lu_(i, k)) > best) {
        best = std::abs(lu_(i, k));
        piv = i;
      }
    }
    if (best == 0.0) {
      singular_ = true;
      continue;
    }
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(piv, j));
      std::swap(perm_[k], perm_[piv]);
      sign_ = -sign_;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = lu_(i, k) / lu_(k, k);
      lu_(i, k) = f;
      for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= f * lu_(k, j);
    }
  }
}

double LU::determinant() const {
  double d = sign_;
  for (std::size_t i = 0; i < lu_.rows(); ++i) d *= lu_(i, i);
  return d;
}

double LU::pivot_ratio() const {
  double lo = INFINITY, hi = 0.0;
  for (std::size_t i = 0; i < lu_.rows(); ++i) {
    lo = std::min(lo, std::abs(lu_(i, i)));
    hi = std::max(hi, std::abs(lu_(i, i)));
  }
  return hi > 0.0 ? lo / hi : 0.0;
}

Vector LU::solve(std::span<const double> b) const {
  if (singular_) throw DimensionMismatch("solve with singular matrix");
  const std::size_t n = lu_.rows();
  if (b.size() != n) throw DimensionMismatch("LU solve");
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[perm_[i]];
    for (std::size_t j = 0; j < i; ++j) s -= lu_(i, j) * x[j];
    x[i] = s;
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = x[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= lu_(i, j) * x[j];
    x[i] = s / lu_(i, i);
  }
  return x;
}

Matrix LU::solve(const Matrix& b) const {
  Matrix x(b.rows(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) x.set_column(j, solve(b.column(j)));
  return x;
}

Matrix LU::inverse() const { return solve(Matrix::identity(lu_.rows())); }

Matrix inverse(const Matrix& a) { return LU(a).inverse(); }
double determinant(const Matrix& a) { return LU(a).determinant(); }
Vector solve(const Matrix& a, std::span<const double> b) { return LU(a).solve(b); }

// ---------------------------------------------------------------------------
// Orthonormal bases and subspace angles.

namespace {

// Removes from v its components along the orthonormal vectors in basis,
// twice, which is enough for full accuracy in floating point.
void project_out(Vector& v, const std::vector<Vector>& basis) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& q : basis) {
      const double c = dot(v, q);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * q[i];
    }
}

}  // namespace

Matrix orthonormalize_columns(const Matrix& a, double rel_tol) {
  std::vector<Vector> basis;
  const double scale = std::max(frobenius_norm(a), 1e-300);
  for (std::size_t j = 0; j < a.cols(); ++j) {
    Vector v = a.column(j);
    const double original = norm(v);
    project_out(v, basis);
    const double len = norm(v);
    if (len <= rel_tol * scale || len <= rel_tol * original) continue;
    for (double& x : v) x /= len;
    basis.push_back(std::move(v));
  }
  if (basis.empty()) return Matrix(a.rows(), 0);
  return Matrix::from_columns(basis);
}

Matrix orthogonal_complement(const Matrix& a, double rel_tol) {
  const std::size_t n = a.rows();
  Matrix q = a.cols() ? orthonormalize_columns(a, rel_tol) : Matrix(n, 0);
  std::vector<Vector> basis = q.columns();
  const std::size_t rank = basis.size();
  std::vector<Vector> complement;
  std::vector<bool> used(n, false);
  while (basis.size() < n) {
    // Pick the coordinate axis with the largest residual for stability.
    std::size_t best_axis = n;
    double best_len = -1.0;
    Vector best;
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      Vector e(n, 0.0);
      e[i] = 1.0;
      project_out(e, basis);
      const double len = norm(e);
      if (len > best_len) {
        best_len = len;
        best_axis = i;
        best = std::move(e);
      }
    }
    if (best_axis == n || best_len < 1e-8) break;
    used[best_axis] = true;
    for (double& x : best) x /= best_len;
    basis.push_back(best);
    complement.push_back(std::move(best));
  }
  if (complement.size() + rank != n)
    throw DimensionMismatch("orthogonal complement lost rank");
  if (complement.empty()) return Matrix(n, 0);
  return Matrix::from_columns(complement);
}

Vector singular_values(const Matrix& a) {
  const Matrix g = a.rows() >= a.cols() ? a.transpose() * a : a * a.transpose();
  SymmetricEigen e = symmetric_eigen(g);
  Vector s(e.values.rbegin(), e.values.rend());
  for (double& x : s) x = std::sqrt(std::max(x, 0.0));
  return s;
}

double max_principal_angle(const Matrix& a, const Matrix& b) {
  const Matrix qa = orthonormalize_columns(a);
  const Matrix qb = orthonormalize_columns(b);
  if (qa.cols() != qb.cols())
    throw DimensionMismatch("principal angle between subspaces of unequal rank");
  if (qa.cols() == 0) return 0.0;
  const Matrix c = qa.transpose() * qb;
  const Matrix residual = qb - qa * c;
  const double s = singular_values(residual).front();
  const double cmin = singular_values(c).back();
  return std::atan2(s, cmin);
}

double min_principal_angle(const Matrix& a, const Matrix& b) {
  Matrix qa = orthonormalize_columns(a);
  Matrix qb = orthonormalize_columns(b);
  if (qa.cols() == 0 || qb.cols() == 0) return M_PI / 2;
  if (qb.cols() > qa.cols()) std::swap(qa, qb);
  const Matrix c = qa.transpose() * qb;
  const Matrix residual = qb - qa * c;
  const double s = singular_values(residual).back();
  const double cmax = singular_values(c).front();
  return std::atan2(s, cmax);
}

// ---------------------------------------------------------------------------

Matrix sqrt_positive(const Matrix& a) {
  if (!a.is_square()) throw DimensionMismatch("sqrt_positive needs a square matrix");
  const std::size_t n = a.rows();
  Matrix y = a;
  Matrix z = Matrix::identity(n);
  bool scaling = true;
  for (int it = 0; it < 100; ++it) {
    const LU ly(y), lz(z);
    if (ly.singular() || lz.singular())
      throw NonPositiveSpectrum("square root iteration hit a singular iterate");
    double mu = 1.0;
    if (scaling) {
      const double d = std::abs(ly.determinant() * lz.determinant());
      mu = std::pow(d, -1.0 / (2.0 * static_cast<double>(n)));
      if (!std::isfinite(mu) || mu <= 0.0) mu = 1.0;
    }
    Matrix y_next = 0.5 * (mu * y + (1.0 / mu) * lz.inverse());
    Matrix z_next = 0.5 * (mu * z + (1.0 / mu) * ly.inverse());
    const double change = frobenius_norm(y_next - y);
    const double size = frobenius_norm(y_next);
    y = std::move(y_next);
    z = std::move(z_next);
    if (!all_finite(y.data()))
      throw NonPositiveSpectrum("square root iteration diverged");
    if (change <= 1e-3 * size) scaling = false;
    if (change <= 1e-15 * size) break;
  }
  return y;
}

}  // namespace cone_verify

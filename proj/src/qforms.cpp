#include "cone_verify/qforms.hpp"

#include <algorithm>
#include <cmath>

#include "cone_verify/errors.hpp"
#include "text_util.hpp"

namespace cone_verify {

namespace {

void check_symmetric(const Matrix& j) {
  if (!j.is_square()) throw DimensionMismatch("form matrix must be square");
  const double scale = std::max(1.0, max_abs(j.data()));
  for (std::size_t r = 0; r < j.rows(); ++r)
    for (std::size_t c = r + 1; c < j.cols(); ++c)
      if (std::abs(j(r, c) - j(c, r)) > 1e-12 * scale)
        throw PreconditionViolation("form matrix is not symmetric");
}

void check_dimension(std::size_t n, std::span<const double> v, const char* what) {
  if (v.size() != n)
    throw DimensionMismatch(std::string(what) + ": expected dimension " +
                            std::to_string(n) + ", got " + std::to_string(v.size()));
}

}  // namespace

std::string to_string(ConeClass c) {
  switch (c) {
    case ConeClass::Positive: return "Positive";
    case ConeClass::Negative: return "Negative";
    case ConeClass::Zero: return "Zero";
  }
  return "?";
}

std::size_t form_index(const Matrix& j) {
  check_symmetric(j);
  const auto eig = symmetric_eigen(j);
  double biggest = 0.0;
  for (double l : eig.values) biggest = std::max(biggest, std::abs(l));
  if (biggest == 0.0) throw NonDegeneracyViolation("form is identically zero");
  std::size_t negatives = 0;
  for (double l : eig.values) {
    if (std::abs(l) < kDegeneracyTolerance * biggest)
      throw NonDegeneracyViolation("form has a (numerically) zero eigenvalue");
    if (l < 0.0) ++negatives;
  }
  return negatives;
}

QuadraticFormField QuadraticFormField::constant(const Matrix& j) {
  const std::size_t q = form_index(j);
  if (q == 0 || q == j.rows())
    throw PreconditionViolation("form must be indefinite (0 < index < n)");
  QuadraticFormField f;
  f.dimension_ = j.rows();
  f.index_ = q;
  f.constant_ = symmetrize(j);
  f.description_ = "constant";
  return f;
}

QuadraticFormField QuadraticFormField::diagonal(std::span<const double> entries) {
  return constant(Matrix::diagonal(entries));
}

QuadraticFormField QuadraticFormField::varying(std::size_t dimension,
                                               std::size_t index, MatrixFn fn,
                                               std::string description) {
  if (index == 0 || index >= dimension)
    throw PreconditionViolation("form must be indefinite (0 < index < n)");
  if (!fn) throw PreconditionViolation("form function is empty");
  QuadraticFormField f;
  f.dimension_ = dimension;
  f.index_ = index;
  f.fn_ = std::move(fn);
  f.description_ = std::move(description);
  return f;
}

Matrix QuadraticFormField::matrix_at(std::span<const double> x) const {
  check_dimension(dimension_, x, "form point");
  if (constant_) return *constant_;
  Matrix j = fn_(x);
  if (j.rows() != dimension_) throw DimensionMismatch("form function returned wrong size");
  check_symmetric(j);
  return j;
}

QuadraticFormField QuadraticFormField::negated() const {
  QuadraticFormField f;
  f.dimension_ = dimension_;
  f.index_ = dimension_ - index_;
  f.description_ = "-(" + description_ + ")";
  if (constant_) {
    f.constant_ = -1.0 * *constant_;
  } else {
    f.fn_ = [inner = fn_](std::span<const double> x) { return -1.0 * inner(x); };
  }
  return f;
}

double evaluate(const Matrix& j, std::span<const double> v) {
  check_dimension(j.rows(), v, "form argument");
  return dot(j * v, v);
}

double evaluate(const QuadraticFormField& form, std::span<const double> x,
                std::span<const double> v) {
  check_dimension(form.dimension(), v, "form argument");
  return evaluate(form.matrix_at(x), v);
}

ConeClass cone_membership(const Matrix& j, std::span<const double> v, double tol) {
  if (tol < 0.0) throw PreconditionViolation("cone tolerance must be >= 0");
  const double value = evaluate(j, v);
  const double scale = tol * dot(v, v);
  if (value > scale) return ConeClass::Positive;
  if (value < -scale) return ConeClass::Negative;
  return ConeClass::Zero;
}

ConeClass cone_membership(const QuadraticFormField& form,
                          std::span<const double> x, std::span<const double> v,
                          double tol) {
  check_dimension(form.dimension(), v, "form argument");
  return cone_membership(form.matrix_at(x), v, tol);
}

LagrangeBasis lagrange_normalize(const Matrix& j) {
  const std::size_t q = form_index(j);
  const auto eig = symmetric_eigen(j);
  const std::size_t n = j.rows();
  LagrangeBasis out{Matrix(n, n), q, n - q};
  // Ascending eigenvalues already place the negative directions first.
  for (std::size_t k = 0; k < n; ++k) {
    const double s = 1.0 / std::sqrt(std::abs(eig.values[k]));
    for (std::size_t i = 0; i < n; ++i) out.basis(i, k) = s * eig.vectors(i, k);
  }
  return out;
}

LagrangeBasis lagrange_normalize(const QuadraticFormField& form,
                                 std::span<const double> x) {
  return lagrange_normalize(form.matrix_at(x));
}

Matrix pseudo_orthogonal_complement(const Matrix& j, const Matrix& subspace) {
  if (subspace.rows() != j.rows()) throw DimensionMismatch("subspace dimension");
  const std::size_t n = j.rows();
  if (subspace.cols() == 0) return Matrix::identity(n);
  const Matrix q = orthonormalize_columns(subspace);
  if (q.cols() != subspace.cols())
    throw DegenerateSubspace("spanning vectors are linearly dependent");
  const Matrix gram = q.transpose() * j * q;
  const auto eig = symmetric_eigen(gram);
  double smallest = INFINITY;
  for (double l : eig.values) smallest = std::min(smallest, std::abs(l));
  const double scale = std::max(1e-300, max_abs(symmetric_eigen(j).values));
  if (smallest < kDegeneracyTolerance * scale)
    throw DegenerateSubspace("subspace is J-degenerate; complement is not transverse");
  const Matrix complement = orthogonal_complement(j * q);
  if (complement.cols() + q.cols() != n)
    throw DegenerateSubspace("direct sum dimension check failed");
  return complement;
}

Matrix pseudo_orthogonal_complement(const QuadraticFormField& form,
                                    std::span<const double> x,
                                    const Matrix& subspace) {
  return pseudo_orthogonal_complement(form.matrix_at(x), subspace);
}

Matrix pseudo_gram_schmidt(const Matrix& j, const Matrix& basis, double tol) {
  if (basis.rows() != j.rows()) throw DimensionMismatch("basis dimension");
  std::vector<Vector> remaining = basis.columns();
  std::vector<Vector> accepted;
  std::vector<double> signs;

  auto orthogonalize = [&](Vector& w) {
    for (std::size_t k = 0; k < accepted.size(); ++k) {
      const double c = signs[k] * dot(j * w, accepted[k]);
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= c * accepted[k][i];
    }
  };
  auto is_null = [&](const Vector& w) {
    return std::abs(evaluate(j, w)) <= tol * dot(w, w);
  };

  const double input_scale = std::max(frobenius_norm(basis), 1e-300);
  while (!remaining.empty()) {
    for (auto& w : remaining) {
      orthogonalize(w);
      orthogonalize(w);
      if (norm(w) <= 1e-12 * input_scale)
        throw DegenerateSubspace("input vectors are not linearly independent");
    }
    std::size_t pick = remaining.size();
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      if (!is_null(remaining[i])) {
        pick = i;
        break;
      }
    }
    if (pick == remaining.size()) {
      // Every candidate is J-null; a sum or difference of two of them is not
      // unless the span itself is degenerate.
      for (std::size_t a = 0; a < remaining.size() && pick == remaining.size(); ++a) {
        for (std::size_t b = a + 1; b < remaining.size(); ++b) {
          Vector sum = remaining[a] + remaining[b];
          Vector diff = remaining[a] - remaining[b];
          if (!is_null(sum)) {
            remaining[a] = std::move(sum);
            pick = a;
            break;
          }
          if (!is_null(diff)) {
            remaining[a] = std::move(diff);
            pick = a;
            break;
          }
        }
      }
    }
    if (pick == remaining.size())
      throw DegenerateSubspace("no non-null pivot: span is J-degenerate");

    Vector u = std::move(remaining[pick]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
    const double value = evaluate(j, u);
    const double s = 1.0 / std::sqrt(std::abs(value));
    for (double& x : u) x *= s;
    accepted.push_back(std::move(u));
    signs.push_back(value < 0.0 ? -1.0 : 1.0);
  }
  return Matrix::from_columns(accepted);
}

Matrix pseudo_gram_schmidt(const QuadraticFormField& form,
                           std::span<const double> x, const Matrix& basis,
                           double tol) {
  return pseudo_gram_schmidt(form.matrix_at(x), basis, tol);
}

Matrix j_adjoint(const Matrix& j, const Matrix& l) {
  if (j.rows() != l.rows() || !l.is_square())
    throw DimensionMismatch("j_adjoint operand shapes");
  form_index(j);  // degeneracy check
  return LU(j).solve(l.transpose() * j);
}

Matrix j_adjoint(const QuadraticFormField& form, std::span<const double> x,
                 const Matrix& l) {
  return j_adjoint(form.matrix_at(x), l);
}

FormSpec parse_form_spec(const std::string& text) {
  const std::string_view s = detail::trim(text);
  if (s.rfind("diag:", 0) == 0) {
    const auto entries = detail::parse_number_list(s.substr(5));
    if (entries.empty()) throw ConfigError("diag form needs entries");
    auto f = QuadraticFormField::diagonal(entries);
    return f;
  }
  if (s.rfind("matrix:", 0) == 0) {
    const auto entries = detail::parse_number_list(s.substr(7));
    const auto n = static_cast<std::size_t>(std::llround(std::sqrt(entries.size())));
    if (n == 0 || n * n != entries.size())
      throw ConfigError("matrix form needs n*n row-major entries");
    return QuadraticFormField::constant(Matrix::from_rows(n, n, entries));
  }
  if (s == "adapted") return AdaptedFormRequest{};
  if (s.rfind("adapted:", 0) == 0) {
    const double q = detail::parse_double(s.substr(8));
    if (q < 1 || q != std::floor(q)) throw ConfigError("adapted index must be a positive integer");
    return AdaptedFormRequest{static_cast<std::size_t>(q)};
  }
  throw ConfigError("unrecognized form specification: '" + text + "'");
}

}  // namespace cone_verify

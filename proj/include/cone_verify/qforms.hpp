#pragma once

// Fields of non-degenerate indefinite quadratic forms and the
// pseudo-Euclidean linear algebra built on them.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>

#include "cone_verify/linalg.hpp"

namespace cone_verify {

/// Eigenvalues with |lambda| < kDegeneracyTolerance * max|lambda| count as zero.
inline constexpr double kDegeneracyTolerance = 1e-9;
/// Default relative tolerance for the Zero cone class.
inline constexpr double kConeTolerance = 1e-10;

enum class ConeClass { Positive, Negative, Zero };

std::string to_string(ConeClass c);

/// Number of negative eigenvalues of a symmetric matrix; throws
/// NonDegeneracyViolation if any eigenvalue is numerically zero.
std::size_t form_index(const Matrix& j);

/// A point-dependent symmetric bilinear form J_x with constant index q,
/// 0 < q < n. Immutable.
class QuadraticFormField {
 public:
  using MatrixFn = std::function<Matrix(std::span<const double>)>;

  static QuadraticFormField constant(const Matrix& j);
  static QuadraticFormField diagonal(std::span<const double> entries);
  /// A point-dependent form. `fn` must return symmetric matrices of the
  /// given index everywhere it is queried; symmetry is checked per query.
  static QuadraticFormField varying(std::size_t dimension, std::size_t index,
                                    MatrixFn fn, std::string description);

  std::size_t dimension() const { return dimension_; }
  std::size_t index() const { return index_; }
  std::size_t positive_dimension() const { return dimension_ - index_; }
  bool is_constant() const { return constant_.has_value(); }
  const std::string& description() const { return description_; }

  Matrix matrix_at(std::span<const double> x) const;

  /// The same field with every J_x negated (index becomes n - q).
  QuadraticFormField negated() const;

 private:
  QuadraticFormField() = default;

  std::size_t dimension_ = 0;
  std::size_t index_ = 0;
  std::optional<Matrix> constant_;
  MatrixFn fn_;
  std::string description_;
};

/// <J_x v, v>.
double evaluate(const QuadraticFormField& form, std::span<const double> x,
                std::span<const double> v);
double evaluate(const Matrix& j, std::span<const double> v);

ConeClass cone_membership(const QuadraticFormField& form,
                          std::span<const double> x, std::span<const double> v,
                          double tol = kConeTolerance);
ConeClass cone_membership(const Matrix& j, std::span<const double> v,
                          double tol = kConeTolerance);

/// Basis B with B^T J B = diag(-1,...,-1, +1,...,+1), negative directions
/// first.
struct LagrangeBasis {
  Matrix basis;
  std::size_t negative = 0;
  std::size_t positive = 0;
};

/// Works for any non-degenerate symmetric matrix, definite ones included.
LagrangeBasis lagrange_normalize(const Matrix& j);
LagrangeBasis lagrange_normalize(const QuadraticFormField& form,
                                 std::span<const double> x);

/// Basis (as columns) of {w : <J v, w> = 0 for all v in span(subspace)}.
Matrix pseudo_orthogonal_complement(const Matrix& j, const Matrix& subspace);
Matrix pseudo_orthogonal_complement(const QuadraticFormField& form,
                                    std::span<const double> x,
                                    const Matrix& subspace);

/// J-orthonormalizes the columns of `basis`: <J u_i, u_j> = +-delta_ij.
/// Null intermediate vectors are pivoted away.
Matrix pseudo_gram_schmidt(const Matrix& j, const Matrix& basis,
                           double tol = kConeTolerance);
Matrix pseudo_gram_schmidt(const QuadraticFormField& form,
                           std::span<const double> x, const Matrix& basis,
                           double tol = kConeTolerance);

/// L+ = J^-1 L^T J, the adjoint of L for the indefinite product.
Matrix j_adjoint(const Matrix& j, const Matrix& l);
Matrix j_adjoint(const QuadraticFormField& form, std::span<const double> x,
                 const Matrix& l);

/// Request for a form assembled from a computed splitting of index q.
struct AdaptedFormRequest {
  std::size_t index = 1;
};

using FormSpec = std::variant<QuadraticFormField, AdaptedFormRequest>;

/// Parses "diag:a,b,...", "matrix:[a,b,...]" (row-major, square) or
/// "adapted[:q]".
FormSpec parse_form_spec(const std::string& text);

}  // namespace cone_verify

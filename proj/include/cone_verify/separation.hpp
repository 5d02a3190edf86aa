#pragma once

// Pointwise separation and monotonicity criteria built from the operators
//   Jt = J DX + DX^T J                       (derivative of J along the cocycle)
//   Jh = DX^T Pi^T J Pi + Pi^T J Pi DX       (same, for the linear Poincare flow)
// where Pi is the J-orthogonal projection along the flow direction.

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>

#include <json.hpp>

#include "cone_verify/fields.hpp"
#include "cone_verify/linalg.hpp"
#include "cone_verify/qforms.hpp"

namespace cone_verify {

/// Strict requires a margin above kStrictTolerance * |Jt|.
inline constexpr double kStrictTolerance = 1e-8;
/// Jt - d J counts as semidefinite when its smallest eigenvalue is at least
/// -kSemidefiniteTolerance * max(|Jt|, |J|).
inline constexpr double kSemidefiniteTolerance = 1e-10;

struct SeparationOptions {
  /// Adds the finite-difference derivative of J along X for forms that vary
  /// with the point. Off by default: constant forms only.
  bool flow_derivative = false;
  double derivative_step = 1e-6;
};

/// Closed interval [lower, upper]; both NaN when empty.
struct DeltaInterval {
  double lower = std::numeric_limits<double>::quiet_NaN();
  double upper = std::numeric_limits<double>::quiet_NaN();

  bool empty() const { return std::isnan(lower) || std::isnan(upper); }
  double midpoint() const { return 0.5 * (lower + upper); }
  double width() const { return upper - lower; }
};

enum class SeparationVerdict { Strict, NonStrict, Fail };
std::string to_string(SeparationVerdict v);
SeparationVerdict separation_verdict_from_string(const std::string& s);

struct SeparationCertificate {
  Vector point;
  Matrix tilde;
  DeltaInterval interval;
  double chosen_delta = std::numeric_limits<double>::quiet_NaN();
  /// Smallest eigenvalue of Jt - chosen_delta J.
  double margin = std::numeric_limits<double>::quiet_NaN();
  SeparationVerdict verdict = SeparationVerdict::Fail;
  std::string note;

  /// {x, r_minus, r_plus, delta, margin, verdict}; NaN becomes null.
  nlohmann::json to_json() const;
  static SeparationCertificate from_json(const nlohmann::json& j);
};

Matrix tilde_j(const QuadraticFormField& form, const VectorFieldModel& field,
               std::span<const double> x, const SeparationOptions& options = {});
/// Constant-form version: J DX + DX^T J.
Matrix tilde_j(const Matrix& j, const Matrix& dx);

/// Largest closed interval of d with Jt - d J positive semidefinite.
DeltaInterval delta_interval(const Matrix& j, const Matrix& tilde);
DeltaInterval delta_interval(const QuadraticFormField& form, const Matrix& tilde,
                             std::span<const double> x);

SeparationCertificate check_separation(const Matrix& j, const Matrix& tilde,
                                       std::span<const double> x,
                                       std::optional<double> delta_hint = std::nullopt);
SeparationCertificate check_separation(const QuadraticFormField& form,
                                       const VectorFieldModel& field,
                                       std::span<const double> x,
                                       std::optional<double> delta_hint = std::nullopt,
                                       const SeparationOptions& options = {});

struct HatOperator {
  Matrix hat;
  /// n-1 J-orthonormal columns spanning the J-complement of X(x).
  Matrix normal_basis;
};

/// Requires X(x) != 0 (SingularPoint) and J(X(x)) > tol |X|^2
/// (FlowDirectionNotPositive).
HatOperator hat_j(const QuadraticFormField& form, const VectorFieldModel& field,
                  std::span<const double> x);

enum class MonotonicityVerdict { StrictlyMonotone, Monotone, Fail };
std::string to_string(MonotonicityVerdict v);

struct MonotonicityCertificate {
  Vector point;
  Matrix hat;
  Matrix normal_basis;
  /// Ascending eigenvalues of Jh restricted to the normal space.
  Vector restricted_spectrum;
  MonotonicityVerdict verdict = MonotonicityVerdict::Fail;
  double alpha1 = std::numeric_limits<double>::quiet_NaN();

  nlohmann::json to_json() const;
};

MonotonicityCertificate check_lpf_monotonicity(const QuadraticFormField& form,
                                               const VectorFieldModel& field,
                                               std::span<const double> x);

/// |(J(A_h v) - J(v))/h - <Jt v, v>| with A_h from one cocycle step of size h.
double derivative_residual(const QuadraticFormField& form,
                           const VectorFieldModel& field,
                           std::span<const double> x, std::span<const double> v,
                           double h, const SeparationOptions& options = {});

}  // namespace cone_verify

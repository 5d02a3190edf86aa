#pragma once

// Vector fields X with Jacobians DX: builtin catalog, expression-defined
// fields differentiated with dual numbers, and region descriptors.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cone_verify/expression.hpp"
#include "cone_verify/linalg.hpp"

namespace cone_verify {

/// Axis-aligned box, ball, or all of R^n.
class Region {
 public:
  enum class Kind { Unbounded, Box, Ball };

  static Region unbounded() { return Region(); }
  /// One (lo, hi) pair per coordinate.
  static Region box(std::vector<std::pair<double, double>> bounds);
  static Region ball(Vector center, double radius);

  Kind kind() const { return kind_; }
  /// 0 for an unbounded region.
  std::size_t dimension() const;
  bool contains(std::span<const double> x) const;

  const std::vector<std::pair<double, double>>& bounds() const { return bounds_; }
  const Vector& center() const { return center_; }
  double radius() const { return radius_; }

  /// {"box": [[lo,hi],...]} | {"ball": {"center": [...], "radius": r}} | {}
  nlohmann::json to_json() const;
  static Region from_json(const nlohmann::json& j);
  /// "box:lo1,hi1,lo2,hi2,..." | "ball:c1,...,cn,r" | JSON text.
  static Region parse(const std::string& text);

  bool operator==(const Region& other) const = default;

 private:
  Kind kind_ = Kind::Unbounded;
  std::vector<std::pair<double, double>> bounds_;
  Vector center_;
  double radius_ = 0.0;
};

/// Where a field came from; echoed into reports.
struct Provenance {
  enum class Kind { Builtin, Parsed, Derived };
  Kind kind = Kind::Builtin;
  std::string name;
  std::vector<double> params;
  ParameterMap named_params;
  std::vector<std::string> expressions;

  nlohmann::json to_json() const;
};

/// Immutable smooth vector field on R^n. Copies share the evaluators.
class VectorFieldModel {
 public:
  using ValueFn = std::function<Vector(std::span<const double>)>;
  using JacobianFn = std::function<Matrix(std::span<const double>)>;

  VectorFieldModel(std::size_t dimension, ValueFn value, JacobianFn jacobian,
                   Provenance provenance);

  std::size_t dimension() const { return dimension_; }
  Vector value(std::span<const double> x) const;
  Matrix jacobian(std::span<const double> x) const;

  const std::vector<Vector>& singularities() const { return singularities_; }
  const Region& region() const { return region_; }
  const Provenance& provenance() const { return provenance_; }

  /// Copies with a different region or singularity list. Listed
  /// singularities must satisfy |X(s)| <= 1e-10.
  VectorFieldModel with_region(Region region) const;
  VectorFieldModel with_singularities(std::vector<Vector> points) const;

  /// -X; its flow is the inverse flow.
  VectorFieldModel reversed() const;
  /// c X.
  VectorFieldModel scaled(double c) const;
  /// y -> P^-1 X(P y); the region becomes unbounded.
  VectorFieldModel conjugated(const Matrix& p) const;

 private:
  std::size_t dimension_;
  ValueFn value_;
  JacobianFn jacobian_;
  Provenance provenance_;
  std::vector<Vector> singularities_;
  Region region_;
};

struct BuiltinInfo {
  std::string name;
  std::string parameters;
  std::string summary;
};

const std::vector<BuiltinInfo>& builtin_catalog();

/// lorenz(sigma, rho, beta) [defaults 10, 28, 8/3]; linear_diag(l1..ln);
/// linear_dense(row-major n*n entries); saddle_suspension_constant() which
/// is X = (0, 1) on the plane.
VectorFieldModel builtin(const std::string& name, const std::vector<double>& params = {});
/// Named parameters: lorenz takes sigma/rho/beta, the others take p1, p2, ...
VectorFieldModel builtin(const std::string& name, const ParameterMap& params);

/// Component k of X is expressions[k] over x1..xn, n = expressions.size().
VectorFieldModel parse_field(const std::vector<std::string>& expressions,
                             const ParameterMap& params = {});

/// Column j is the dual-number derivative of the components along e_j.
Matrix jacobian_ad(std::span<const Expression> components, std::span<const double> x);
Matrix jacobian_ad(const VectorFieldModel& field, std::span<const double> x);

/// |(X(x+he) - X(x-he))/(2h) - DX(x)e|.
double finite_difference_residual(const VectorFieldModel& field,
                                  std::span<const double> x,
                                  std::span<const double> e, double h = 1e-5);

/// Field plus region from {"field": {...}, "region": {...}, "singularities": [...]}.
VectorFieldModel load_field_config(const nlohmann::json& config);

/// Boundary points of the region pushed one RK4 step of size dt; a point
/// that ends outside counts as outward. Advisory only.
struct TrappingCheck {
  std::size_t checked = 0;
  std::size_t outward = 0;
  bool ok() const { return outward == 0; }
};

TrappingCheck validate_trapping(const VectorFieldModel& field, std::size_t points,
                                double dt, std::uint64_t seed);

}  // namespace cone_verify

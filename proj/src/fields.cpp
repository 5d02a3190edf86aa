#include "cone_verify/fields.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

#include "cone_verify/errors.hpp"
#include "text_util.hpp"

namespace cone_verify {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Region

Region Region::box(std::vector<std::pair<double, double>> bounds) {
  if (bounds.empty()) throw ConfigError("box region needs at least one interval");
  for (const auto& [lo, hi] : bounds)
    if (!(lo < hi)) throw ConfigError("box interval must satisfy lo < hi");
  Region r;
  r.kind_ = Kind::Box;
  r.bounds_ = std::move(bounds);
  return r;
}

Region Region::ball(Vector center, double radius) {
  if (center.empty()) throw ConfigError("ball region needs a center");
  if (!(radius > 0.0)) throw ConfigError("ball radius must be positive");
  Region r;
  r.kind_ = Kind::Ball;
  r.center_ = std::move(center);
  r.radius_ = radius;
  return r;
}

std::size_t Region::dimension() const {
  switch (kind_) {
    case Kind::Box: return bounds_.size();
    case Kind::Ball: return center_.size();
    case Kind::Unbounded: return 0;
  }
  return 0;
}

bool Region::contains(std::span<const double> x) const {
  switch (kind_) {
    case Kind::Unbounded: return true;
    case Kind::Box:
      if (x.size() != bounds_.size()) throw DimensionMismatch("region point dimension");
      for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] < bounds_[i].first || x[i] > bounds_[i].second) return false;
      return true;
    case Kind::Ball: {
      if (x.size() != center_.size()) throw DimensionMismatch("region point dimension");
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - center_[i]) * (x[i] - center_[i]);
      return s <= radius_ * radius_;
    }
  }
  return false;
}

json Region::to_json() const {
  switch (kind_) {
    case Kind::Unbounded: return json::object();
    case Kind::Box: {
      json b = json::array();
      for (const auto& [lo, hi] : bounds_) b.push_back({lo, hi});
      return json{{"box", b}};
    }
    case Kind::Ball:
      return json{{"ball", {{"center", center_}, {"radius", radius_}}}};
  }
  return json::object();
}

Region Region::from_json(const json& j) {
  if (j.is_null() || (j.is_object() && j.empty())) return unbounded();
  if (!j.is_object()) throw ConfigError("region must be a JSON object");
  if (j.contains("box")) {
    std::vector<std::pair<double, double>> bounds;
    for (const auto& pair : j.at("box")) {
      if (!pair.is_array() || pair.size() != 2) throw ConfigError("box entries must be [lo, hi]");
      bounds.emplace_back(pair[0].get<double>(), pair[1].get<double>());
    }
    return box(std::move(bounds));
  }
  if (j.contains("ball")) {
    const auto& b = j.at("ball");
    return ball(b.at("center").get<Vector>(), b.at("radius").get<double>());
  }
  throw ConfigError("region needs a 'box' or 'ball' entry");
}

Region Region::parse(const std::string& text) {
  const std::string_view s = detail::trim(text);
  if (s.rfind("box:", 0) == 0) {
    const auto v = detail::parse_number_list(s.substr(4));
    if (v.empty() || v.size() % 2 != 0) throw ConfigError("box needs lo,hi pairs");
    std::vector<std::pair<double, double>> bounds;
    for (std::size_t i = 0; i < v.size(); i += 2) bounds.emplace_back(v[i], v[i + 1]);
    return box(std::move(bounds));
  }
  if (s.rfind("ball:", 0) == 0) {
    auto v = detail::parse_number_list(s.substr(5));
    if (v.size() < 2) throw ConfigError("ball needs center coordinates and a radius");
    const double r = v.back();
    v.pop_back();
    return ball(std::move(v), r);
  }
  try {
    return from_json(json::parse(s));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("unreadable region: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Provenance and model

json Provenance::to_json() const {
  json j;
  switch (kind) {
    case Kind::Builtin: j["kind"] = "builtin"; break;
    case Kind::Parsed: j["kind"] = "parsed"; break;
    case Kind::Derived: j["kind"] = "derived"; break;
  }
  j["name"] = name;
  if (!params.empty()) j["params"] = params;
  if (!named_params.empty()) j["named_params"] = named_params;
  if (!expressions.empty()) j["expressions"] = expressions;
  return j;
}

VectorFieldModel::VectorFieldModel(std::size_t dimension, ValueFn value,
                                   JacobianFn jacobian, Provenance provenance)
    : dimension_(dimension),
      value_(std::move(value)),
      jacobian_(std::move(jacobian)),
      provenance_(std::move(provenance)) {
  if (dimension_ == 0) throw DimensionMismatch("vector field dimension must be positive");
  if (!value_ || !jacobian_) throw PreconditionViolation("vector field evaluators are empty");
}

Vector VectorFieldModel::value(std::span<const double> x) const {
  if (x.size() != dimension_) throw DimensionMismatch("field point dimension");
  Vector v = value_(x);
  if (v.size() != dimension_) throw DimensionMismatch("field returned wrong dimension");
  return v;
}

Matrix VectorFieldModel::jacobian(std::span<const double> x) const {
  if (x.size() != dimension_) throw DimensionMismatch("field point dimension");
  Matrix d = jacobian_(x);
  if (d.rows() != dimension_ || d.cols() != dimension_)
    throw DimensionMismatch("field Jacobian has wrong shape");
  return d;
}

VectorFieldModel VectorFieldModel::with_region(Region region) const {
  if (region.kind() != Region::Kind::Unbounded && region.dimension() != dimension_)
    throw DimensionMismatch("region dimension differs from field dimension");
  VectorFieldModel copy = *this;
  copy.region_ = std::move(region);
  return copy;
}

VectorFieldModel VectorFieldModel::with_singularities(std::vector<Vector> points) const {
  for (const auto& p : points) {
    if (p.size() != dimension_) throw DimensionMismatch("singularity dimension");
    if (norm(value(p)) > 1e-10)
      throw PreconditionViolation("listed singularity is not a zero of the field");
  }
  VectorFieldModel copy = *this;
  copy.singularities_ = std::move(points);
  return copy;
}

VectorFieldModel VectorFieldModel::reversed() const { return scaled(-1.0); }

VectorFieldModel VectorFieldModel::scaled(double c) const {
  VectorFieldModel copy = *this;
  copy.value_ = [inner = value_, c](std::span<const double> x) { return c * inner(x); };
  copy.jacobian_ = [inner = jacobian_, c](std::span<const double> x) { return c * inner(x); };
  copy.provenance_.kind = Provenance::Kind::Derived;
  copy.provenance_.name = (c == -1.0 ? "reversed(" : "scaled(") + provenance_.name + ")";
  return copy;
}

VectorFieldModel VectorFieldModel::conjugated(const Matrix& p) const {
  if (p.rows() != dimension_ || !p.is_square()) throw DimensionMismatch("conjugating matrix shape");
  const LU lu(p);
  if (lu.singular()) throw PreconditionViolation("conjugating matrix is singular");
  const Matrix p_inv = lu.inverse();
  VectorFieldModel copy = *this;
  copy.value_ = [inner = value_, p, p_inv](std::span<const double> y) {
    return p_inv * inner(p * y);
  };
  copy.jacobian_ = [inner = jacobian_, p, p_inv](std::span<const double> y) {
    return p_inv * inner(p * y) * p;
  };
  copy.singularities_.clear();
  for (const auto& s : singularities_) copy.singularities_.push_back(p_inv * s);
  copy.region_ = Region::unbounded();
  copy.provenance_.kind = Provenance::Kind::Derived;
  copy.provenance_.name = "conjugated(" + provenance_.name + ")";
  return copy;
}

// ---------------------------------------------------------------------------
// Builtins

const std::vector<BuiltinInfo>& builtin_catalog() {
  static const std::vector<BuiltinInfo> catalog = {
      {"lorenz", "sigma,rho,beta (default 10,28,8/3)",
       "classical Lorenz equations; singularities at the origin and the two wing equilibria"},
      {"linear_diag", "l1,...,ln", "X(x) = diag(l1..ln) x; singularity at the origin"},
      {"linear_dense", "a11,a12,...,ann (row-major)", "X(x) = A x"},
      {"saddle_suspension_constant", "(none)", "constant field X = (0,1); DX = 0"},
  };
  return catalog;
}

namespace {

VectorFieldModel linear_field(const Matrix& a, Provenance provenance) {
  const std::size_t n = a.rows();
  return VectorFieldModel(
      n, [a](std::span<const double> x) { return a * x; },
      [a](std::span<const double>) { return a; }, std::move(provenance));
}

VectorFieldModel lorenz(double sigma, double rho, double beta, Provenance provenance) {
  auto value = [=](std::span<const double> x) {
    return Vector{sigma * (x[1] - x[0]), x[0] * (rho - x[2]) - x[1], x[0] * x[1] - beta * x[2]};
  };
  auto jacobian = [=](std::span<const double> x) {
    return Matrix{{-sigma, sigma, 0.0}, {rho - x[2], -1.0, -x[0]}, {x[1], x[0], -beta}};
  };
  VectorFieldModel field(3, value, jacobian, std::move(provenance));
  std::vector<Vector> sing = {Vector{0.0, 0.0, 0.0}};
  if (rho > 1.0 && beta > 0.0) {
    const double c = std::sqrt(beta * (rho - 1.0));
    sing.push_back({c, c, rho - 1.0});
    sing.push_back({-c, -c, rho - 1.0});
  }
  return field.with_singularities(std::move(sing));
}

}  // namespace

VectorFieldModel builtin(const std::string& name, const std::vector<double>& params) {
  Provenance prov{Provenance::Kind::Builtin, name, params, {}, {}};
  if (name == "lorenz") {
    if (params.empty()) {
      prov.params = {10.0, 28.0, 8.0 / 3.0};
      return lorenz(10.0, 28.0, 8.0 / 3.0, prov);
    }
    if (params.size() != 3) throw ConfigError("lorenz takes 3 parameters (sigma, rho, beta)");
    return lorenz(params[0], params[1], params[2], prov);
  }
  if (name == "linear_diag") {
    if (params.empty()) throw ConfigError("linear_diag needs at least one eigenvalue");
    const std::size_t n = params.size();
    return linear_field(Matrix::diagonal(params), prov)
        .with_singularities({Vector(n, 0.0)});
  }
  if (name == "linear_dense") {
    const auto n = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(params.size()))));
    if (n == 0 || n * n != params.size())
      throw ConfigError("linear_dense needs n*n row-major entries");
    const Matrix a = Matrix::from_rows(n, n, params);
    auto field = linear_field(a, prov);
    if (!LU(a).singular()) field = field.with_singularities({Vector(n, 0.0)});
    return field;
  }
  if (name == "saddle_suspension_constant") {
    if (!params.empty()) throw ConfigError("saddle_suspension_constant takes no parameters");
    return VectorFieldModel(
        2, [](std::span<const double>) { return Vector{0.0, 1.0}; },
        [](std::span<const double>) { return Matrix(2, 2); }, prov);
  }
  throw UnknownField("unknown builtin field '" + name + "'");
}

VectorFieldModel builtin(const std::string& name, const ParameterMap& params) {
  if (name == "lorenz") {
    for (const auto& [key, value] : params)
      if (key != "sigma" && key != "rho" && key != "beta")
        throw ConfigError("lorenz has no parameter '" + key + "'");
    auto get = [&](const char* key, double fallback) {
      auto it = params.find(key);
      return it == params.end() ? fallback : it->second;
    };
    return builtin(name, std::vector<double>{get("sigma", 10.0), get("rho", 28.0), get("beta", 8.0 / 3.0)});
  }
  std::vector<double> ordered;
  for (std::size_t k = 1; k <= params.size(); ++k) {
    auto it = params.find("p" + std::to_string(k));
    if (it == params.end()) throw ConfigError(name + " expects parameters named p1, p2, ...");
    ordered.push_back(it->second);
  }
  return builtin(name, ordered);
}

// ---------------------------------------------------------------------------
// Expression fields

Matrix jacobian_ad(std::span<const Expression> components, std::span<const double> x) {
  const std::size_t n = components.size();
  if (x.size() != n) throw DimensionMismatch("jacobian point dimension");
  Matrix d(n, n);
  std::vector<Dual> seed(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) seed[i] = Dual{x[i], i == j ? 1.0 : 0.0};
    for (std::size_t i = 0; i < n; ++i) d(i, j) = components[i].evaluate(std::span<const Dual>(seed)).derivative;
  }
  return d;
}

Matrix jacobian_ad(const VectorFieldModel& field, std::span<const double> x) {
  return field.jacobian(x);
}

VectorFieldModel parse_field(const std::vector<std::string>& expressions,
                             const ParameterMap& params) {
  const std::size_t n = expressions.size();
  if (n == 0) throw ConfigError("a parsed field needs at least one component");
  auto parsed = std::make_shared<std::vector<Expression>>();
  for (const auto& text : expressions) parsed->push_back(Expression::parse(text, n, params));
  auto value = [parsed](std::span<const double> x) {
    Vector v(parsed->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = (*parsed)[i].evaluate(x);
    return v;
  };
  auto jacobian = [parsed](std::span<const double> x) {
    return jacobian_ad(std::span<const Expression>(*parsed), x);
  };
  Provenance prov{Provenance::Kind::Parsed, "expr", {}, params, expressions};
  return VectorFieldModel(n, value, jacobian, std::move(prov));
}

double finite_difference_residual(const VectorFieldModel& field,
                                  std::span<const double> x,
                                  std::span<const double> e, double h) {
  if (!(h > 0.0)) throw PreconditionViolation("finite difference step must be positive");
  Vector plus(x.begin(), x.end()), minus(x.begin(), x.end());
  for (std::size_t i = 0; i < plus.size(); ++i) {
    plus[i] += h * e[i];
    minus[i] -= h * e[i];
  }
  const Vector fd = (1.0 / (2.0 * h)) * (field.value(plus) - field.value(minus));
  return norm(fd - field.jacobian(x) * e);
}

// ---------------------------------------------------------------------------
// Config

namespace {

ParameterMap read_named_params(const json& j) {
  ParameterMap out;
  for (const auto& [key, value] : j.items()) out[key] = value.get<double>();
  return out;
}

}  // namespace

VectorFieldModel load_field_config(const json& config) {
  try {
    if (!config.contains("field")) throw ConfigError("config has no 'field' entry");
    const json& f = config.at("field");
    std::optional<VectorFieldModel> field;
    if (f.contains("builtin")) {
      const std::string name = f.at("builtin").get<std::string>();
      if (!f.contains("params")) {
        field = builtin(name, std::vector<double>{});
      } else if (f.at("params").is_array()) {
        field = builtin(name, f.at("params").get<std::vector<double>>());
      } else {
        field = builtin(name, read_named_params(f.at("params")));
      }
    } else if (f.contains("expr")) {
      ParameterMap params;
      if (f.contains("params")) params = read_named_params(f.at("params"));
      field = parse_field(f.at("expr").get<std::vector<std::string>>(), params);
    } else {
      throw ConfigError("field needs a 'builtin' or 'expr' entry");
    }
    if (config.contains("region")) field = field->with_region(Region::from_json(config.at("region")));
    if (config.contains("singularities"))
      field = field->with_singularities(config.at("singularities").get<std::vector<Vector>>());
    return *field;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed field config: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

TrappingCheck validate_trapping(const VectorFieldModel& field, std::size_t points,
                                double dt, std::uint64_t seed) {
  TrappingCheck check;
  const Region& region = field.region();
  if (region.kind() == Region::Kind::Unbounded) return check;
  const std::size_t n = field.dimension();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  auto rk4_step = [&](const Vector& x) {
    const Vector k1 = field.value(x);
    const Vector k2 = field.value(x + (dt / 2) * k1);
    const Vector k3 = field.value(x + (dt / 2) * k2);
    const Vector k4 = field.value(x + dt * k3);
    return x + (dt / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };

  for (std::size_t k = 0; k < points; ++k) {
    Vector x(n);
    if (region.kind() == Region::Kind::Box) {
      const auto& b = region.bounds();
      for (std::size_t i = 0; i < n; ++i) x[i] = b[i].first + unit(rng) * (b[i].second - b[i].first);
      // Pin one coordinate to a face, pulled in slightly so the start is inside.
      const std::size_t axis = k % n;
      const double width = b[axis].second - b[axis].first;
      x[axis] = (k / n) % 2 == 0 ? b[axis].first + 1e-9 * width : b[axis].second - 1e-9 * width;
    } else {
      Vector g(n);
      for (double& gi : g) gi = gauss(rng);
      const double len = std::max(norm(g), 1e-300);
      for (std::size_t i = 0; i < n; ++i)
        x[i] = region.center()[i] + (1.0 - 1e-9) * region.radius() * g[i] / len;
    }
    ++check.checked;
    if (!region.contains(rk4_step(x))) ++check.outward;
  }
  return check;
}

}  // namespace cone_verify

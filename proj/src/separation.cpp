#include "cone_verify/separation.hpp"

#include <algorithm>
#include <cmath>

#include "cone_verify/cocycle.hpp"
#include "cone_verify/errors.hpp"

namespace cone_verify {

using nlohmann::json;

namespace {

double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double number_from(const json& j) { return j.is_null() ? nan_value() : j.get<double>(); }

// Semidefinite slack used for interval membership.
double psd_tolerance(const Matrix& j, const Matrix& tilde) {
  return kSemidefiniteTolerance * std::max(spectral_norm(tilde), spectral_norm(j));
}

double margin_at(const Matrix& j, const Matrix& tilde, double delta) {
  return min_eigenvalue(tilde - delta * j);
}

struct IntervalSearch {
  DeltaInterval interval;
  double best_delta = 0.0;
  double best_margin = 0.0;
};

// f(d) = min eig(Jt - d J) is concave in d: golden-section search for its
// maximum, then bisection on each side for the level -tol.
IntervalSearch search_interval(const Matrix& j, const Matrix& tilde) {
  if (!j.is_square() || tilde.rows() != j.rows() || !tilde.is_square())
    throw DimensionMismatch("form and operator shapes differ");
  const auto eig = symmetric_eigen(j);
  double smallest_abs = INFINITY;
  for (double l : eig.values) smallest_abs = std::min(smallest_abs, std::abs(l));
  if (!(smallest_abs > 0.0)) throw NonDegeneracyViolation("form is degenerate");
  const double bound = (spectral_norm(tilde) + 1.0) / smallest_abs;
  const double tol = psd_tolerance(j, tilde);
  auto f = [&](double d) { return margin_at(j, tilde, d); };

  constexpr double kGolden = 0.6180339887498949;
  double a = -bound, b = bound;
  double c = b - kGolden * (b - a), d = a + kGolden * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && (b - a) > 1e-14 * bound; ++it) {
    if (fc < fd) {
      a = c;
      c = d;
      fc = fd;
      d = a + kGolden * (b - a);
      fd = f(d);
    } else {
      b = d;
      d = c;
      fd = fc;
      c = b - kGolden * (b - a);
      fc = f(c);
    }
  }
  IntervalSearch out;
  out.best_delta = fc > fd ? c : d;
  out.best_margin = std::max(fc, fd);
  if (out.best_margin < -tol) return out;

  auto bisect = [&](double outside, double inside) {
    for (int it = 0; it < 200 && std::abs(inside - outside) > 1e-15 * bound; ++it) {
      const double mid = 0.5 * (outside + inside);
      if (f(mid) >= -tol) {
        inside = mid;
      } else {
        outside = mid;
      }
    }
    return 0.5 * (outside + inside);
  };
  out.interval.lower = bisect(-bound, out.best_delta);
  out.interval.upper = bisect(bound, out.best_delta);
  return out;
}

void check_point(std::size_t n, std::span<const double> x) {
  if (x.size() != n) throw DimensionMismatch("point dimension differs from form dimension");
}

}  // namespace

std::string to_string(SeparationVerdict v) {
  switch (v) {
    case SeparationVerdict::Strict: return "Strict";
    case SeparationVerdict::NonStrict: return "NonStrict";
    case SeparationVerdict::Fail: return "Fail";
  }
  return "?";
}

SeparationVerdict separation_verdict_from_string(const std::string& s) {
  if (s == "Strict") return SeparationVerdict::Strict;
  if (s == "NonStrict") return SeparationVerdict::NonStrict;
  if (s == "Fail") return SeparationVerdict::Fail;
  throw ConfigError("unknown separation verdict '" + s + "'");
}

std::string to_string(MonotonicityVerdict v) {
  switch (v) {
    case MonotonicityVerdict::StrictlyMonotone: return "StrictlyMonotone";
    case MonotonicityVerdict::Monotone: return "Monotone";
    case MonotonicityVerdict::Fail: return "Fail";
  }
  return "?";
}

json SeparationCertificate::to_json() const {
  json j{{"x", point},
         {"r_minus", number_or_null(interval.lower)},
         {"r_plus", number_or_null(interval.upper)},
         {"delta", number_or_null(chosen_delta)},
         {"margin", number_or_null(margin)},
         {"verdict", to_string(verdict)}};
  if (!note.empty()) j["note"] = note;
  return j;
}

SeparationCertificate SeparationCertificate::from_json(const json& j) {
  SeparationCertificate c;
  c.point = j.at("x").get<Vector>();
  c.interval.lower = number_from(j.at("r_minus"));
  c.interval.upper = number_from(j.at("r_plus"));
  c.chosen_delta = number_from(j.at("delta"));
  c.margin = number_from(j.at("margin"));
  c.verdict = separation_verdict_from_string(j.at("verdict").get<std::string>());
  if (j.contains("note")) c.note = j.at("note").get<std::string>();
  return c;
}

Matrix tilde_j(const Matrix& j, const Matrix& dx) {
  if (j.rows() != dx.rows() || !dx.is_square() || !j.is_square())
    throw DimensionMismatch("form and Jacobian shapes differ");
  return symmetrize(j * dx + dx.transpose() * j);
}

Matrix tilde_j(const QuadraticFormField& form, const VectorFieldModel& field,
               std::span<const double> x, const SeparationOptions& options) {
  if (form.dimension() != field.dimension())
    throw DimensionMismatch("form and field dimensions differ");
  check_point(form.dimension(), x);
  if (!form.is_constant() && !options.flow_derivative)
    throw PreconditionViolation(
        "form varies with the point; enable the flow-derivative mode to use it");
  const Matrix j = form.matrix_at(x);
  Matrix result = tilde_j(j, field.jacobian(x));
  if (!form.is_constant()) {
    const Vector v = field.value(x);
    const double speed = norm(v);
    if (speed > 0.0) {
      const double h = options.derivative_step * (1.0 + norm(x)) / speed;
      Vector forward(x.begin(), x.end()), backward(x.begin(), x.end());
      for (std::size_t i = 0; i < v.size(); ++i) {
        forward[i] += h * v[i];
        backward[i] -= h * v[i];
      }
      result += (1.0 / (2.0 * h)) * (form.matrix_at(forward) - form.matrix_at(backward));
      result = symmetrize(result);
    }
  }
  return result;
}

DeltaInterval delta_interval(const Matrix& j, const Matrix& tilde) {
  return search_interval(j, tilde).interval;
}

DeltaInterval delta_interval(const QuadraticFormField& form, const Matrix& tilde,
                             std::span<const double> x) {
  check_point(form.dimension(), x);
  return delta_interval(form.matrix_at(x), tilde);
}

SeparationCertificate check_separation(const Matrix& j, const Matrix& tilde,
                                       std::span<const double> x,
                                       std::optional<double> delta_hint) {
  SeparationCertificate cert;
  cert.point.assign(x.begin(), x.end());
  cert.tilde = tilde;
  const IntervalSearch search = search_interval(j, tilde);
  cert.interval = search.interval;
  if (cert.interval.empty()) {
    cert.verdict = SeparationVerdict::Fail;
    cert.chosen_delta = search.best_delta;
    cert.margin = search.best_margin;
    cert.note = "no admissible delta";
    return cert;
  }
  const double tol = psd_tolerance(j, tilde);
  const double mid = cert.interval.midpoint();
  const double mid_margin = margin_at(j, tilde, mid);
  cert.chosen_delta = mid;
  cert.margin = mid_margin;
  if (delta_hint && std::isfinite(*delta_hint)) {
    const double hinted = margin_at(j, tilde, *delta_hint);
    if (hinted >= -tol) {
      cert.chosen_delta = *delta_hint;
      cert.margin = hinted;
    } else {
      cert.note = "delta hint not admissible; midpoint used";
    }
  }
  const double threshold = kStrictTolerance * spectral_norm(tilde);
  if (mid_margin > threshold && cert.interval.width() > 0.0) {
    cert.verdict = SeparationVerdict::Strict;
  } else {
    cert.verdict = SeparationVerdict::NonStrict;
    if (mid_margin > 0.0 && cert.note.empty())
      cert.note = "positive margin below the strictness threshold";
  }
  return cert;
}

SeparationCertificate check_separation(const QuadraticFormField& form,
                                       const VectorFieldModel& field,
                                       std::span<const double> x,
                                       std::optional<double> delta_hint,
                                       const SeparationOptions& options) {
  const Matrix tilde = tilde_j(form, field, x, options);
  return check_separation(form.matrix_at(x), tilde, x, delta_hint);
}

// ---------------------------------------------------------------------------

HatOperator hat_j(const QuadraticFormField& form, const VectorFieldModel& field,
                  std::span<const double> x) {
  if (form.dimension() != field.dimension())
    throw DimensionMismatch("form and field dimensions differ");
  check_point(form.dimension(), x);
  const Vector flow = field.value(x);
  const double speed = norm(flow);
  if (speed < kNearSingular) throw SingularPoint("flow direction vanishes at this point");
  const Matrix j = form.matrix_at(x);
  const double value = evaluate(j, flow);
  if (value <= kConeTolerance * speed * speed)
    throw FlowDirectionNotPositive("flow direction is not in the positive cone");

  const std::size_t n = j.rows();
  const Vector unit = (1.0 / std::sqrt(value)) * flow;
  // Pi v = v - <J v, u> u, i.e. Pi = I - u (J u)^T.
  const Matrix pi = Matrix::identity(n) - outer(unit, j * unit);
  const Matrix k = pi.transpose() * j * pi;
  const Matrix dx = field.jacobian(x);

  HatOperator out;
  out.hat = symmetrize(dx.transpose() * k + k * dx);
  const Matrix flow_column = Matrix::from_columns({flow});
  out.normal_basis = pseudo_gram_schmidt(j, pseudo_orthogonal_complement(j, flow_column));
  return out;
}

namespace {

// Lower-triangular L with L L^T = g for a symmetric positive definite g.
Matrix cholesky(const Matrix& g) {
  const std::size_t n = g.rows();
  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k <= i; ++k) {
      double s = g(i, k);
      for (std::size_t m = 0; m < k; ++m) s -= l(i, m) * l(k, m);
      if (i == k) {
        if (!(s > 0.0)) throw DegenerateSubspace("normal basis Gram matrix is not positive");
        l(i, i) = std::sqrt(s);
      } else {
        l(i, k) = s / l(k, k);
      }
    }
  }
  return l;
}

}  // namespace

MonotonicityCertificate check_lpf_monotonicity(const QuadraticFormField& form,
                                               const VectorFieldModel& field,
                                               std::span<const double> x) {
  HatOperator h = hat_j(form, field, x);
  MonotonicityCertificate cert;
  cert.point.assign(x.begin(), x.end());
  const Matrix& b = h.normal_basis;
  // Generalized problem (B^T Jh B) w = mu (B^T B) w, reduced by Cholesky.
  const Matrix l = cholesky(b.transpose() * b);
  const Matrix l_inv = inverse(l);
  const Matrix reduced = l_inv * (b.transpose() * h.hat * b) * l_inv.transpose();
  cert.restricted_spectrum = symmetric_eigen(reduced).values;
  cert.alpha1 = cert.restricted_spectrum.front();
  const double tol = kStrictTolerance * spectral_norm(h.hat);
  if (cert.alpha1 > tol) {
    cert.verdict = MonotonicityVerdict::StrictlyMonotone;
  } else if (cert.alpha1 >= -tol) {
    cert.verdict = MonotonicityVerdict::Monotone;
  } else {
    cert.verdict = MonotonicityVerdict::Fail;
  }
  cert.hat = std::move(h.hat);
  cert.normal_basis = std::move(h.normal_basis);
  return cert;
}

json MonotonicityCertificate::to_json() const {
  return json{{"x", point},
              {"restricted_spectrum", restricted_spectrum},
              {"alpha1", number_or_null(alpha1)},
              {"verdict", to_string(verdict)}};
}

// ---------------------------------------------------------------------------

double derivative_residual(const QuadraticFormField& form,
                           const VectorFieldModel& field,
                           std::span<const double> x, std::span<const double> v,
                           double h, const SeparationOptions& options) {
  if (!(h > 0.0)) throw PreconditionViolation("step h must be positive");
  check_point(form.dimension(), v);
  const Matrix tilde = tilde_j(form, field, x, options);
  const TrajectoryCocycle traj = integrate_cocycle(field, x, h, h);
  const Vector image = traj.final_fundamental() * v;
  const double before = evaluate(form.matrix_at(x), v);
  const double after = evaluate(form.matrix_at(traj.final_state()), image);
  return std::abs((after - before) / h - evaluate(tilde, v));
}

}  // namespace cone_verify

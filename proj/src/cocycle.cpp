#include "cone_verify/cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "cone_verify/errors.hpp"

namespace cone_verify {

namespace {

std::size_t step_count(double t_final, double dt) {
  if (!(dt > 0.0)) throw PreconditionViolation("dt must be positive");
  if (!(t_final >= 0.0) || !std::isfinite(t_final))
    throw PreconditionViolation("t_final must be finite and non-negative");
  if (t_final == 0.0) return 0;
  return static_cast<std::size_t>(std::ceil(t_final / dt - 1e-9));
}

void check_state(const VectorFieldModel& field, const Vector& x, double t, bool check_region) {
  if (!all_finite(x)) throw NonFiniteState("state overflowed at t = " + std::to_string(t));
  if (check_region && !field.region().contains(x))
    throw EscapedRegion("orbit left the region at t = " + std::to_string(t), t);
}

Vector rk4_state(const VectorFieldModel& field, const Vector& x, double h) {
  const Vector k1 = field.value(x);
  const Vector k2 = field.value(x + (h / 2) * k1);
  const Vector k3 = field.value(x + (h / 2) * k2);
  const Vector k4 = field.value(x + h * k3);
  return x + (h / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// One RK4 step of the joint system (x, Y).
void rk4_joint(const VectorFieldModel& field, Vector& x, Matrix& y, double h) {
  const Vector k1 = field.value(x);
  const Matrix m1 = field.jacobian(x) * y;
  const Vector xa = x + (h / 2) * k1;
  const Matrix ya = y + (h / 2) * m1;
  const Vector k2 = field.value(xa);
  const Matrix m2 = field.jacobian(xa) * ya;
  const Vector xb = x + (h / 2) * k2;
  const Matrix yb = y + (h / 2) * m2;
  const Vector k3 = field.value(xb);
  const Matrix m3 = field.jacobian(xb) * yb;
  const Vector xc = x + h * k3;
  const Matrix yc = y + h * m3;
  const Vector k4 = field.value(xc);
  const Matrix m4 = field.jacobian(xc) * yc;
  x = x + (h / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  y += (h / 6) * (m1 + 2.0 * m2 + 2.0 * m3 + m4);
}

}  // namespace

FlowPath integrate_flow(const VectorFieldModel& field, std::span<const double> x0,
                        double t_final, double dt, bool check_region) {
  if (x0.size() != field.dimension()) throw DimensionMismatch("initial state dimension");
  const std::size_t steps = step_count(t_final, dt);
  const double h = steps ? t_final / static_cast<double>(steps) : 0.0;
  FlowPath path;
  path.times.reserve(steps + 1);
  path.states.reserve(steps + 1);
  Vector x(x0.begin(), x0.end());
  check_state(field, x, 0.0, check_region);
  path.times.push_back(0.0);
  path.states.push_back(x);
  for (std::size_t k = 1; k <= steps; ++k) {
    x = rk4_state(field, x, h);
    const double t = k == steps ? t_final : static_cast<double>(k) * h;
    check_state(field, x, t, check_region);
    path.times.push_back(t);
    path.states.push_back(x);
  }
  return path;
}

TrajectoryCocycle::TrajectoryCocycle(Vector times, std::vector<Vector> states,
                                     std::vector<Matrix> fundamentals,
                                     std::vector<bool> near_singular, double step)
    : times_(std::move(times)),
      states_(std::move(states)),
      fundamentals_(std::move(fundamentals)),
      near_singular_(std::move(near_singular)),
      step_(step) {
  if (times_.empty() || states_.size() != times_.size() ||
      fundamentals_.size() != times_.size() || near_singular_.size() != times_.size())
    throw DimensionMismatch("trajectory arrays must be non-empty and of equal length");
}

std::size_t TrajectoryCocycle::index_at(double t) const {
  const double slack = 0.5 * step_ + 1e-12 * std::max(1.0, std::abs(times_.back()));
  if (t < times_.front() - slack || t > times_.back() + slack)
    throw PreconditionViolation("time outside the trajectory grid");
  const auto it = std::lower_bound(times_.begin(), times_.end(), t);
  if (it == times_.end()) return times_.size() - 1;
  std::size_t i = static_cast<std::size_t>(it - times_.begin());
  if (i > 0 && std::abs(times_[i - 1] - t) <= std::abs(times_[i] - t)) --i;
  return i;
}

Matrix TrajectoryCocycle::between(std::size_t i, std::size_t j) const {
  if (i >= size() || j >= size()) throw PreconditionViolation("grid index out of range");
  // Y_j Y_i^-1 = (Y_i^-T Y_j^T)^T.
  return LU(fundamentals_[i].transpose()).solve(fundamentals_[j].transpose()).transpose();
}

TrajectoryCocycle integrate_cocycle(const VectorFieldModel& field,
                                    std::span<const double> x0, double t_final,
                                    double dt, bool check_region) {
  if (x0.size() != field.dimension()) throw DimensionMismatch("initial state dimension");
  const std::size_t n = field.dimension();
  const std::size_t steps = step_count(t_final, dt);
  const double h = steps ? t_final / static_cast<double>(steps) : dt;
  Vector times;
  std::vector<Vector> states;
  std::vector<Matrix> fundamentals;
  std::vector<bool> flags;
  times.reserve(steps + 1);
  states.reserve(steps + 1);
  fundamentals.reserve(steps + 1);
  flags.reserve(steps + 1);

  Vector x(x0.begin(), x0.end());
  Matrix y = Matrix::identity(n);
  check_state(field, x, 0.0, check_region);
  auto record = [&](double t) {
    times.push_back(t);
    states.push_back(x);
    fundamentals.push_back(y);
    flags.push_back(norm(field.value(x)) < kNearSingular);
  };
  record(0.0);
  for (std::size_t k = 1; k <= steps; ++k) {
    rk4_joint(field, x, y, h);
    const double t = k == steps ? t_final : static_cast<double>(k) * h;
    check_state(field, x, t, check_region);
    if (!all_finite(y.data())) throw NonFiniteState("fundamental matrix overflowed");
    record(t);
  }
  return TrajectoryCocycle(std::move(times), std::move(states), std::move(fundamentals),
                           std::move(flags), h);
}

RefinedCocycle integrate_cocycle_refined(const VectorFieldModel& field,
                                         std::span<const double> x0, double t_final,
                                         double dt, double tol, int max_halvings) {
  TrajectoryCocycle coarse = integrate_cocycle(field, x0, t_final, dt);
  double error = INFINITY;
  int halvings = 0;
  while (halvings < max_halvings) {
    dt *= 0.5;
    ++halvings;
    TrajectoryCocycle fine = integrate_cocycle(field, x0, t_final, dt);
    error = norm(fine.final_state() - coarse.final_state()) / (1.0 + norm(fine.final_state()));
    coarse = std::move(fine);
    if (error < tol) break;
  }
  const bool converged = error < tol;
  return RefinedCocycle{std::move(coarse), error, halvings, converged};
}

// ---------------------------------------------------------------------------

DeltaProfile delta_profile(const QuadraticFormField& form, const VectorFieldModel& field,
                           const TrajectoryCocycle& traj, std::size_t stride,
                           const SeparationOptions& options) {
  const std::size_t count = traj.size();
  if (stride == 0) stride = std::max<std::size_t>(1, count / 1000);
  DeltaProfile p;
  for (std::size_t i = 0; i < count; i += stride) p.indices.push_back(i);
  if (p.indices.back() != count - 1) p.indices.push_back(count - 1);

  // Linear fields with constant forms give the same operator at every state;
  // reuse the interval when both matrices repeat exactly.
  Matrix last_j, last_tilde;
  DeltaInterval last;
  bool have_last = false;
  Vector lower, upper;
  for (std::size_t i : p.indices) {
    const Vector& x = traj.state(i);
    const Matrix j = form.matrix_at(x);
    const Matrix tilde = tilde_j(form, field, x, options);
    DeltaInterval interval;
    if (have_last && j == last_j && tilde == last_tilde) {
      interval = last;
    } else {
      interval = delta_interval(j, tilde);
      last_j = j;
      last_tilde = tilde;
      last = interval;
      have_last = true;
    }
    if (interval.empty())
      throw SeparationFailedOnOrbit(
          "separation fails on the orbit at t = " + std::to_string(traj.time(i)), i);
    lower.push_back(interval.lower);
    upper.push_back(interval.upper);
  }

  p.times.push_back(traj.time(p.indices.front()));
  p.lower.push_back(0.0);
  p.upper.push_back(0.0);
  p.midpoint.push_back(0.0);
  for (std::size_t k = 1; k < p.indices.size(); ++k) {
    const double t0 = traj.time(p.indices[k - 1]);
    const double t1 = traj.time(p.indices[k]);
    const double w = 0.5 * (t1 - t0);
    p.times.push_back(t1);
    p.lower.push_back(p.lower.back() + w * (lower[k - 1] + lower[k]));
    p.upper.push_back(p.upper.back() + w * (upper[k - 1] + upper[k]));
    p.midpoint.push_back(0.5 * (p.lower.back() + p.upper.back()));
  }
  return p;
}

DeltaArea delta_area(const QuadraticFormField& form, const VectorFieldModel& field,
                     const TrajectoryCocycle& traj, double s, double t,
                     std::size_t stride, const SeparationOptions& options) {
  if (s > t) throw PreconditionViolation("delta_area needs s <= t");
  const std::size_t i = traj.index_at(s);
  const std::size_t j = traj.index_at(t);
  DeltaArea area;
  area.s = traj.time(i);
  area.t = traj.time(j);
  const DeltaProfile p = delta_profile(form, field, traj, stride, options);
  // Cumulative values at the profile nodes, linearly interpolated between
  // nodes when the stride skips the requested grid points.
  auto at = [&](std::size_t index, const Vector& values) {
    const auto it = std::lower_bound(p.indices.begin(), p.indices.end(), index);
    const std::size_t k = static_cast<std::size_t>(it - p.indices.begin());
    if (p.indices[k] == index || k == 0) return values[k];
    const double t0 = traj.time(p.indices[k - 1]), t1 = traj.time(p.indices[k]);
    const double w = (traj.time(index) - t0) / (t1 - t0);
    return (1.0 - w) * values[k - 1] + w * values[k];
  };
  area.lower = at(j, p.lower) - at(i, p.lower);
  area.upper = at(j, p.upper) - at(i, p.upper);
  area.midpoint = at(j, p.midpoint) - at(i, p.midpoint);
  return area;
}

BoundCheck verify_growth_bound(const QuadraticFormField& form, const VectorFieldModel& field,
                               const TrajectoryCocycle& traj, std::span<const double> v,
                               DeltaChoice choice, std::size_t stride) {
  if (v.size() != traj.dimension()) throw DimensionMismatch("vector dimension");
  const double initial = evaluate(form.matrix_at(traj.state(0)), v);
  if (!(initial > 0.0)) throw PreconditionViolation("growth bound needs J(v) > 0");
  const DeltaProfile p = delta_profile(form, field, traj, stride);
  const Vector& delta =
      choice == DeltaChoice::Lower ? p.lower : choice == DeltaChoice::Upper ? p.upper : p.midpoint;
  BoundCheck out;
  out.margin = INFINITY;
  for (std::size_t k = 0; k < p.indices.size(); ++k) {
    const std::size_t i = p.indices[k];
    const double value =
        std::abs(evaluate(form.matrix_at(traj.state(i)), traj.fundamental(i) * v));
    const double slack = std::log(value) - std::log(initial) - delta[k];
    if (k == p.indices.size() - 1) out.final_margin = slack;
    if (i == 0 && p.indices.size() > 1) continue;
    if (slack < out.margin) {
      out.margin = slack;
      out.worst_index = i;
    }
  }
  out.holds = out.margin >= -kBoundTolerance;
  return out;
}

BoundCheck verify_quotient_bound(const QuadraticFormField& form, const VectorFieldModel& field,
                                 const TrajectoryCocycle& traj, std::span<const double> w,
                                 std::span<const double> v, std::size_t stride) {
  if (v.size() != traj.dimension() || w.size() != traj.dimension())
    throw DimensionMismatch("vector dimension");
  const Matrix j0 = form.matrix_at(traj.state(0));
  const double jv = evaluate(j0, v);
  const double jw = evaluate(j0, w);
  if (!(jv > 0.0)) throw PreconditionViolation("quotient bound needs J(v) > 0");
  if (!(jw < 0.0)) throw PreconditionViolation("quotient bound needs J(w) < 0");
  const DeltaProfile p = delta_profile(form, field, traj, stride);
  const double log_ratio0 = std::log(-jw) - std::log(jv);

  // The negative vector must stay negative on the whole grid.
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double value = evaluate(form.matrix_at(traj.state(i)), traj.fundamental(i) * w);
    if (!(value < 0.0))
      throw NegativeVectorEscapedCone("J(A_t w) >= 0 at t = " + std::to_string(traj.time(i)));
  }

  BoundCheck out;
  out.margin = INFINITY;
  for (std::size_t k = 0; k < p.indices.size(); ++k) {
    const std::size_t i = p.indices[k];
    const Matrix j = form.matrix_at(traj.state(i));
    const double a = -evaluate(j, traj.fundamental(i) * w);
    const double b = evaluate(j, traj.fundamental(i) * v);
    if (!(b > 0.0)) throw PreconditionViolation("positive vector left the positive cone");
    const double slack = log_ratio0 + 2.0 * p.upper[k] - (std::log(a) - std::log(b));
    if (k == p.indices.size() - 1) out.final_margin = slack;
    if (i == 0 && p.indices.size() > 1) continue;
    if (slack < out.margin) {
      out.margin = slack;
      out.worst_index = i;
    }
  }
  out.holds = out.margin >= -kBoundTolerance;
  return out;
}

ConeInvarianceResult cone_invariance_test(const QuadraticFormField& form,
                                          const VectorFieldModel& field,
                                          std::span<const double> x0, double horizon,
                                          std::size_t n_samples, std::uint64_t seed,
                                          double dt) {
  if (n_samples == 0) throw PreconditionViolation("n_samples must be at least 1");
  const std::size_t n = field.dimension();
  const TrajectoryCocycle traj = integrate_cocycle(field, x0, horizon, dt);
  const Matrix j0 = form.matrix_at(x0);
  std::vector<Matrix> forms;
  forms.reserve(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) forms.push_back(form.matrix_at(traj.state(i)));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ConeInvarianceResult out;
  out.samples = n_samples;
  std::size_t attempts = 0;
  for (std::size_t s = 0; s < n_samples; ++s) {
    Vector v(n);
    while (true) {
      if (++attempts > 1000000) throw PreconditionViolation("positive cone sampling failed");
      for (double& c : v) c = gauss(rng);
      const double len = norm(v);
      if (len == 0.0) continue;
      for (double& c : v) c /= len;
      if (cone_membership(j0, v) == ConeClass::Positive) break;
    }
    bool kept = true;
    for (std::size_t i = 1; i < traj.size(); ++i) {
      if (cone_membership(forms[i], traj.fundamental(i) * v) != ConeClass::Positive) {
        kept = false;
        if (!out.counterexample) {
          out.counterexample = v;
          out.counterexample_time = traj.time(i);
        }
        break;
      }
    }
    if (kept) ++out.retained;
  }
  out.fraction = static_cast<double>(out.retained) / static_cast<double>(out.samples);
  return out;
}

void write_trajectory_csv(const TrajectoryCocycle& traj, std::ostream& out) {
  const std::size_t n = traj.dimension();
  out << "t";
  for (std::size_t i = 1; i <= n; ++i) out << ",x" << i;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= n; ++j) out << ",Y" << i << j;
  out << '\n';
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  for (std::size_t k = 0; k < traj.size(); ++k) {
    put(traj.time(k));
    for (double v : traj.state(k)) {
      out << ',';
      put(v);
    }
    for (double v : traj.fundamental(k).data()) {
      out << ',';
      put(v);
    }
    out << '\n';
  }
}

}  // namespace cone_verify

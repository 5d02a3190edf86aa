#pragma once

// Flow and derivative-cocycle integration (classical RK4 on a fixed grid),
// the delta-area functional, and trajectory-level growth checks.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "cone_verify/fields.hpp"
#include "cone_verify/linalg.hpp"
#include "cone_verify/qforms.hpp"
#include "cone_verify/separation.hpp"

namespace cone_verify {

/// States with |X| below this are flagged as near-singular.
inline constexpr double kNearSingular = 1e-8;

struct FlowPath {
  Vector times;
  std::vector<Vector> states;
};

/// RK4 with step t_final / ceil(t_final / dt). Throws EscapedRegion when a
/// state leaves field.region() (if check_region) and NonFiniteState on
/// overflow.
FlowPath integrate_flow(const VectorFieldModel& field, std::span<const double> x0,
                        double t_final, double dt, bool check_region = true);

/// States X_t(x0) and fundamental matrices Y(t) = A_t(x0) on one grid.
class TrajectoryCocycle {
 public:
  TrajectoryCocycle(Vector times, std::vector<Vector> states,
                    std::vector<Matrix> fundamentals, std::vector<bool> near_singular,
                    double step);

  std::size_t size() const { return times_.size(); }
  std::size_t dimension() const { return states_.front().size(); }
  double step() const { return step_; }
  int method_order() const { return 4; }

  const Vector& times() const { return times_; }
  double time(std::size_t i) const { return times_[i]; }
  const Vector& state(std::size_t i) const { return states_[i]; }
  const Matrix& fundamental(std::size_t i) const { return fundamentals_[i]; }
  bool near_singular(std::size_t i) const { return near_singular_[i]; }
  const Vector& final_state() const { return states_.back(); }
  const Matrix& final_fundamental() const { return fundamentals_.back(); }

  /// Grid index nearest to t; throws PreconditionViolation outside the grid.
  std::size_t index_at(double t) const;
  /// A_{t_j - t_i}(X_{t_i}(x0)) = Y(t_j) Y(t_i)^-1.
  Matrix between(std::size_t i, std::size_t j) const;

 private:
  Vector times_;
  std::vector<Vector> states_;
  std::vector<Matrix> fundamentals_;
  std::vector<bool> near_singular_;
  double step_;
};

/// Joint RK4 integration of x' = X(x), Y' = DX(x) Y, Y(0) = I.
TrajectoryCocycle integrate_cocycle(const VectorFieldModel& field,
                                    std::span<const double> x0, double t_final,
                                    double dt = 1e-3, bool check_region = true);

struct RefinedCocycle {
  TrajectoryCocycle trajectory;
  /// |x_dt(T) - x_{dt/2}(T)| / (1 + |x(T)|) for the last two runs.
  double self_consistency = 0.0;
  int halvings = 0;
  bool converged = false;
};

/// Halves dt until the terminal-state self-consistency drops below tol or
/// max_halvings is reached.
RefinedCocycle integrate_cocycle_refined(const VectorFieldModel& field,
                                         std::span<const double> x0, double t_final,
                                         double dt = 1e-3, double tol = 1e-6,
                                         int max_halvings = 6);

/// Cumulative delta-areas from the first grid point, on every stride-th grid
/// point (and the last). stride 0 picks one that keeps about 1000 nodes.
struct DeltaProfile {
  std::vector<std::size_t> indices;
  Vector times;
  Vector lower;
  Vector upper;
  Vector midpoint;
};

DeltaProfile delta_profile(const QuadraticFormField& form, const VectorFieldModel& field,
                           const TrajectoryCocycle& traj, std::size_t stride = 0,
                           const SeparationOptions& options = {});

struct DeltaArea {
  double lower = 0.0;
  double upper = 0.0;
  double midpoint = 0.0;
  double s = 0.0;
  double t = 0.0;
};

/// Trapezoidal integrals of r_minus, r_plus and their mean over [s, t].
/// Throws SeparationFailedOnOrbit at the first grid state with an empty
/// interval.
DeltaArea delta_area(const QuadraticFormField& form, const VectorFieldModel& field,
                     const TrajectoryCocycle& traj, double s, double t,
                     std::size_t stride = 0, const SeparationOptions& options = {});

enum class DeltaChoice { Lower, Upper, Mid };

/// Log-space tolerance for the trajectory inequalities.
inline constexpr double kBoundTolerance = 1e-6;

struct BoundCheck {
  bool holds = true;
  /// Minimum over grid times t > 0 of the log-space slack.
  double margin = 0.0;
  /// Slack at the last grid time.
  double final_margin = 0.0;
  std::size_t worst_index = 0;
};

/// |J(A_t v)| >= |J(v)| exp(Delta_0^t) with Delta from the chosen endpoint;
/// slack = log|J(A_t v)| - log|J(v)| - Delta_0^t.
BoundCheck verify_growth_bound(const QuadraticFormField& form, const VectorFieldModel& field,
                               const TrajectoryCocycle& traj, std::span<const double> v,
                               DeltaChoice choice = DeltaChoice::Lower, std::size_t stride = 0);

/// |J(A_t w)| / J(A_t v) <= (|J(w)| / J(v)) exp(2 Delta_0^t), Delta from the
/// upper endpoint; slack = log bound - log ratio.
BoundCheck verify_quotient_bound(const QuadraticFormField& form, const VectorFieldModel& field,
                                 const TrajectoryCocycle& traj, std::span<const double> w,
                                 std::span<const double> v, std::size_t stride = 0);

struct ConeInvarianceResult {
  std::size_t samples = 0;
  std::size_t retained = 0;
  double fraction = 1.0;
  std::optional<Vector> counterexample;
  double counterexample_time = 0.0;
};

/// Unit vectors drawn uniformly from C+(x0) by rejection; a sample is
/// retained when A_t v stays Positive at every grid time up to horizon.
ConeInvarianceResult cone_invariance_test(const QuadraticFormField& form,
                                          const VectorFieldModel& field,
                                          std::span<const double> x0, double horizon,
                                          std::size_t n_samples, std::uint64_t seed,
                                          double dt = 1e-3);

/// Header "t,x1..xn,Y11..Ynn", one row per grid point, %.17g.
void write_trajectory_csv(const TrajectoryCocycle& traj, std::ostream& out);

}  // namespace cone_verify

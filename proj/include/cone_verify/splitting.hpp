#pragma once

// Invariant bundles F- + F+ from iterated cone images, J-polar
// decomposition, rate estimates and the splitting classifier.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cone_verify/cocycle.hpp"
#include "cone_verify/fields.hpp"
#include "cone_verify/linalg.hpp"
#include "cone_verify/qforms.hpp"
#include "cone_verify/separation.hpp"

namespace cone_verify {

// ---------------------------------------------------------------------------
// Bundles

struct BundleOptions {
  double block_time = 1.0;
  std::size_t max_iters = 40;
  double dt = 1e-3;
  /// Converged once successive iterates differ by less than this angle.
  double tol = 1e-8;
  /// NoConvergence is raised if the last gap is above this.
  double stagnation = 1e-6;
  /// Check Strict separation at every block endpoint used.
  bool require_separation = true;
};

struct Bundles {
  /// Orthonormal columns.
  Matrix f_minus;
  Matrix f_plus;
  Vector minus_gaps;
  Vector plus_gaps;
  bool converged = false;
};

/// F+ from forward images of the positive Lagrange axes seeded at
/// X_{-kT}(x); F- from backward images of the negative axes seeded at
/// X_{kT}(x).
Bundles extract_bundles(const QuadraticFormField& form, const VectorFieldModel& field,
                        std::span<const double> x, const BundleOptions& options = {});

/// Form-free variant with seeds spanned by the first `index` coordinate axes
/// (negative) and the remaining ones (positive). Used to build adapted forms.
Bundles extract_bundles(const VectorFieldModel& field, std::span<const double> x,
                        std::size_t index, const BundleOptions& options = {});

// ---------------------------------------------------------------------------
// J-polar decomposition

struct JPolarDecomposition {
  Matrix r;
  Matrix u;
  /// All eigenvalues of R, ascending: r-^q <= ... <= r-^1 <= r+^1 <= ... <= r+^p.
  Vector spectrum;
  std::size_t negative = 0;

  double r_minus() const { return spectrum[negative - 1]; }
  double r_plus() const { return spectrum[negative]; }
};

/// L = R U with R = (L L+)^(1/2) J-symmetric and U a J-isometry. Throws
/// NotJSeparated if one of 50 sampled C+ vectors is not mapped into C+, and
/// NonPositiveSpectrum if L L+ has a spectrum off the positive real axis.
JPolarDecomposition j_polar_decompose(const Matrix& j, const Matrix& l,
                                      std::uint64_t seed = 0x5eed);
JPolarDecomposition j_polar_decompose(const QuadraticFormField& form,
                                      std::span<const double> x, const Matrix& l,
                                      std::uint64_t seed = 0x5eed);

/// r+^1 ... r+^d, 1 <= d <= p.
double sigma_d(const JPolarDecomposition& decomposition, std::size_t d);

// ---------------------------------------------------------------------------
// Rates

/// max over random pairs of p-subspaces S1, S2 inside C+(x) of
/// gap(A_T S1, A_T S2) / gap(S1, S2), gap = largest principal angle.
double cone_image_contraction(const QuadraticFormField& form, const VectorFieldModel& field,
                              std::span<const double> x, double block_time,
                              std::size_t n_pairs, std::uint64_t seed = 1,
                              double dt = 1e-3);

struct DominationFit {
  double constant = 0.0;  ///< K
  double rate = 0.0;      ///< lambda
};

/// Least-squares fit of log(|A_t|F-| |(A_t|F+)^-1|) ~ log K - lambda t over
/// grid times t >= fit_start * t_final.
DominationFit estimate_domination(const TrajectoryCocycle& traj, const Matrix& f_minus,
                                  const Matrix& f_plus, double fit_start = 0.25);

enum class SectionalVerdict { Holds, Fails, Inconclusive };
std::string to_string(SectionalVerdict v);

struct SectionalResult {
  SectionalVerdict verdict = SectionalVerdict::Inconclusive;
  double worst_determinant = 0.0;
  double time = 0.0;
};

/// Smallest grid time with |A_t|F-| < 1/2, if any.
std::optional<double> calibrate_sectional_time(const TrajectoryCocycle& traj,
                                               const Matrix& f_minus);

/// Area expansion of A_T on n_planes random 2-planes of F+; Holds iff every
/// determinant exceeds 2. With no explicit time, T is calibrated from F-.
SectionalResult check_sectional_expansion(const TrajectoryCocycle& traj, const Matrix& f_plus,
                                          std::size_t n_planes, std::optional<double> time,
                                          const Matrix& f_minus, std::uint64_t seed = 7);

// ---------------------------------------------------------------------------
// Classification

enum class Classification {
  DominatedOnly,
  PartiallyHyperbolicContracting,
  PartiallyHyperbolicExpanding,
  Hyperbolic,
  SectionalHyperbolic,
  None,
  Inconclusive,
};
std::string to_string(Classification c);
Classification classification_from_string(const std::string& s);

struct ClassificationInput {
  std::vector<SeparationCertificate> certificates;
  /// Smallest eigenvalue of Jt at each certificate point.
  Vector tilde_min_eigenvalues;
  /// Slope of the midpoint delta-area over the trend window, per sample.
  Vector delta_slopes;
  std::optional<double> domination_rate;
  std::optional<SectionalVerdict> sectional;
  /// Singularities hyperbolic with index q or q+1.
  bool singularities_admissible = true;
};

inline constexpr double kSlopeThreshold = 1e-3;

Classification classify_splitting(const ClassificationInput& input);

struct ClassifyOptions {
  double horizon = 50.0;
  double dt = 1e-3;
  /// Sectional and domination checks integrate over this horizon.
  double bundle_horizon = 5.0;
  std::size_t sectional_planes = 20;
  std::uint64_t seed = 1;
  BundleOptions bundles;
  SeparationOptions separation;
};

struct ClassificationReport {
  Classification classification = Classification::None;
  ClassificationInput input;
  std::vector<Vector> points;
  std::vector<std::string> notes;

  nlohmann::json to_json() const;
};

/// Runs the pipeline at the given points: certificates, delta-area trends,
/// and (when the trends call for it) domination and sectional checks.
/// Points whose orbit leaves the region are skipped with a note.
ClassificationReport classify(const QuadraticFormField& form, const VectorFieldModel& field,
                              const std::vector<Vector>& points,
                              const ClassifyOptions& options = {});

/// Eigenvalues of DX at each listed singularity: hyperbolic, with q or q+1
/// eigenvalues of negative real part.
bool singularities_admissible(const VectorFieldModel& field, std::size_t q,
                              std::vector<std::string>* notes = nullptr);

// ---------------------------------------------------------------------------
// Adapted forms and splitting estimates

struct BundleSample {
  Vector point;
  Matrix f_minus;
  Matrix f_plus;
};

/// J_x = P+^T P+ - P-^T P- from the oblique projections of the nearest
/// sample. IllConditionedSplitting if the bundles are within 1e-6 rad.
QuadraticFormField build_adapted_form(const std::vector<BundleSample>& samples);

struct SplittingEstimate {
  std::vector<BundleSample> samples;
  double domination_rate = 0.0;
  double fit_constant = 0.0;
  Classification classification = Classification::None;
  bool flow_in_plus = false;

  nlohmann::json to_json() const;
};

/// Angle between X(x) and F+(x) below angle_tol at every sample with
/// |X| > 1e-8.
bool flow_direction_check(const VectorFieldModel& field, const SplittingEstimate& estimate,
                          double angle_tol);

struct DualFormResult {
  bool hyperbolic = false;
  std::vector<SeparationCertificate> forward;
  std::vector<SeparationCertificate> backward;
  std::vector<std::string> notes;

  nlohmann::json to_json() const;
};

/// (a) X strictly J-separated with J(X) >= 0, and (b) -X strictly
/// (-G)-separated with -G(X) >= 0, at every sample. Requires index(J) < n-2
/// and no sample within 1e-8 of a zero of X (SingularityInRegion).
DualFormResult dual_form_hyperbolicity(const QuadraticFormField& j, const QuadraticFormField& g,
                                       const VectorFieldModel& field,
                                       const std::vector<Vector>& samples);

}  // namespace cone_verify

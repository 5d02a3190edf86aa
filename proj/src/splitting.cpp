#include "cone_verify/splitting.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <random>

#include "cone_verify/errors.hpp"

namespace cone_verify {

using nlohmann::json;

namespace {

json basis_rows(const Matrix& basis) {
  json rows = json::array();
  for (const auto& c : basis.columns()) rows.push_back(c);
  return rows;
}

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = gauss(rng);
  return m;
}

Vector unit_positive_vector(const Matrix& j, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(j.rows());
  for (int attempt = 0; attempt < 100000; ++attempt) {
    for (double& c : v) c = gauss(rng);
    const double len = norm(v);
    if (len == 0.0) continue;
    for (double& c : v) c /= len;
    if (cone_membership(j, v) == ConeClass::Positive) return v;
  }
  throw PreconditionViolation("could not sample the positive cone");
}

using SeedFn = std::function<Matrix(const Vector&)>;
using CheckFn = std::function<void(const Vector&, std::size_t)>;

struct Side {
  std::vector<Matrix> blocks;  // maps applied to the seed, nearest block first
  std::vector<Vector> ends;    // ends[k] = orbit point k+1 blocks away from x
  Matrix previous;
  Vector gaps;
  bool done = false;
};

// Pushes seed(end of orbit) back to x through the stored blocks.
Matrix iterate_side(const Side& side, const SeedFn& seed, bool invert) {
  Matrix s = orthonormalize_columns(seed(side.ends.back()));
  for (std::size_t m = side.blocks.size(); m-- > 0;) {
    const Matrix image = invert ? LU(side.blocks[m]).solve(s) : side.blocks[m] * s;
    s = orthonormalize_columns(image);
  }
  return s;
}

Bundles extract_core(const VectorFieldModel& field, std::span<const double> x,
                     const SeedFn& seed_minus, const SeedFn& seed_plus,
                     const CheckFn& check, const BundleOptions& options) {
  if (!(options.block_time > 0.0)) throw PreconditionViolation("block time must be positive");
  if (options.max_iters == 0) throw PreconditionViolation("max_iters must be positive");
  const VectorFieldModel backward = field.reversed();
  const Vector x0(x.begin(), x.end());
  check(x0, 0);

  Side plus, minus;
  for (std::size_t k = 1; k <= options.max_iters && !(plus.done && minus.done); ++k) {
    if (!plus.done) {
      // Forward block from X_{-kT}(x) to X_{-(k-1)T}(x), as the inverse of
      // the backward cocycle. Backward orbits need not stay in the region.
      const Vector& start = plus.ends.empty() ? x0 : plus.ends.back();
      const TrajectoryCocycle seg =
          integrate_cocycle(backward, start, options.block_time, options.dt, false);
      check(seg.final_state(), k);
      plus.blocks.push_back(LU(seg.final_fundamental()).inverse());
      plus.ends.push_back(seg.final_state());
      Matrix s = iterate_side(plus, seed_plus, false);
      if (k > 1) {
        plus.gaps.push_back(max_principal_angle(s, plus.previous));
        if (plus.gaps.back() < options.tol) plus.done = true;
      }
      plus.previous = std::move(s);
    }
    if (!minus.done) {
      const Vector& start = minus.ends.empty() ? x0 : minus.ends.back();
      const TrajectoryCocycle seg =
          integrate_cocycle(field, start, options.block_time, options.dt, false);
      check(seg.final_state(), k);
      minus.blocks.push_back(seg.final_fundamental());
      minus.ends.push_back(seg.final_state());
      Matrix s = iterate_side(minus, seed_minus, true);
      if (k > 1) {
        minus.gaps.push_back(max_principal_angle(s, minus.previous));
        if (minus.gaps.back() < options.tol) minus.done = true;
      }
      minus.previous = std::move(s);
    }
  }

  Bundles out;
  out.f_minus = minus.previous;
  out.f_plus = plus.previous;
  out.minus_gaps = minus.gaps;
  out.plus_gaps = plus.gaps;
  out.converged = plus.done && minus.done;
  if (!out.converged) {
    double last = 0.0;
    if (!plus.gaps.empty()) last = std::max(last, plus.gaps.back());
    if (!minus.gaps.empty()) last = std::max(last, minus.gaps.back());
    if (plus.gaps.empty() || minus.gaps.empty()) last = INFINITY;
    if (last > options.stagnation)
      throw NoConvergence("bundle iteration did not converge", last);
  }
  return out;
}

}  // namespace

Bundles extract_bundles(const QuadraticFormField& form, const VectorFieldModel& field,
                        std::span<const double> x, const BundleOptions& options) {
  if (form.dimension() != field.dimension())
    throw DimensionMismatch("form and field dimensions differ");
  const std::size_t q = form.index();
  const std::size_t p = form.positive_dimension();
  auto seed_minus = [&](const Vector& y) { return lagrange_normalize(form, y).basis.column_block(0, q); };
  auto seed_plus = [&](const Vector& y) { return lagrange_normalize(form, y).basis.column_block(q, p); };
  CheckFn check = [&](const Vector& y, std::size_t k) {
    if (!options.require_separation) return;
    SeparationOptions sep;
    sep.flow_derivative = !form.is_constant();
    const auto cert = check_separation(form, field, y, std::nullopt, sep);
    if (cert.verdict != SeparationVerdict::Strict)
      throw SeparationFailedOnOrbit("separation is not strict at block " + std::to_string(k), k);
  };
  return extract_core(field, x, seed_minus, seed_plus, check, options);
}

Bundles extract_bundles(const VectorFieldModel& field, std::span<const double> x,
                        std::size_t index, const BundleOptions& options) {
  const std::size_t n = field.dimension();
  if (index == 0 || index >= n) throw PreconditionViolation("index must satisfy 0 < q < n");
  const Matrix id = Matrix::identity(n);
  auto seed_minus = [&](const Vector&) { return id.column_block(0, index); };
  auto seed_plus = [&](const Vector&) { return id.column_block(index, n - index); };
  return extract_core(field, x, seed_minus, seed_plus, [](const Vector&, std::size_t) {}, options);
}

// ---------------------------------------------------------------------------

JPolarDecomposition j_polar_decompose(const Matrix& j, const Matrix& l, std::uint64_t seed) {
  if (!l.is_square() || l.rows() != j.rows()) throw DimensionMismatch("operator shape");
  const std::size_t q = form_index(j);
  if (q == 0 || q == j.rows()) throw PreconditionViolation("form must be indefinite");
  std::mt19937_64 rng(seed);
  for (int s = 0; s < 50; ++s) {
    const Vector v = unit_positive_vector(j, rng);
    if (cone_membership(j, l * v) != ConeClass::Positive)
      throw NotJSeparated("operator maps a positive vector out of the positive cone");
  }
  const Matrix m = l * j_adjoint(j, l);
  const auto eig = eigenvalues(m);
  double biggest = 0.0;
  for (const auto& e : eig) biggest = std::max(biggest, std::abs(e));
  for (const auto& e : eig)
    if (std::abs(e.imag()) > 1e-8 * biggest || e.real() <= 1e-14 * biggest)
      throw NonPositiveSpectrum("L L+ has an eigenvalue off the positive real axis");

  JPolarDecomposition out;
  out.r = sqrt_positive(m);
  out.u = LU(out.r).solve(l);
  out.negative = q;
  for (const auto& e : eig) out.spectrum.push_back(std::sqrt(e.real()));
  std::sort(out.spectrum.begin(), out.spectrum.end());
  return out;
}

JPolarDecomposition j_polar_decompose(const QuadraticFormField& form,
                                      std::span<const double> x, const Matrix& l,
                                      std::uint64_t seed) {
  return j_polar_decompose(form.matrix_at(x), l, seed);
}

double sigma_d(const JPolarDecomposition& decomposition, std::size_t d) {
  const std::size_t p = decomposition.spectrum.size() - decomposition.negative;
  if (d < 1 || d > p) throw PreconditionViolation("sigma_d needs 1 <= d <= p");
  double product = 1.0;
  for (std::size_t i = 0; i < d; ++i) product *= decomposition.spectrum[decomposition.negative + i];
  return product;
}

// ---------------------------------------------------------------------------

double cone_image_contraction(const QuadraticFormField& form, const VectorFieldModel& field,
                              std::span<const double> x, double block_time,
                              std::size_t n_pairs, std::uint64_t seed, double dt) {
  if (n_pairs == 0) throw PreconditionViolation("n_pairs must be positive");
  const TrajectoryCocycle traj = integrate_cocycle(field, x, block_time, dt);
  SeparationOptions sep;
  sep.flow_derivative = !form.is_constant();
  const std::size_t checks = std::min<std::size_t>(traj.size(), 20);
  for (std::size_t c = 0; c < checks; ++c) {
    const std::size_t i = checks == 1 ? 0 : c * (traj.size() - 1) / (checks - 1);
    if (check_separation(form, field, traj.state(i), std::nullopt, sep).verdict !=
        SeparationVerdict::Strict)
      throw SeparationFailedOnOrbit("separation is not strict on the orbit block", i);
  }
  const Matrix& a = traj.final_fundamental();
  const LagrangeBasis lb = lagrange_normalize(form, x);
  const std::size_t q = lb.negative, p = lb.positive;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.05, 0.95);

  // B [K; I] with |K| < 1 lies inside C+.
  auto random_subspace = [&]() {
    Matrix k = gaussian_matrix(q, p, rng);
    const double s = spectral_norm(k);
    k *= unit(rng) / std::max(s, 1e-300);
    Matrix coords(q + p, p);
    for (std::size_t r = 0; r < q; ++r)
      for (std::size_t c = 0; c < p; ++c) coords(r, c) = k(r, c);
    for (std::size_t c = 0; c < p; ++c) coords(q + c, c) = 1.0;
    return lb.basis * coords;
  };

  double worst = 0.0;
  for (std::size_t pair = 0; pair < n_pairs; ++pair) {
    Matrix s1 = random_subspace(), s2 = random_subspace();
    double before = max_principal_angle(s1, s2);
    for (int retry = 0; retry < 100 && before < 1e-6; ++retry) {
      s2 = random_subspace();
      before = max_principal_angle(s1, s2);
    }
    const double after = max_principal_angle(a * s1, a * s2);
    worst = std::max(worst, after / before);
  }
  return worst;
}

DominationFit estimate_domination(const TrajectoryCocycle& traj, const Matrix& f_minus,
                                  const Matrix& f_plus, double fit_start) {
  const Matrix qm = orthonormalize_columns(f_minus);
  const Matrix qp = orthonormalize_columns(f_plus);
  if (qm.cols() == 0 || qp.cols() == 0) throw DegenerateSubspace("empty bundle basis");
  const double t0 = fit_start * traj.times().back();
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < traj.size(); ++i)
    if (traj.time(i) >= t0) idx.push_back(i);
  const std::size_t stride = std::max<std::size_t>(1, idx.size() / 500);
  double st = 0, sy = 0, stt = 0, sty = 0, count = 0;
  for (std::size_t k = 0; k < idx.size(); k += stride) {
    const std::size_t i = idx[k];
    const Matrix& a = traj.fundamental(i);
    const double top = singular_values(a * qm).front();
    const double bottom = singular_values(a * qp).back();
    const double t = traj.time(i);
    const double y = std::log(top) - std::log(bottom);
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
    count += 1;
  }
  DominationFit fit;
  const double denom = count * stt - st * st;
  if (count < 2 || denom <= 0.0) return fit;
  const double slope = (count * sty - st * sy) / denom;
  fit.rate = -slope;
  fit.constant = std::exp((sy - slope * st) / count);
  return fit;
}

std::string to_string(SectionalVerdict v) {
  switch (v) {
    case SectionalVerdict::Holds: return "Holds";
    case SectionalVerdict::Fails: return "Fails";
    case SectionalVerdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

std::optional<double> calibrate_sectional_time(const TrajectoryCocycle& traj,
                                               const Matrix& f_minus) {
  const Matrix qm = orthonormalize_columns(f_minus);
  for (std::size_t i = 1; i < traj.size(); ++i)
    if (singular_values(traj.fundamental(i) * qm).front() < 0.5) return traj.time(i);
  return std::nullopt;
}

SectionalResult check_sectional_expansion(const TrajectoryCocycle& traj, const Matrix& f_plus,
                                          std::size_t n_planes, std::optional<double> time,
                                          const Matrix& f_minus, std::uint64_t seed) {
  const Matrix qp = orthonormalize_columns(f_plus);
  if (qp.cols() < 2) throw PreconditionViolation("sectional expansion needs dim F+ >= 2");
  SectionalResult out;
  if (!time) time = calibrate_sectional_time(traj, f_minus);
  if (!time) return out;
  out.time = traj.time(traj.index_at(*time));
  const Matrix& a = traj.fundamental(traj.index_at(*time));
  std::mt19937_64 rng(seed);
  out.worst_determinant = INFINITY;
  const std::size_t planes = std::max<std::size_t>(n_planes, 1);
  for (std::size_t k = 0; k < planes; ++k) {
    Matrix plane = k == 0 ? qp.column_block(0, 2)
                          : orthonormalize_columns(qp * gaussian_matrix(qp.cols(), 2, rng));
    if (plane.cols() < 2) continue;
    const Matrix image = a * plane;
    const double det = std::sqrt(std::max(0.0, determinant(image.transpose() * image)));
    out.worst_determinant = std::min(out.worst_determinant, det);
  }
  out.verdict = out.worst_determinant > 2.0 ? SectionalVerdict::Holds : SectionalVerdict::Fails;
  return out;
}

// ---------------------------------------------------------------------------

std::string to_string(Classification c) {
  switch (c) {
    case Classification::DominatedOnly: return "DominatedOnly";
    case Classification::PartiallyHyperbolicContracting: return "PartiallyHyperbolicContracting";
    case Classification::PartiallyHyperbolicExpanding: return "PartiallyHyperbolicExpanding";
    case Classification::Hyperbolic: return "Hyperbolic";
    case Classification::SectionalHyperbolic: return "SectionalHyperbolic";
    case Classification::None: return "None";
    case Classification::Inconclusive: return "Inconclusive";
  }
  return "?";
}

Classification classification_from_string(const std::string& s) {
  for (auto c : {Classification::DominatedOnly, Classification::PartiallyHyperbolicContracting,
                 Classification::PartiallyHyperbolicExpanding, Classification::Hyperbolic,
                 Classification::SectionalHyperbolic, Classification::None,
                 Classification::Inconclusive})
    if (to_string(c) == s) return c;
  throw ConfigError("unknown classification '" + s + "'");
}

Classification classify_splitting(const ClassificationInput& input) {
  if (input.certificates.empty()) return Classification::Inconclusive;
  for (const auto& c : input.certificates)
    if (c.verdict != SeparationVerdict::Strict) return Classification::None;

  bool definite = true;
  for (std::size_t i = 0; i < input.certificates.size(); ++i) {
    const auto& c = input.certificates[i];
    const double smallest = i < input.tilde_min_eigenvalues.size()
                                ? input.tilde_min_eigenvalues[i]
                                : min_eigenvalue(c.tilde);
    if (!(smallest > kStrictTolerance * spectral_norm(c.tilde))) definite = false;
  }
  if (definite) return Classification::Hyperbolic;

  const auto& s = input.delta_slopes;
  if (!s.empty()) {
    const bool all_up = std::all_of(s.begin(), s.end(), [](double v) { return v > kSlopeThreshold; });
    const bool all_down = std::all_of(s.begin(), s.end(), [](double v) { return v < -kSlopeThreshold; });
    if (all_up) return Classification::PartiallyHyperbolicExpanding;
    if (all_down) {
      if (input.sectional == SectionalVerdict::Holds && input.singularities_admissible)
        return Classification::SectionalHyperbolic;
      return Classification::PartiallyHyperbolicContracting;
    }
    const bool some_up = std::any_of(s.begin(), s.end(), [](double v) { return v > kSlopeThreshold; });
    const bool some_down = std::any_of(s.begin(), s.end(), [](double v) { return v < -kSlopeThreshold; });
    if (some_up && some_down) return Classification::Inconclusive;
  }
  if (input.domination_rate && *input.domination_rate > 0.0) return Classification::DominatedOnly;
  return Classification::None;
}

bool singularities_admissible(const VectorFieldModel& field, std::size_t q,
                              std::vector<std::string>* notes) {
  bool ok = true;
  for (const auto& s : field.singularities()) {
    if (!field.region().contains(s)) continue;
    std::size_t negative = 0;
    bool hyperbolic = true;
    for (const auto& e : eigenvalues(field.jacobian(s))) {
      if (std::abs(e.real()) <= 1e-8) hyperbolic = false;
      if (e.real() < 0.0) ++negative;
    }
    if (!hyperbolic || (negative != q && negative != q + 1)) {
      ok = false;
      if (notes) {
        std::string where;
        for (double v : s) where += (where.empty() ? "" : ",") + std::to_string(v);
        notes->push_back("singularity (" + where + ") has index " + std::to_string(negative) +
                         (hyperbolic ? "" : " and is not hyperbolic"));
      }
    }
  }
  return ok;
}

ClassificationReport classify(const QuadraticFormField& form, const VectorFieldModel& field,
                              const std::vector<Vector>& points, const ClassifyOptions& options) {
  ClassificationReport report;
  ClassificationInput& in = report.input;
  std::vector<TrajectoryCocycle> trends;
  for (const auto& x : points) {
    try {
      TrajectoryCocycle traj = integrate_cocycle(field, x, options.horizon, options.dt);
      in.certificates.push_back(check_separation(form, field, x, std::nullopt, options.separation));
      in.tilde_min_eigenvalues.push_back(min_eigenvalue(in.certificates.back().tilde));
      report.points.push_back(x);
      trends.push_back(std::move(traj));
    } catch (const EscapedRegion& e) {
      report.notes.push_back(std::string("skipped sample: ") + e.what());
    } catch (const NonFiniteState& e) {
      report.notes.push_back(std::string("skipped sample: ") + e.what());
    }
  }
  // Without trend data the classifier can only answer None, Hyperbolic or
  // Inconclusive (no usable samples); anything else needs the delta-areas.
  report.classification = classify_splitting(in);
  if (report.classification != Classification::None) return report;
  const bool all_strict = std::all_of(in.certificates.begin(), in.certificates.end(),
                                      [](const SeparationCertificate& c) {
                                        return c.verdict == SeparationVerdict::Strict;
                                      });
  if (!all_strict) return report;

  const double h = options.horizon;
  for (const auto& traj : trends) {
    const DeltaArea area =
        delta_area(form, field, traj, 0.5 * h, h, 0, options.separation);
    in.delta_slopes.push_back(area.midpoint / (0.5 * h));
  }
  Classification partial = classify_splitting(in);

  if (partial == Classification::PartiallyHyperbolicContracting) {
    in.singularities_admissible = singularities_admissible(field, form.index(), &report.notes);
    SectionalVerdict overall = SectionalVerdict::Holds;
    for (const auto& x : report.points) {
      SectionalVerdict v = SectionalVerdict::Fails;
      if (form.positive_dimension() >= 2) {
        const Bundles b = extract_bundles(form, field, x, options.bundles);
        const TrajectoryCocycle traj =
            integrate_cocycle(field, x, options.bundle_horizon, options.dt, false);
        v = check_sectional_expansion(traj, b.f_plus, options.sectional_planes, std::nullopt,
                                      b.f_minus, options.seed)
                .verdict;
      } else {
        report.notes.push_back("F+ has dimension below 2; sectional check not applicable");
      }
      if (v == SectionalVerdict::Fails) overall = SectionalVerdict::Fails;
      if (v == SectionalVerdict::Inconclusive && overall == SectionalVerdict::Holds)
        overall = SectionalVerdict::Inconclusive;
    }
    in.sectional = overall;
  } else if (partial == Classification::None) {
    double rate = INFINITY;
    for (const auto& x : report.points) {
      const Bundles b = extract_bundles(form, field, x, options.bundles);
      const TrajectoryCocycle traj =
          integrate_cocycle(field, x, options.bundle_horizon, options.dt, false);
      rate = std::min(rate, estimate_domination(traj, b.f_minus, b.f_plus).rate);
    }
    in.domination_rate = rate;
  }
  report.classification = classify_splitting(in);
  return report;
}

json ClassificationReport::to_json() const {
  json certs = json::array();
  for (const auto& c : input.certificates) certs.push_back(c.to_json());
  json j{{"classification", to_string(classification)},
         {"points", points},
         {"certificates", certs},
         {"tilde_min_eigenvalues", input.tilde_min_eigenvalues},
         {"delta_slopes", input.delta_slopes},
         {"singularities_admissible", input.singularities_admissible},
         {"notes", notes},
         {"empirical", true}};
  j["domination_rate"] = input.domination_rate ? json(*input.domination_rate) : json(nullptr);
  j["sectional"] = input.sectional ? json(to_string(*input.sectional)) : json(nullptr);
  return j;
}

// ---------------------------------------------------------------------------

QuadraticFormField build_adapted_form(const std::vector<BundleSample>& samples) {
  if (samples.empty()) throw PreconditionViolation("adapted form needs at least one sample");
  const std::size_t n = samples.front().point.size();
  const std::size_t q = samples.front().f_minus.cols();
  auto points = std::make_shared<std::vector<Vector>>();
  auto forms = std::make_shared<std::vector<Matrix>>();
  for (const auto& s : samples) {
    const Matrix qm = orthonormalize_columns(s.f_minus);
    const Matrix qp = orthonormalize_columns(s.f_plus);
    if (s.point.size() != n || qm.cols() != q || qm.cols() + qp.cols() != n)
      throw DimensionMismatch("bundle samples have inconsistent dimensions");
    if (min_principal_angle(qm, qp) < 1e-6)
      throw IllConditionedSplitting("bundles are nearly parallel");
    Matrix b(n, n);
    for (std::size_t c = 0; c < q; ++c) b.set_column(c, qm.column(c));
    for (std::size_t c = q; c < n; ++c) b.set_column(c, qp.column(c - q));
    const Matrix b_inv = inverse(b);
    Matrix rows_minus(q, n), rows_plus(n - q, n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) (r < q ? rows_minus(r, c) : rows_plus(r - q, c)) = b_inv(r, c);
    const Matrix p_minus = qm * rows_minus;
    const Matrix p_plus = qp * rows_plus;
    forms->push_back(symmetrize(p_plus.transpose() * p_plus - p_minus.transpose() * p_minus));
    points->push_back(s.point);
  }
  const bool all_equal = std::all_of(forms->begin(), forms->end(),
                                     [&](const Matrix& m) { return m == forms->front(); });
  if (all_equal) return QuadraticFormField::constant(forms->front());
  for (const auto& m : *forms)
    if (form_index(m) != q) throw IllConditionedSplitting("adapted form has the wrong index");
  auto lookup = [points, forms](std::span<const double> x) {
    std::size_t best = 0;
    double best_d = INFINITY;
    for (std::size_t k = 0; k < points->size(); ++k) {
      double d = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) d += ((*points)[k][i] - x[i]) * ((*points)[k][i] - x[i]);
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    return (*forms)[best];
  };
  return QuadraticFormField::varying(n, q, lookup, "adapted (nearest of " +
                                                       std::to_string(points->size()) + " samples)");
}

json SplittingEstimate::to_json() const {
  json s = json::array();
  for (const auto& b : samples)
    s.push_back({{"x", b.point}, {"f_minus", basis_rows(b.f_minus)}, {"f_plus", basis_rows(b.f_plus)}});
  return json{{"samples", s},
              {"domination_rate", domination_rate},
              {"fit_constant", fit_constant},
              {"classification", to_string(classification)},
              {"flow_in_plus", flow_in_plus}};
}

bool flow_direction_check(const VectorFieldModel& field, const SplittingEstimate& estimate,
                          double angle_tol) {
  for (const auto& s : estimate.samples) {
    const Vector flow = field.value(s.point);
    if (norm(flow) <= kNearSingular) continue;
    if (min_principal_angle(Matrix::from_columns({flow}), s.f_plus) > angle_tol) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

json DualFormResult::to_json() const {
  json f = json::array(), b = json::array();
  for (const auto& c : forward) f.push_back(c.to_json());
  for (const auto& c : backward) b.push_back(c.to_json());
  return json{{"hyperbolic", hyperbolic}, {"forward", f}, {"backward", b}, {"notes", notes}};
}

DualFormResult dual_form_hyperbolicity(const QuadraticFormField& j, const QuadraticFormField& g,
                                       const VectorFieldModel& field,
                                       const std::vector<Vector>& samples) {
  const std::size_t n = field.dimension();
  if (j.dimension() != n || g.dimension() != n)
    throw DimensionMismatch("form and field dimensions differ");
  if (!(j.index() + 2 < n)) throw PreconditionViolation("dual-form test needs index(J) < n - 2");
  for (const auto& s : field.singularities())
    if (field.region().kind() != Region::Kind::Unbounded && field.region().contains(s))
      throw SingularityInRegion("the region contains a singularity of the field");
  for (const auto& x : samples)
    if (norm(field.value(x)) < kNearSingular)
      throw SingularityInRegion("a sample point is a singularity of the field");

  const QuadraticFormField minus_g = g.negated();
  const VectorFieldModel reversed = field.reversed();
  SeparationOptions sep;
  sep.flow_derivative = !j.is_constant() || !g.is_constant();
  DualFormResult out;
  out.hyperbolic = !samples.empty();
  for (const auto& x : samples) {
    const Vector flow = field.value(x);
    const double speed2 = dot(flow, flow);
    out.forward.push_back(check_separation(j, field, x, std::nullopt, sep));
    out.backward.push_back(check_separation(minus_g, reversed, x, std::nullopt, sep));
    if (out.forward.back().verdict != SeparationVerdict::Strict ||
        out.backward.back().verdict != SeparationVerdict::Strict)
      out.hyperbolic = false;
    if (evaluate(j, x, flow) < -kConeTolerance * speed2) {
      out.hyperbolic = false;
      out.notes.push_back("J(X) < 0 at a sample");
    }
    if (evaluate(minus_g, x, flow) < -kConeTolerance * speed2) {
      out.hyperbolic = false;
      out.notes.push_back("-G(X) < 0 at a sample");
    }
  }
  return out;
}

}  // namespace cone_verify

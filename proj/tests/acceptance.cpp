// Acceptance suite: one PASS/FAIL line per criterion, with wall time.
// Exit status is the number of failing criteria (capped at 125).

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cone_verify/cocycle.hpp"
#include "cone_verify/driver.hpp"
#include "cone_verify/errors.hpp"
#include "cone_verify/fields.hpp"
#include "cone_verify/qforms.hpp"
#include "cone_verify/separation.hpp"
#include "cone_verify/splitting.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace cone_verify;
using nlohmann::json;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void criterion(const std::string& id, const std::string& title, double budget_s,
               const std::function<Verdict()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::string detail = v.detail;
  if (secs >= budget_s) {
    v.pass = false;
    detail += (detail.empty() ? "" : "; ") + std::string("over time budget");
  }
  if (!v.pass) ++failures;
  std::printf("%s %-4s %-58s %7.3f s / %4.1f s  %s\n", v.pass ? "PASS" : "FAIL", id.c_str(),
              title.c_str(), secs, budget_s, detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

QuadraticFormField diag(std::initializer_list<double> d) {
  const Vector v(d);
  return QuadraticFormField::diagonal(v);
}

const Vector kL{-3, -1, 2};

const VectorFieldModel& fixture() {
  static const VectorFieldModel f = builtin("linear_diag", kL);
  return f;
}

int run_cli(const std::string& args, std::string* out = nullptr) {
  const std::string cmd = std::string(CONE_VERIFY_EXE) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return -1;
  std::string text;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) text.append(buf, n);
  const int status = pclose(pipe);
  if (out) *out = text;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

const std::string kBox3 = "--field linear_diag --params=-3,-1,2 --region box:-1,1,-1,1,-1,1 --samples 50 --seed 1";

/// Random generator near diag(l) with the q smallest entries on the
/// negative side of J = diag(-1^q, 1^p).
Matrix perturbed_generator(const Vector& l, std::mt19937_64& rng, double eps) {
  Matrix a = eps * oracle::random_matrix(l.size(), rng);
  for (std::size_t i = 0; i < l.size(); ++i) a(i, i) += l[i];
  return a;
}

}  // namespace

int main() {
  std::printf("cone_verify acceptance suite\n");

  // -- 1: the three diagonal fixtures ----------------------------------------
  const Vector x1{0.3, -0.2, 0.5};
  const std::vector<Vector> origin{{0, 0, 0}};
  criterion("1a", "index-1 form: interval [-6,-2], Strict, PH contracting", 1.0, [&] {
    const auto j1 = diag({-1, 1, 1});
    const auto c = check_separation(j1, fixture(), x1);
    const auto cls = classify(j1, fixture(), origin).classification;
    const double tilde_min = min_eigenvalue(c.tilde);
    Verdict v;
    v.pass = near(c.interval.lower, -6, 1e-6) && near(c.interval.upper, -2, 1e-6) &&
             c.verdict == SeparationVerdict::Strict &&
             cls == Classification::PartiallyHyperbolicContracting && !(tilde_min > 0);
    v.detail = "[" + fmt("%.9g", c.interval.lower) + ", " + fmt("%.9g", c.interval.upper) + "] " +
               to_string(c.verdict) + " " + to_string(cls) + " min eig Jt " + fmt("%.3g", tilde_min);
    return v;
  });
  criterion("1b", "index-2 form: interval [-2,4], Jt > 0, Hyperbolic", 1.0, [&] {
    const auto j2 = diag({-1, -1, 1});
    const auto c = check_separation(j2, fixture(), x1);
    const auto cls = classify(j2, fixture(), origin).classification;
    const double tilde_min = min_eigenvalue(c.tilde);
    Verdict v;
    v.pass = near(c.interval.lower, -2, 1e-6) && near(c.interval.upper, 4, 1e-6) &&
             c.verdict == SeparationVerdict::Strict && tilde_min > 0 &&
             cls == Classification::Hyperbolic;
    v.detail = "[" + fmt("%.9g", c.interval.lower) + ", " + fmt("%.9g", c.interval.upper) + "] " +
               to_string(c.verdict) + " " + to_string(cls) + " min eig Jt " + fmt("%.3g", tilde_min);
    return v;
  });
  criterion("1c", "non-separating form: empty interval, Fail, exit 2", 1.0, [&] {
    const auto c = check_separation(diag({1, -1, 1}), fixture(), x1);
    const int code = run_cli("check-region " + kBox3 + " --form diag:1,-1,1 --out /dev/null");
    Verdict v;
    v.pass = c.interval.empty() && c.verdict == SeparationVerdict::Fail && code == 2;
    v.detail = std::string(c.interval.empty() ? "empty " : "non-empty ") + to_string(c.verdict) +
               " exit " + std::to_string(code);
    return v;
  });

  // -- 2: Lorenz linearization at the origin ---------------------------------
  criterion("2", "Lorenz origin: eigenvalues and interval [-16/3, 23.655]", 1.0, [&] {
    const auto lor = builtin("lorenz");
    const Matrix d = lor.jacobian(Vector{0, 0, 0});
    // Characteristic polynomial coefficients of a 3x3 matrix.
    const double a = -trace(d);
    const double b = d(0, 0) * d(1, 1) - d(0, 1) * d(1, 0) + d(0, 0) * d(2, 2) - d(0, 2) * d(2, 0) +
                     d(1, 1) * d(2, 2) - d(1, 2) * d(2, 1);
    const double c0 = -determinant(d);
    const Vector roots = oracle::cubic_roots(a, b, c0);
    std::vector<double> lib;
    for (auto e : eigenvalues(d)) lib.push_back(e.real());
    std::sort(lib.begin(), lib.end());
    const Vector expect{(-11 - std::sqrt(1201.0)) / 2, -8.0 / 3.0, (-11 + std::sqrt(1201.0)) / 2};
    bool eig_ok = true;
    for (int k = 0; k < 3; ++k) eig_ok = eig_ok && near(roots[k], expect[k], 1e-9) && near(lib[k], roots[k], 1e-9);
    const auto cert = check_separation(diag({-1, -1, 1}), fixtures::lorenz_adapted(), Vector{0, 0, 0});
    Verdict v;
    v.pass = eig_ok && cert.verdict == SeparationVerdict::Strict &&
             near(cert.interval.lower, 2 * expect[1], 1e-3) && near(cert.interval.upper, 2 * expect[2], 1e-3);
    v.detail = "eig {" + fmt("%.4f", lib[0]) + ", " + fmt("%.4f", lib[1]) + ", " + fmt("%.4f", lib[2]) +
               "} interval [" + fmt("%.6f", cert.interval.lower) + ", " + fmt("%.6f", cert.interval.upper) +
               "] " + to_string(cert.verdict);
    return v;
  });

  // -- 3: cocycle against the matrix exponential ------------------------------
  criterion("3", "cocycle matches exp(tA) at t=2 for 20 generators", 5.0, [&] {
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const Matrix a = oracle::random_matrix(3, rng);
      const auto f = builtin("linear_dense", Vector(a.data().begin(), a.data().end()));
      const auto traj = integrate_cocycle(f, Vector{0.1, -0.2, 0.3}, 2.0, 1e-3, false);
      worst = std::max(worst, oracle::relative_error(traj.final_fundamental(), oracle::expm(2.0 * a)));
    }
    return Verdict{worst <= 1e-6, "worst relative error " + fmt("%.3g", worst)};
  });

  // -- 4: derivative identity -------------------------------------------------
  criterion("4", "derivative identity on 100 random tuples (h=1e-5)", 5.0, [&] {
    std::mt19937_64 rng(404);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> c(-2.0, 2.0);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      VectorFieldModel f = builtin("lorenz");
      switch (k % 3) {
        case 0: break;
        case 1: {
          const Matrix a = oracle::random_matrix(3, rng);
          f = builtin("linear_dense", Vector(a.data().begin(), a.data().end()));
          break;
        }
        default:
          f = parse_field({std::to_string(c(rng)) + "*x1*x2 + sin(x3)", "tanh(x1) - x2^3",
                           "exp(x3/4)*cos(x1+x2)"});
      }
      const Matrix q = orthonormalize_columns(oracle::random_matrix(3, rng, 0.1));
      const Vector d{-(0.5 + std::abs(g(rng))), 0.5 + std::abs(g(rng)), (k % 2 ? -1.0 : 1.0) * (0.5 + std::abs(g(rng)))};
      const auto form = QuadraticFormField::constant(symmetrize(q * Matrix::diagonal(d) * q.transpose()));
      const Vector x{g(rng), g(rng), g(rng)};
      Vector v{g(rng), g(rng), g(rng)};
      const double vn = norm(v);
      for (double& c : v) c /= vn;
      const double r = derivative_residual(form, f, x, v, 1e-5);
      const double scale = 1.0 + std::abs(evaluate(tilde_j(form, f, x), v));
      worst = std::max(worst, r / scale);
    }
    return Verdict{worst <= 1e-3, "worst relative residual " + fmt("%.3g", worst)};
  });

  // -- 5: growth and quotient inequalities --------------------------------------
  criterion("5", "growth (lower) and quotient (upper) bounds, 50 fixtures", 10.0, [&] {
    std::mt19937_64 rng(505);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int fixtures_used = 0, growth_fail = 0, quotient_fail = 0, contracting = 0;
    double worst_growth = INFINITY, worst_quotient = INFINITY;
    while (fixtures_used < 50) {
      const std::size_t q = 1 + rng() % 2;
      Vector l(3), jd(3);
      // Negative side in [-4, -1]; the positive side sits above it by a gap
      // and may itself contract, as in partially hyperbolic fixtures.
      double top = -INFINITY;
      for (std::size_t i = 0; i < q; ++i) top = std::max(top, l[i] = -1.0 - 3.0 * u(rng));
      for (std::size_t i = 0; i < 3; ++i) {
        if (i >= q) l[i] = top + 0.5 + 3.5 * u(rng);
        jd[i] = i < q ? -1.0 : 1.0;
      }
      const Matrix a = perturbed_generator(l, rng, 0.2);
      const auto f = builtin("linear_dense", Vector(a.data().begin(), a.data().end()));
      const auto form = QuadraticFormField::diagonal(jd);
      const Vector x0{g(rng), g(rng), g(rng)};
      if (check_separation(form, f, x0).verdict != SeparationVerdict::Strict) continue;
      ++fixtures_used;
      const auto traj = integrate_cocycle(f, x0, 5.0, 1e-3, false);
      auto draw = [&](bool positive) {
        Vector z(3);
        do {
          for (std::size_t i = 0; i < 3; ++i) z[i] = (i < q) == positive ? 0.3 * g(rng) : g(rng);
        } while (positive ? evaluate(form, x0, z) <= 0 : evaluate(form, x0, z) >= 0);
        return z;
      };
      const Vector v = draw(true);
      const BoundCheck gb = verify_growth_bound(form, f, traj, v, DeltaChoice::Lower);
      // Over this horizon only vectors in the contracting bundle keep a
      // negative orbit; a long backward image of a random vector lands there.
      Vector w = oracle::expm(-20.0 * a) * draw(false);
      const double wn = norm(w);
      for (double& c : w) c /= wn;
      const BoundCheck qb = verify_quotient_bound(form, f, traj, w, v);
      contracting += check_separation(form, f, x0).interval.upper < 0.0;
      worst_growth = std::min(worst_growth, gb.margin);
      worst_quotient = std::min(worst_quotient, qb.margin);
      if (!gb.holds) ++growth_fail;
      if (!qb.holds) ++quotient_fail;
    }
    Verdict v;
    v.pass = growth_fail == 0 && quotient_fail == 0;
    v.detail = "growth violations " + std::to_string(growth_fail) + " (worst margin " + fmt("%.3g", worst_growth) +
               "), quotient violations " + std::to_string(quotient_fail) + " (worst margin " +
               fmt("%.3g", worst_quotient) + "); " + std::to_string(contracting) + " fixtures with r+ < 0";
    return v;
  });

  // -- 6: bundle extraction on conjugated systems -------------------------------
  criterion("6", "bundles of P diag(-3,-1,2) P^-1 and domination rate 3", 10.0, [&] {
    std::mt19937_64 rng(606);
    double worst_angle = 0.0, worst_rate_err = 0.0;
    BundleOptions o;
    o.dt = 1e-2;
    const Vector x0{0.1, 0.2, -0.1};
    for (int k = 0; k < 20; ++k) {
      Matrix p;
      do {
        p = oracle::random_matrix(3, rng, 2.0);
      } while (std::abs(determinant(p)) < 1.0);
      const Matrix pinv = inverse(p);
      const Matrix a = p * Matrix::diagonal(kL) * pinv;
      const auto f = builtin("linear_dense", Vector(a.data().begin(), a.data().end()));
      const auto j2 = QuadraticFormField::constant(
          symmetrize(pinv.transpose() * Matrix::diagonal(Vector{-1, -1, 1}) * pinv));
      const auto j1 = QuadraticFormField::constant(
          symmetrize(pinv.transpose() * Matrix::diagonal(Vector{-1, 1, 1}) * pinv));
      const Bundles b2 = extract_bundles(j2, f, x0, o);
      const Bundles b1 = extract_bundles(j1, f, x0, o);
      const Matrix e1 = p * Matrix::from_columns({{1, 0, 0}});
      const Matrix e12 = p * Matrix::from_columns({{1, 0, 0}, {0, 1, 0}});
      const Matrix e3 = p * Matrix::from_columns({{0, 0, 1}});
      const Matrix e23 = p * Matrix::from_columns({{0, 1, 0}, {0, 0, 1}});
      worst_angle = std::max({worst_angle, max_principal_angle(b2.f_minus, e12), max_principal_angle(b2.f_plus, e3),
                              max_principal_angle(b1.f_minus, e1), max_principal_angle(b1.f_plus, e23)});
      const auto traj = integrate_cocycle(f, x0, 5.0, 1e-2, false);
      const DominationFit fit = estimate_domination(traj, b2.f_minus, b2.f_plus);
      worst_rate_err = std::max(worst_rate_err, std::abs(fit.rate - 3.0) / 3.0);
    }
    Verdict v;
    v.pass = worst_angle <= 1e-6 && worst_rate_err <= 0.02;
    v.detail = "worst angle " + fmt("%.3g", worst_angle) + ", worst rate error " + fmt("%.3g", 100 * worst_rate_err) + "%";
    return v;
  });

  // -- 7: J-polar decomposition -------------------------------------------------
  criterion("7", "J-polar round trip, ordering, monotonicity cross-check", 10.0, [&] {
    std::mt19937_64 rng(707);
    std::normal_distribution<double> g(0.0, 1.0);
    double worst = 0.0;
    int order_bad = 0, disagreements = 0, monotone_cases = 0, made = 0;
    while (made < 500) {
      const std::size_t n = 2 + made % 3;
      const std::size_t q = 1 + (made / 3) % (n - 1);
      const auto s = fixtures::random_j_separated(n, q, rng);
      bool marginal = false;
      for (double d : s.d) marginal = marginal || std::abs(d - 1.0) < 0.05;
      if (marginal) continue;  // keep the sampled cross-check decidable
      ++made;
      const auto dec = j_polar_decompose(s.j, s.l);
      worst = std::max(worst, frobenius_norm(dec.r * dec.u - s.l) / frobenius_norm(s.l));
      for (std::size_t i = 1; i < n; ++i) order_bad += dec.spectrum[i - 1] > dec.spectrum[i];
      const bool spectral = dec.r_minus() < 1.0 && dec.r_plus() > 1.0;
      // Sampled strict monotonicity: J(Lv) > J(v) on every draw.
      bool sampled = true;
      double v[4], lv[4];
      for (int k = 0; k < 100000 && sampled; ++k) {
        for (std::size_t i = 0; i < n; ++i) v[i] = g(rng);
        double gain = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          lv[i] = 0.0;
          for (std::size_t c = 0; c < n; ++c) lv[i] += s.l(i, c) * v[c];
          gain += s.j(i, i) * (lv[i] * lv[i] - v[i] * v[i]);
        }
        sampled = gain > 0.0;
      }
      monotone_cases += spectral;
      disagreements += spectral != sampled;
    }
    Verdict v;
    v.pass = worst <= 1e-8 && order_bad == 0 && disagreements == 0;
    v.detail = "worst |RU-L|/|L| " + fmt("%.3g", worst) + ", ordering errors " + std::to_string(order_bad) +
               ", disagreements " + std::to_string(disagreements) + " (" + std::to_string(monotone_cases) +
               " monotone of 500)";
    return v;
  });

  // -- 8: sigma_d and composition inequalities ---------------------------------
  criterion("8", "sigma_d supermultiplicativity and r+-/r-- composition", 5.0, [&] {
    std::mt19937_64 rng(808);
    int violations = 0;
    double worst = INFINITY;
    for (int k = 0; k < 100; ++k) {
      const std::size_t n = 2 + k % 3;
      const std::size_t q = 1 + (k / 3) % (n - 1);
      const auto a = fixtures::random_j_separated(n, q, rng);
      auto b = fixtures::random_j_separated(n, q, rng);
      const auto da = j_polar_decompose(a.j, a.l), db = j_polar_decompose(a.j, b.l);
      const auto dab = j_polar_decompose(a.j, a.l * b.l);
      for (std::size_t d = 1; d <= n - q; ++d) {
        const double slack = sigma_d(dab, d) - sigma_d(da, d) * sigma_d(db, d);
        worst = std::min(worst, slack);
        violations += slack < -1e-9;
      }
      const double plus = dab.r_plus() - da.r_plus() * db.r_plus();
      const double minus = da.r_minus() * db.r_minus() - dab.r_minus();
      worst = std::min({worst, plus, minus});
      violations += plus < -1e-9;
      violations += minus < -1e-9;
    }
    return Verdict{violations == 0, "violations " + std::to_string(violations) + ", worst slack " + fmt("%.3g", worst)};
  });

  // -- 9: LPF monotonicity --------------------------------------------------------
  criterion("9", "LPF StrictlyMonotone on sphere points, Fail when reversed", 5.0, [&] {
    std::mt19937_64 rng(909);
    std::normal_distribution<double> g(0.0, 1.0);
    const auto j2 = diag({-1, -1, 1});
    const auto rev = fixture().reversed();
    int points = 0, strict = 0, reversed_fail = 0;
    double min_alpha = INFINITY;
    while (points < 100) {
      Vector x{g(rng), g(rng), g(rng)};
      const double r = norm(x);
      for (double& c : x) c /= r;
      const Vector flow = fixture().value(x);
      if (evaluate(j2, x, flow) <= 1e-10 * dot(flow, flow)) continue;
      ++points;
      const auto m = check_lpf_monotonicity(j2, fixture(), x);
      strict += m.verdict == MonotonicityVerdict::StrictlyMonotone && m.alpha1 > 0;
      min_alpha = std::min(min_alpha, m.alpha1);
      reversed_fail += check_lpf_monotonicity(j2, rev, x).verdict == MonotonicityVerdict::Fail;
    }
    return Verdict{strict == 100 && reversed_fail == 100,
                   std::to_string(strict) + "/100 strict (min alpha1 " + fmt("%.3g", min_alpha) + "), " +
                       std::to_string(reversed_fail) + "/100 reversed Fail"};
  });

  // -- 10: cone-image shrinkage ---------------------------------------------------
  criterion("10a", "cone-image contraction < 1 at T=1 on separated fixtures", 5.0, [&] {
    const Vector x0{0.1, 0.1, 0.1};
    const Matrix p{{1, 0.4, -0.3}, {0.2, 1, 0.5}, {-0.1, 0.3, 1}};
    const Matrix pinv = inverse(p);
    const Matrix a = p * Matrix::diagonal(kL) * pinv;
    const auto conj = builtin("linear_dense", Vector(a.data().begin(), a.data().end()));
    double worst = 0.0;
    for (const auto& j : {Vector{-1, 1, 1}, Vector{-1, -1, 1}}) {
      worst = std::max(worst, cone_image_contraction(QuadraticFormField::diagonal(j), fixture(), x0, 1.0, 100, 1, 1e-2));
      const auto cj = QuadraticFormField::constant(symmetrize(pinv.transpose() * Matrix::diagonal(j) * pinv));
      worst = std::max(worst, cone_image_contraction(cj, conj, x0, 1.0, 100, 1, 1e-2));
    }
    return Verdict{worst < 1.0, "largest ratio " + fmt("%.4f", worst)};
  });
  criterion("10b", "index-1 diagonal fixture: ratio <= e^-3 + 1e-3", 5.0, [&] {
    const double r = cone_image_contraction(diag({-1, 1, 1}), fixture(), Vector{0.1, 0.1, 0.1}, 1.0, 200, 1, 1e-3);
    const double bound = std::exp(-3.0) + 1e-3;
    return Verdict{r <= bound, "ratio " + fmt("%.5f", r) + " vs bound " + fmt("%.5f", bound) +
                                   " (e^-2 = " + fmt("%.5f", std::exp(-2.0)) + ")"};
  });

  // -- 11: constant-field negative control --------------------------------------
  criterion("11", "constant field: NonStrict everywhere, exit 3", 1.0, [&] {
    std::string out;
    const int code = run_cli("check-region --field saddle_suspension_constant --form diag:-1,1 "
                             "--region box:-1,1,-1,1 --samples 50 --seed 1", &out);
    const json report = json::parse(out);
    int nonstrict = 0;
    for (const auto& s : report.at("samples")) nonstrict += s.at("verdict") == "NonStrict";
    const std::size_t total = report.at("samples").size();
    return Verdict{code == 3 && nonstrict == static_cast<int>(total) && total == 50,
                   std::to_string(nonstrict) + "/" + std::to_string(total) + " NonStrict, exit " + std::to_string(code)};
  });

  // -- 12: determinism -------------------------------------------------------------
  criterion("12", "identical config and seed give identical hashes", 2.0, [&] {
    std::string a, b;
    const std::string args = "check-region " + kBox3 + " --form diag:-1,-1,1 --lpf";
    run_cli(args + " --threads 1", &a);
    run_cli(args + " --threads 2", &b);
    const std::string ha = json::parse(a).at("determinism_hash"), hb = json::parse(b).at("determinism_hash");
    return Verdict{ha == hb, ha.substr(0, 16) + (ha == hb ? " == " : " != ") + hb.substr(0, 16)};
  });

  std::printf("%d criteria failed\n", failures);
  return std::min(failures, 125);
}

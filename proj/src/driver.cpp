#include "cone_verify/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <variant>

#include "cone_verify/errors.hpp"
#include "cone_verify/cocycle.hpp"
#include "cone_verify/fields.hpp"
#include "cone_verify/qforms.hpp"
#include "cone_verify/separation.hpp"
#include "cone_verify/splitting.hpp"

namespace cone_verify {

using nlohmann::json;

json RunConfig::to_json() const {
  json j{{"command", command},
         {"field", field},
         {"form", form},
         {"form2", form2},
         {"sampling",
          {{"strategy", to_string(sampling.strategy)},
           {"count", sampling.count},
           {"seed", sampling.seed},
           {"skip_singularity_radius", sampling.skip_singularity_radius}}},
         {"tol", tol},
         {"horizon", horizon},
         {"dt", dt},
         {"block_time", block_time},
         {"lpf", lpf},
         {"classify", classify},
         {"nonneg", nonneg}};
  j["point"] = point ? json(*point) : json(nullptr);
  return j;
}

json catalog_json() {
  json out = json::array();
  for (const auto& b : builtin_catalog())
    out.push_back({{"name", b.name}, {"parameters", b.parameters}, {"summary", b.summary}});
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct Setup {
  VectorFieldModel field;
  std::optional<QuadraticFormField> form;
  SeparationOptions separation;
  std::vector<Vector> samples;
  std::vector<std::string> notes;
};

ReportDocument start_report(const RunConfig& config) {
  ReportDocument r;
  r.command = config.command;
  r.config = config.to_json();
  r.seed = config.sampling.seed;
  return r;
}

BundleOptions bundle_options(const RunConfig& config) {
  BundleOptions o;
  o.block_time = config.block_time;
  o.dt = config.dt;
  return o;
}

QuadraticFormField resolve_form(const std::string& spec, const VectorFieldModel& field,
                                const std::vector<Vector>& points, const RunConfig& config,
                                std::vector<std::string>& notes) {
  if (spec.empty()) throw ConfigError("a form is required (--form)");
  FormSpec parsed = parse_form_spec(spec);
  if (auto* f = std::get_if<QuadraticFormField>(&parsed)) {
    if (f->dimension() != field.dimension())
      throw ConfigError("form dimension " + std::to_string(f->dimension()) +
                        " differs from field dimension " + std::to_string(field.dimension()));
    return *f;
  }
  const std::size_t q = std::get<AdaptedFormRequest>(parsed).index;
  if (q == 0 || q >= field.dimension()) throw ConfigError("adapted index must satisfy 0 < q < n");
  std::vector<BundleSample> samples;
  // Backward orbits of points off the attractor can blow up in finite time;
  // such samples are retried at their forward image after a settling time.
  const double settle = std::min(config.horizon, 10.0);
  std::size_t settled = 0;
  for (const auto& x : points) {
    try {
      const Bundles b = extract_bundles(field, x, q, bundle_options(config));
      samples.push_back({x, b.f_minus, b.f_plus});
      continue;
    } catch (const Error&) {
    }
    try {
      const Vector y = integrate_cocycle(field, x, settle, config.dt, false).final_state();
      const Bundles b = extract_bundles(field, y, q, bundle_options(config));
      samples.push_back({y, b.f_minus, b.f_plus});
      ++settled;
    } catch (const Error& e) {
      notes.push_back(std::string("adapted form: sample skipped: ") + e.what());
    }
  }
  if (settled > 0)
    notes.push_back("adapted form: " + std::to_string(settled) +
                    " samples replaced by their image after t = " + std::to_string(settle));
  if (samples.empty())
    throw ConfigError("adapted form: no sample produced a splitting" +
                      (notes.empty() ? std::string() : " (" + notes.back() + ")"));
  notes.push_back("adapted form built from " + std::to_string(samples.size()) +
                  " samples; flow-derivative term enabled");
  return build_adapted_form(samples);
}

Setup prepare(const RunConfig& config, bool need_samples, bool need_form) {
  Setup s{load_field_config(config.field), std::nullopt, {}, {}, {}};
  if (need_samples) {
    s.samples = sample_region(s.field, config.sampling);
  } else if (config.point) {
    s.samples = {*config.point};
  }
  for (const auto& x : s.samples)
    if (x.size() != s.field.dimension()) throw ConfigError("point dimension differs from field");
  if (need_form) {
    s.form = resolve_form(config.form, s.field, s.samples, config, s.notes);
    s.separation.flow_derivative = !s.form->is_constant();
    if (!s.form->is_constant() && s.notes.empty())
      s.notes.push_back("form varies with the point; flow-derivative term enabled");
  }
  return s;
}

json lpf_digest(const QuadraticFormField& form, const VectorFieldModel& field, const Vector& x) {
  try {
    return check_lpf_monotonicity(form, field, x).to_json();
  } catch (const SingularPoint&) {
    return json{{"verdict", "Skipped"}, {"note", "singular point"}};
  } catch (const FlowDirectionNotPositive&) {
    return json{{"verdict", "Inapplicable"}, {"note", "flow direction not in the positive cone"}};
  }
}

struct SampleOutcome {
  json digest;
  std::string verdict;
  double flow_value = 0.0;  // J(X) / |X|^2, 0 at singular points
};

SampleOutcome evaluate_sample(const Setup& s, const Vector& x, bool lpf) {
  SampleOutcome out;
  try {
    const auto cert = check_separation(*s.form, s.field, x, std::nullopt, s.separation);
    out.digest = cert.to_json();
    out.verdict = to_string(cert.verdict);
    const Vector flow = s.field.value(x);
    const double speed2 = dot(flow, flow);
    const double value = evaluate(*s.form, x, flow);
    out.flow_value = speed2 > 0.0 ? value / speed2 : 0.0;
    out.digest["flow_form_value"] = value;
    if (lpf) out.digest["lpf"] = lpf_digest(*s.form, s.field, x);
  } catch (const Error& e) {
    out.digest = json{{"x", x}, {"verdict", "Degenerate"}, {"note", e.what()}};
    out.verdict = "Degenerate";
  }
  return out;
}

std::vector<SampleOutcome> evaluate_samples(const Setup& s, bool lpf, unsigned threads) {
  std::vector<SampleOutcome> out(s.samples.size());
  parallel_for(
      s.samples.size(), [&](std::size_t i) { out[i] = evaluate_sample(s, s.samples[i], lpf); },
      threads);
  return out;
}

std::vector<Vector> classification_points(const Setup& s) {
  std::vector<Vector> points;
  for (const auto& sing : s.field.singularities())
    if (s.field.region().contains(sing)) points.push_back(sing);
  for (const auto& x : s.samples) points.push_back(x);
  return points;
}

ClassifyOptions classify_options(const RunConfig& config, const Setup& s) {
  ClassifyOptions o;
  o.horizon = config.horizon;
  o.dt = config.dt;
  o.seed = config.sampling.seed;
  o.bundles = bundle_options(config);
  o.separation = s.separation;
  return o;
}

int separation_exit(ReportDocument& report, const std::vector<SampleOutcome>& outcomes,
                    const RunConfig& config) {
  std::vector<std::string> verdicts;
  for (const auto& o : outcomes) verdicts.push_back(o.verdict);
  report.aggregate_verdict = aggregate_verdict(verdicts);

  for (const auto& o : outcomes)
    if (o.verdict == "Fail") {
      report.counterexample = {{"kind", "separation"}, {"sample", o.digest}};
      return kExitCounterexample;
    }
  if (config.nonneg)
    for (const auto& o : outcomes)
      if (o.verdict != "Degenerate" && o.flow_value < -config.tol) {
        report.counterexample = {{"kind", "flow_direction"}, {"sample", o.digest}};
        return kExitCounterexample;
      }
  bool lpf_all_strict = true;
  if (config.lpf)
    for (const auto& o : outcomes) {
      if (!o.digest.contains("lpf")) continue;
      const std::string v = o.digest.at("lpf").at("verdict").get<std::string>();
      if (v == "Fail") {
        report.counterexample = {{"kind", "lpf_monotonicity"}, {"sample", o.digest}};
        return kExitCounterexample;
      }
      if (v == "Monotone") lpf_all_strict = false;
    }
  if (report.aggregate_verdict != "Strict" || !lpf_all_strict) return kExitInconclusive;
  return kExitOk;
}

}  // namespace

RunResult run_check_point(const RunConfig& config) {
  const auto t0 = Clock::now();
  if (!config.point) throw ConfigError("check-point needs a point");
  RunResult result{start_report(config), kExitOk};
  const Setup s = prepare(config, false, true);
  const auto outcomes = evaluate_samples(s, config.lpf, 1);
  for (const auto& o : outcomes) result.report.samples.push_back(o.digest);
  result.report.notes = s.notes;
  result.exit_code = separation_exit(result.report, outcomes, config);
  result.report.timing["total_ms"] = elapsed_ms(t0);
  return result;
}

RunResult run_check_region(const RunConfig& config) {
  const auto t0 = Clock::now();
  RunResult result{start_report(config), kExitOk};
  Setup s = prepare(config, true, true);
  result.report.timing["setup_ms"] = elapsed_ms(t0);

  const auto t1 = Clock::now();
  const auto outcomes = evaluate_samples(s, config.lpf, config.threads);
  for (const auto& o : outcomes) result.report.samples.push_back(o.digest);
  result.report.timing["samples_ms"] = elapsed_ms(t1);
  result.exit_code = separation_exit(result.report, outcomes, config);

  if (!config.form2.empty()) {
    const QuadraticFormField g = resolve_form(config.form2, s.field, s.samples, config, s.notes);
    const DualFormResult dual = dual_form_hyperbolicity(*s.form, g, s.field, s.samples);
    result.report.results["dual_form"] = dual.to_json();
  }
  if (config.classify) {
    const auto t2 = Clock::now();
    const ClassificationReport c =
        classify(*s.form, s.field, classification_points(s), classify_options(config, s));
    result.report.results["classification"] = c.to_json();
    result.report.timing["classify_ms"] = elapsed_ms(t2);
  }
  result.report.notes = s.notes;
  result.report.timing["total_ms"] = elapsed_ms(t0);
  return result;
}

RunResult run_classify(const RunConfig& config) {
  const auto t0 = Clock::now();
  RunResult result{start_report(config), kExitOk};
  const Setup s = prepare(config, true, true);
  const ClassificationReport c =
      classify(*s.form, s.field, classification_points(s), classify_options(config, s));
  std::vector<std::string> verdicts;
  for (const auto& cert : c.input.certificates) {
    result.report.samples.push_back(cert.to_json());
    verdicts.push_back(to_string(cert.verdict));
  }
  result.report.aggregate_verdict = aggregate_verdict(verdicts);
  result.report.results["classification"] = c.to_json();
  result.report.notes = s.notes;
  result.report.notes.insert(result.report.notes.end(), c.notes.begin(), c.notes.end());
  result.exit_code =
      c.classification == Classification::Inconclusive ? kExitInconclusive : kExitOk;
  result.report.timing["total_ms"] = elapsed_ms(t0);
  return result;
}

RunResult run_extract_splitting(const RunConfig& config) {
  const auto t0 = Clock::now();
  RunResult result{start_report(config), kExitOk};
  const Setup s = prepare(config, !config.point.has_value(), true);

  struct Job {
    std::optional<BundleSample> sample;
    std::optional<DominationFit> fit;
    std::string error;
  };
  std::vector<Job> jobs(s.samples.size());
  const BundleOptions options = bundle_options(config);
  parallel_for(
      s.samples.size(),
      [&](std::size_t i) {
        const Vector& x = s.samples[i];
        try {
          const Bundles b = extract_bundles(*s.form, s.field, x, options);
          jobs[i].sample = BundleSample{x, b.f_minus, b.f_plus};
          const TrajectoryCocycle traj = integrate_cocycle(s.field, x, config.horizon, config.dt, false);
          jobs[i].fit = estimate_domination(traj, b.f_minus, b.f_plus);
        } catch (const Error& e) {
          jobs[i].error = e.what();
        }
      },
      config.threads);

  SplittingEstimate estimate;
  double rate = INFINITY, constant = 0.0;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!jobs[i].sample) {
      result.report.notes.push_back("sample " + std::to_string(i) + " skipped: " + jobs[i].error);
      continue;
    }
    estimate.samples.push_back(*jobs[i].sample);
    if (jobs[i].fit->rate < rate) {
      rate = jobs[i].fit->rate;
      constant = jobs[i].fit->constant;
    }
  }
  result.report.notes.insert(result.report.notes.begin(), s.notes.begin(), s.notes.end());
  if (estimate.samples.empty()) {
    result.report.aggregate_verdict = "Inconclusive";
    result.exit_code = kExitInconclusive;
    result.report.timing["total_ms"] = elapsed_ms(t0);
    return result;
  }
  estimate.domination_rate = rate;
  estimate.fit_constant = constant;
  estimate.flow_in_plus = flow_direction_check(s.field, estimate, 1e-3);
  if (config.classify) {
    const ClassificationReport c =
        classify(*s.form, s.field, classification_points(s), classify_options(config, s));
    estimate.classification = c.classification;
    result.report.results["classification"] = c.to_json();
  } else {
    estimate.classification = rate > 0.0 ? Classification::DominatedOnly : Classification::None;
    result.report.notes.push_back(
        "classification from the domination rate only; pass --classify for the full pipeline");
  }
  result.report.results["splitting"] = estimate.to_json();
  result.report.aggregate_verdict = estimate.samples.size() == s.samples.size() ? "Strict" : "NonStrict";
  result.exit_code = estimate.samples.size() == s.samples.size() ? kExitOk : kExitInconclusive;
  result.report.timing["total_ms"] = elapsed_ms(t0);
  return result;
}

RunResult run_lpf_check(const RunConfig& config) {
  const auto t0 = Clock::now();
  RunResult result{start_report(config), kExitOk};
  const Setup s = prepare(config, !config.point.has_value(), true);
  std::vector<json> digests(s.samples.size());
  parallel_for(
      s.samples.size(),
      [&](std::size_t i) {
        json d = lpf_digest(*s.form, s.field, s.samples[i]);
        d["x"] = s.samples[i];
        digests[i] = std::move(d);
      },
      config.threads);

  std::vector<std::string> verdicts;
  bool failed = false;
  for (std::size_t i = 0; i < digests.size(); ++i) {
    const std::string v = digests[i].at("verdict").get<std::string>();
    result.report.samples.push_back({{"x", s.samples[i]}, {"lpf", digests[i]}});
    if (v == "Skipped" || v == "Inapplicable") {
      result.report.notes.push_back("sample " + std::to_string(i) + ": " +
                                    digests[i].at("note").get<std::string>());
      continue;
    }
    verdicts.push_back(v == "StrictlyMonotone" ? "Strict" : v == "Monotone" ? "NonStrict" : "Fail");
    if (v == "Fail" && !failed) {
      failed = true;
      result.report.counterexample = {{"kind", "lpf_monotonicity"}, {"sample", digests[i]}};
    }
  }
  result.report.notes.insert(result.report.notes.begin(), s.notes.begin(), s.notes.end());
  result.report.aggregate_verdict = aggregate_verdict(verdicts);
  if (failed) {
    result.exit_code = kExitCounterexample;
  } else if (result.report.aggregate_verdict != "Strict") {
    result.exit_code = kExitInconclusive;
  }
  result.report.timing["total_ms"] = elapsed_ms(t0);
  return result;
}

RunResult run(const RunConfig& config) {
  if (config.command == "check-point") return run_check_point(config);
  if (config.command == "check-region") return run_check_region(config);
  if (config.command == "classify") return run_classify(config);
  if (config.command == "extract-splitting") return run_extract_splitting(config);
  if (config.command == "lpf-check") return run_lpf_check(config);
  throw ConfigError("unknown command '" + config.command + "'");
}

}  // namespace cone_verify

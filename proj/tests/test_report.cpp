#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <sstream>

#include "cone_verify/driver.hpp"
#include "cone_verify/errors.hpp"
#include "cone_verify/fields.hpp"
#include "cone_verify/report.hpp"
#include "cone_verify/sampling.hpp"

using namespace cone_verify;
using nlohmann::json;

namespace {

RunConfig region_config(const std::string& form, std::vector<double> params = {-3, -1, 2}) {
  RunConfig c;
  c.command = "check-region";
  c.field = {{"field", {{"builtin", "linear_diag"}, {"params", params}}},
             {"region", Region::parse("box:-1,1,-1,1,-1,1").to_json()}};
  c.form = form;
  c.sampling.count = 20;
  c.sampling.seed = 7;
  return c;
}

}  // namespace

TEST_CASE("random sampling is reproducible and stays in the region") {
  const auto f = builtin("lorenz").with_region(Region::parse("ball:0,0,27,45"));
  RegionSamplingPlan plan;
  plan.count = 200;
  plan.seed = 99;
  plan.skip_singularity_radius = 5.0;
  const auto a = sample_region(f, plan), b = sample_region(f, plan);
  CHECK(a == b);
  CHECK(a.size() == 200);
  for (const auto& x : a) {
    CHECK(f.region().contains(x));
    for (const auto& s : f.singularities()) CHECK(norm(x - s) >= 5.0);
  }
  plan.seed = 100;
  CHECK(sample_region(f, plan) != a);
}

TEST_CASE("grid sampling") {
  const auto f = builtin("linear_diag", Vector{-1, 1}).with_region(Region::parse("box:0,1,0,2"));
  RegionSamplingPlan plan;
  plan.strategy = SamplingStrategy::Grid;
  plan.count = 9;
  const auto pts = sample_region(f, plan);
  CHECK(pts.size() == 9);
  CHECK(pts.front() == Vector{0, 0});
  CHECK(pts.back() == Vector{1, 2});
  plan.skip_singularity_radius = 0.1;
  CHECK(sample_region(f, plan).size() == 8);
  CHECK_THROWS_AS(sample_region(builtin("lorenz"), plan), ConfigError);
  CHECK(sampling_strategy_from_string("grid") == SamplingStrategy::Grid);
  CHECK_THROWS_AS(sampling_strategy_from_string("sobol"), ConfigError);
}

TEST_CASE("parallel_for visits every index once and rethrows") {
  std::vector<std::atomic<int>> hits(500);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; }, 4);
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) { if (i == 3) throw ConfigError("boom"); }, 3),
                  ConfigError);
  setenv("CONE_VERIFY_THREADS", "3", 1);
  CHECK(worker_count() == 3);
  unsetenv("CONE_VERIFY_THREADS");
}

TEST_CASE("aggregate verdicts") {
  CHECK(aggregate_verdict({}) == "Inconclusive");
  CHECK(aggregate_verdict({"Strict", "Strict"}) == "Strict");
  CHECK(aggregate_verdict({"Strict", "NonStrict"}) == "NonStrict");
  CHECK(aggregate_verdict({"Strict", "Degenerate"}) == "NonStrict");
  CHECK(aggregate_verdict({"NonStrict", "Fail"}) == "Fail");
}

TEST_CASE("empty report") {
  ReportDocument r;
  r.command = "check-region";
  const json j = json::parse(render_report(r, ReportFormat::Json));
  CHECK(j.at("samples").empty());
  CHECK(j.at("aggregate_verdict") == "Inconclusive");
  CHECK(j.contains("determinism_hash"));
}

TEST_CASE("CSV report rows") {
  ReportDocument r;
  r.samples.push_back({{"x", {0.5, 1.0}}, {"r_minus", -1.0}, {"r_plus", 2.0}, {"delta", 0.5},
                       {"margin", 1.0}, {"verdict", "Strict"}});
  r.samples.push_back({{"x", {0.25, 1.0}}, {"r_minus", nullptr}, {"r_plus", nullptr}, {"delta", 0.5},
                       {"margin", -1.0}, {"verdict", "Fail"}, {"note", "a, b"}});
  const std::string csv = render_report(r, ReportFormat::Csv);
  std::istringstream in(csv);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "index,x1,x2,r_minus,r_plus,delta,margin,verdict,lpf_verdict,alpha1,note");
  CHECK(lines[1] == "0,0.5,1,-1,2,0.5,1,Strict,,,");
  CHECK(lines[2] == "1,0.25,1,,,0.5,-1,Fail,,,a; b");
}

TEST_CASE("JSON round trip and hash stability") {
  const RunResult res = run(region_config("diag:-1,-1,1"));
  const json j = json::parse(render_report(res.report, ReportFormat::Json));
  const ReportDocument back = ReportDocument::from_json(j);
  CHECK(back == res.report);
  CHECK(determinism_hash(back) == j.at("determinism_hash").get<std::string>());
  // Timing is excluded from the hash.
  ReportDocument other = back;
  other.timing["total_ms"] = 12345.0;
  CHECK(determinism_hash(other) == determinism_hash(back));
  other.notes.push_back("changed");
  CHECK(determinism_hash(other) != determinism_hash(back));
}

TEST_CASE("check-region exit codes on the fixtures") {
  const RunResult strict = run(region_config("diag:-1,-1,1"));
  CHECK(strict.exit_code == kExitOk);
  CHECK(strict.report.aggregate_verdict == "Strict");
  CHECK(strict.report.samples.size() == 20);

  const RunResult fail = run(region_config("diag:1,-1,1"));
  CHECK(fail.exit_code == kExitCounterexample);
  CHECK(fail.report.counterexample.at("kind") == "separation");
  CHECK(fail.report.counterexample.at("sample").at("r_minus").is_null());

  RunConfig null = region_config("diag:-1,1");
  null.field = {{"field", {{"expr", {"0", "1"}}}}, {"region", Region::parse("box:-1,1,-1,1").to_json()}};
  const RunResult ns = run(null);
  CHECK(ns.exit_code == kExitInconclusive);
  CHECK(ns.report.aggregate_verdict == "NonStrict");

  RunConfig none = region_config("diag:-1,-1,1");
  none.sampling.count = 0;
  const RunResult empty = run(none);
  CHECK(empty.exit_code == kExitInconclusive);
  CHECK(empty.report.aggregate_verdict == "Inconclusive");
}

TEST_CASE("check-region options") {
  SUBCASE("nonneg turns a negative flow direction into a counterexample") {
    RunConfig c = region_config("diag:-1,-1,1");
    c.nonneg = true;
    const RunResult r = run(c);
    CHECK(r.exit_code == kExitCounterexample);
    CHECK(r.report.counterexample.at("kind") == "flow_direction");
  }
  SUBCASE("lpf digests are attached") {
    RunConfig c = region_config("diag:-1,-1,1");
    c.lpf = true;
    const RunResult r = run(c);
    bool any_lpf = false;
    for (const auto& s : r.report.samples) any_lpf = any_lpf || s.contains("lpf");
    CHECK(any_lpf);
    CHECK(r.exit_code == kExitOk);
  }
  SUBCASE("classification is attached") {
    RunConfig c = region_config("diag:-1,-1,1");
    c.classify = true;
    c.horizon = 5.0;
    c.dt = 1e-2;
    const RunResult r = run(c);
    CHECK(r.report.results.at("classification").at("classification") == "Hyperbolic");
  }
  SUBCASE("configuration errors") {
    CHECK_THROWS_AS(run(region_config("diag:-1,1")), ConfigError);
    CHECK_THROWS_AS(run(region_config("nonsense")), ConfigError);
    RunConfig c = region_config("diag:-1,-1,1");
    c.command = "bogus";
    CHECK_THROWS_AS(run(c), ConfigError);
  }
}

TEST_CASE("determinism across thread counts") {
  RunConfig a = region_config("diag:-1,-1,1");
  a.threads = 1;
  RunConfig b = a;
  b.threads = 4;
  CHECK(determinism_hash(run(a).report) == determinism_hash(run(b).report));
}

TEST_CASE("other commands") {
  RunConfig point = region_config("diag:-1,-1,1");
  point.command = "check-point";
  point.point = Vector{0.2, 0.3, 0.4};
  point.lpf = true;
  const RunResult p = run(point);
  CHECK(p.exit_code == kExitOk);
  REQUIRE(p.report.samples.size() == 1);
  CHECK(p.report.samples[0].contains("lpf"));
  point.form = "diag:-1,1,1";
  const RunResult p1 = run(point);
  CHECK(p1.exit_code == kExitCounterexample);
  CHECK(p1.report.counterexample.at("kind") == "lpf_monotonicity");

  RunConfig lpf = region_config("diag:-1,-1,1");
  lpf.command = "lpf-check";
  const RunResult l = run(lpf);
  CHECK(l.exit_code != kExitUsage);
  CHECK(l.report.samples.size() == 20);

  RunConfig split = region_config("diag:-1,1,1");
  split.command = "extract-splitting";
  split.sampling.count = 3;
  split.horizon = 3.0;
  split.dt = 1e-2;
  const RunResult s = run(split);
  CHECK(s.exit_code == kExitOk);
  CHECK(s.report.results.at("splitting").at("domination_rate").get<double>() ==
        doctest::Approx(2.0).epsilon(1e-3));

  RunConfig cls = region_config("diag:-1,1,1");
  cls.command = "classify";
  cls.sampling.count = 2;
  cls.horizon = 10.0;
  cls.dt = 1e-2;
  const RunResult c = run(cls);
  CHECK(c.report.results.at("classification").at("classification") == "PartiallyHyperbolicContracting");

  CHECK(catalog_json().size() == 4);
}

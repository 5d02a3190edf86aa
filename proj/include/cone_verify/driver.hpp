#pragma once

// Subcommand orchestration shared by the CLI and the tests.

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "cone_verify/report.hpp"
#include "cone_verify/sampling.hpp"

namespace cone_verify {

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitCounterexample = 2;
inline constexpr int kExitInconclusive = 3;

struct RunConfig {
  /// check-point, check-region, classify, extract-splitting, lpf-check.
  std::string command;
  /// {"field": {...}, "region": {...}, "singularities": [...]}
  nlohmann::json field = nlohmann::json::object();
  /// Form specification ("diag:...", "matrix:[...]", "adapted[:q]").
  std::string form;
  /// Second form for the dual-form test; empty when unused.
  std::string form2;
  RegionSamplingPlan sampling;
  /// Relative tolerance for the J(X) >= -tol |X|^2 check.
  double tol = 1e-10;
  double horizon = 50.0;
  double dt = 1e-3;
  /// Block time for bundle extraction.
  double block_time = 1.0;
  bool lpf = false;
  bool classify = false;
  /// Flow-direction mode: J(X) < -tol |X|^2 at a sample counts as a counterexample.
  bool nonneg = false;
  std::optional<Vector> point;
  unsigned threads = 0;

  /// Echo stored in the report (no thread count, no output path).
  nlohmann::json to_json() const;
};

struct RunResult {
  ReportDocument report;
  int exit_code = kExitOk;
};

/// Dispatches on config.command. Configuration problems raise Error
/// (ConfigError, ParseError, ...), which callers map to exit code 1.
RunResult run(const RunConfig& config);

RunResult run_check_point(const RunConfig& config);
RunResult run_check_region(const RunConfig& config);
RunResult run_classify(const RunConfig& config);
RunResult run_extract_splitting(const RunConfig& config);
RunResult run_lpf_check(const RunConfig& config);

/// Catalog of builtin fields as JSON.
nlohmann::json catalog_json();

}  // namespace cone_verify

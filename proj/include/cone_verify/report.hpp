#pragma once

// Report documents: JSON/CSV emission and the determinism hash.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace cone_verify {

inline constexpr const char* kToolVersion = "0.1.0";

enum class ReportFormat { Json, Csv };
ReportFormat report_format_from_string(const std::string& s);

struct ReportDocument {
  std::string tool_version = kToolVersion;
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;
  /// One digest per sample: separation fields {x, r_minus, r_plus, delta,
  /// margin, verdict} plus optional "lpf", "flow_form_value", "note".
  std::vector<nlohmann::json> samples;
  /// Strict, NonStrict, Fail or Inconclusive.
  std::string aggregate_verdict = "Inconclusive";
  nlohmann::json counterexample = nullptr;
  /// Command-specific results (classification, splitting estimate, ...).
  nlohmann::json results = nlohmann::json::object();
  std::vector<std::string> notes;
  /// Wall-clock data; excluded from the determinism hash.
  nlohmann::json timing = nlohmann::json::object();

  /// Includes "determinism_hash".
  nlohmann::json to_json() const;
  static ReportDocument from_json(const nlohmann::json& j);

  bool operator==(const ReportDocument& other) const;
};

/// Hex SHA-256 of the canonical JSON text without timing.
std::string determinism_hash(const ReportDocument& report);

/// Aggregate of per-sample separation verdicts: Inconclusive if empty, Fail
/// if any Fail, Strict if all Strict, else NonStrict.
std::string aggregate_verdict(const std::vector<std::string>& verdicts);

/// Canonical text: JSON with sorted keys, or CSV with one row per sample.
std::string render_report(const ReportDocument& report, ReportFormat format);
/// Writes render_report to path ("-" for stdout). Throws Error on I/O failure.
void emit_report(const ReportDocument& report, ReportFormat format, const std::string& path);

}  // namespace cone_verify

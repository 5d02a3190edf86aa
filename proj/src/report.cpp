#include "cone_verify/report.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cone_verify/errors.hpp"

namespace cone_verify {

using nlohmann::json;

ReportFormat report_format_from_string(const std::string& s) {
  if (s == "json") return ReportFormat::Json;
  if (s == "csv") return ReportFormat::Csv;
  throw ConfigError("unknown report format '" + s + "' (json or csv)");
}

namespace {

json hashed_part(const ReportDocument& r) {
  return json{{"tool_version", r.tool_version},
              {"command", r.command},
              {"config", r.config},
              {"seed", r.seed},
              {"samples", r.samples},
              {"sample_count", r.samples.size()},
              {"aggregate_verdict", r.aggregate_verdict},
              {"counterexample", r.counterexample},
              {"results", r.results},
              {"notes", r.notes}};
}

std::string sha256_hex(const std::string& text) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &length, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 computation failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

std::string csv_number(const json& v) {
  if (!v.is_number()) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
  return buf;
}

std::string csv_text(const json& v) {
  if (!v.is_string()) return "";
  return v.get<std::string>();
}

}  // namespace

json ReportDocument::to_json() const {
  json j = hashed_part(*this);
  j["timing"] = timing;
  j["determinism_hash"] = determinism_hash(*this);
  return j;
}

ReportDocument ReportDocument::from_json(const json& j) {
  ReportDocument r;
  r.tool_version = j.at("tool_version").get<std::string>();
  r.command = j.at("command").get<std::string>();
  r.config = j.at("config");
  r.seed = j.at("seed").get<std::uint64_t>();
  r.samples = j.at("samples").get<std::vector<json>>();
  r.aggregate_verdict = j.at("aggregate_verdict").get<std::string>();
  r.counterexample = j.at("counterexample");
  r.results = j.at("results");
  r.notes = j.at("notes").get<std::vector<std::string>>();
  if (j.contains("timing")) r.timing = j.at("timing");
  return r;
}

bool ReportDocument::operator==(const ReportDocument& other) const {
  return hashed_part(*this) == hashed_part(other) && timing == other.timing;
}

std::string determinism_hash(const ReportDocument& report) {
  return sha256_hex(hashed_part(report).dump());
}

std::string aggregate_verdict(const std::vector<std::string>& verdicts) {
  if (verdicts.empty()) return "Inconclusive";
  bool all_strict = true;
  for (const auto& v : verdicts) {
    if (v == "Fail") return "Fail";
    if (v != "Strict") all_strict = false;
  }
  return all_strict ? "Strict" : "NonStrict";
}

std::string render_report(const ReportDocument& report, ReportFormat format) {
  if (format == ReportFormat::Json) return report.to_json().dump(2) + "\n";

  std::size_t n = 0;
  for (const auto& s : report.samples)
    if (s.contains("x")) n = std::max(n, s.at("x").size());
  std::ostringstream out;
  out << "index";
  for (std::size_t i = 1; i <= n; ++i) out << ",x" << i;
  out << ",r_minus,r_plus,delta,margin,verdict,lpf_verdict,alpha1,note\n";
  for (std::size_t k = 0; k < report.samples.size(); ++k) {
    const json& s = report.samples[k];
    out << k;
    for (std::size_t i = 0; i < n; ++i)
      out << ',' << (s.contains("x") && i < s.at("x").size() ? csv_number(s.at("x")[i]) : "");
    for (const char* key : {"r_minus", "r_plus", "delta", "margin"})
      out << ',' << (s.contains(key) ? csv_number(s.at(key)) : "");
    out << ',' << (s.contains("verdict") ? csv_text(s.at("verdict")) : "");
    const json lpf = s.contains("lpf") ? s.at("lpf") : json();
    out << ',' << (lpf.is_object() && lpf.contains("verdict") ? csv_text(lpf.at("verdict")) : "");
    out << ',' << (lpf.is_object() && lpf.contains("alpha1") ? csv_number(lpf.at("alpha1")) : "");
    std::string note = s.contains("note") ? csv_text(s.at("note")) : "";
    for (char& c : note)
      if (c == ',' || c == '\n') c = ';';
    out << ',' << note << '\n';
  }
  return out.str();
}

void emit_report(const ReportDocument& report, ReportFormat format, const std::string& path) {
  const std::string text = render_report(report, format);
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    if (!std::cout) throw Error("failed writing report to stdout");
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot open report file '" + path + "'");
  file << text;
  file.close();
  if (!file) throw Error("failed writing report file '" + path + "'");
}

}  // namespace cone_verify

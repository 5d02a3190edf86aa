// cone_verify: command-line front end.
//
//   cone_verify check-region --field linear_diag --params=-3,-1,2 --form diag:-1,-1,1
//       --region box:-1,1,-1,1,-1,1
//
// Exit codes: 0 all Strict, 1 usage or config error, 2 counterexample,
// 3 inconclusive.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cone_verify/driver.hpp"
#include "cone_verify/errors.hpp"
#include "cone_verify/fields.hpp"

namespace cv = cone_verify;
using nlohmann::json;

namespace {

struct Flags {
  std::string config_path;
  std::string field;
  std::string params;
  std::string expr;
  std::string form;
  std::string form2;
  std::string region;
  std::size_t samples = 100;
  std::string strategy = "random";
  std::uint64_t seed = 1;
  double skip_radius = 0.0;
  double tol = 1e-10;
  double horizon = 50.0;
  double dt = 1e-3;
  double block_time = 1.0;
  std::string out = "-";
  std::string format = "json";
  bool lpf = false;
  bool classify = false;
  bool nonneg = false;
  unsigned threads = 0;
  std::vector<std::string> point;
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) parts.push_back(trim(item));
  return parts;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw cv::ConfigError("not a number: '" + s + "'");
  return v;
}

/// "a,b,c" -> array; "name=v,..." -> object.
json parse_params(const std::string& text) {
  if (trim(text).empty()) return json::array();
  const auto parts = split(text, ',');
  if (text.find('=') == std::string::npos) {
    json out = json::array();
    for (const auto& p : parts) out.push_back(to_double(p));
    return out;
  }
  json out = json::object();
  for (const auto& p : parts) {
    const auto eq = p.find('=');
    if (eq == std::string::npos) throw cv::ConfigError("expected name=value in --params, got '" + p + "'");
    out[trim(p.substr(0, eq))] = to_double(trim(p.substr(eq + 1)));
  }
  return out;
}

/// Components separated by ';', or by ',' when no ';' is present.
std::vector<std::string> parse_expressions(const std::string& text) {
  return split(text, text.find(';') != std::string::npos ? ';' : ',');
}

json read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw cv::ConfigError("cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw cv::ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

template <class T>
void take(const json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

cv::RunConfig build_config(const std::string& command, const Flags& f, const CLI::App& sub) {
  cv::RunConfig c;
  c.command = command;
  json field_doc = json::object();

  if (!f.config_path.empty()) {
    const json file = read_config_file(f.config_path);
    try {
      for (const char* key : {"field", "region", "singularities"})
        if (file.contains(key)) field_doc[key] = file.at(key);
      take(file, "form", c.form);
      take(file, "form2", c.form2);
      take(file, "tol", c.tol);
      take(file, "horizon", c.horizon);
      take(file, "dt", c.dt);
      take(file, "block_time", c.block_time);
      take(file, "lpf", c.lpf);
      take(file, "classify", c.classify);
      take(file, "nonneg", c.nonneg);
      if (file.contains("sampling")) {
        const json& s = file.at("sampling");
        take(s, "count", c.sampling.count);
        take(s, "seed", c.sampling.seed);
        take(s, "skip_singularity_radius", c.sampling.skip_singularity_radius);
        if (s.contains("strategy"))
          c.sampling.strategy = cv::sampling_strategy_from_string(s.at("strategy").get<std::string>());
      }
    } catch (const json::exception& e) {
      throw cv::ConfigError(std::string("malformed config file: ") + e.what());
    }
  }

  auto given = [&](const char* name) { return sub.count(name) > 0; };
  if (given("--field") && given("--expr")) throw cv::ConfigError("--field and --expr are exclusive");
  if (given("--field")) {
    field_doc["field"] = {{"builtin", f.field}};
    if (given("--params")) field_doc["field"]["params"] = parse_params(f.params);
  } else if (given("--expr")) {
    field_doc["field"] = {{"expr", parse_expressions(f.expr)}};
    if (given("--params")) {
      const json p = parse_params(f.params);
      if (p.is_array() && !p.empty())
        throw cv::ConfigError("--params for --expr must be name=value pairs");
      if (p.is_object()) field_doc["field"]["params"] = p;
    }
  } else if (given("--params")) {
    if (!field_doc.contains("field")) throw cv::ConfigError("--params needs --field or --expr");
    field_doc["field"]["params"] = parse_params(f.params);
  }
  if (!field_doc.contains("field")) throw cv::ConfigError("no field given (--field, --expr or --config)");
  if (given("--region")) field_doc["region"] = cv::Region::parse(f.region).to_json();
  c.field = field_doc;

  if (given("--form")) c.form = f.form;
  if (given("--form2")) c.form2 = f.form2;
  if (given("--samples")) c.sampling.count = f.samples;
  if (given("--strategy")) c.sampling.strategy = cv::sampling_strategy_from_string(f.strategy);
  if (given("--seed")) c.sampling.seed = f.seed;
  if (given("--skip-radius")) c.sampling.skip_singularity_radius = f.skip_radius;
  if (given("--tol")) c.tol = f.tol;
  if (given("--horizon")) c.horizon = f.horizon;
  if (given("--dt")) c.dt = f.dt;
  if (given("--block-time")) c.block_time = f.block_time;
  c.lpf = c.lpf || f.lpf;
  c.classify = c.classify || f.classify;
  c.nonneg = c.nonneg || f.nonneg;
  c.threads = f.threads;
  if (!f.point.empty()) {
    std::vector<std::string> parts;
    for (const auto& token : f.point)
      for (const auto& p : split(token, ',')) parts.push_back(p);
    cv::Vector x;
    for (const auto& p : parts) x.push_back(to_double(p));
    c.point = x;
  }
  if (c.tol < 0 || c.horizon <= 0 || c.dt <= 0 || c.block_time <= 0)
    throw cv::ConfigError("tol must be >= 0; horizon, dt and block-time must be positive");
  return c;
}

void add_common(CLI::App* sub, Flags& f, bool point_positional, bool point_optional) {
  sub->add_option("--config", f.config_path, "JSON config file; flags override its entries");
  sub->add_option("--field", f.field, "Builtin field name (see catalog)");
  sub->add_option("--params", f.params, "Field parameters: a,b,c or name=value,...");
  sub->add_option("--expr", f.expr, "Field components over x1..xn, separated by ';'");
  sub->add_option("--form", f.form, "diag:a,b,... | matrix:[...] | adapted[:q]");
  sub->add_option("--form2", f.form2, "Second form for the dual-form test");
  sub->add_option("--region", f.region, "box:lo1,hi1,... | ball:c1,...,cn,r");
  sub->add_option("--samples", f.samples, "Number of samples");
  sub->add_option("--strategy", f.strategy, "grid or random");
  sub->add_option("--seed", f.seed, "Sampling seed");
  sub->add_option("--skip-radius", f.skip_radius, "Skip samples this close to singularities");
  sub->add_option("--tol", f.tol, "Tolerance for J(X) >= -tol |X|^2");
  sub->add_option("--horizon", f.horizon, "Integration horizon");
  sub->add_option("--dt", f.dt, "Integration step");
  sub->add_option("--block-time", f.block_time, "Block time for bundle extraction");
  sub->add_option("--out", f.out, "Report path ('-' for stdout)");
  sub->add_option("--format", f.format, "json or csv");
  sub->add_option("--threads", f.threads, "Worker threads (0 = CONE_VERIFY_THREADS or all cores)");
  sub->add_flag("--lpf", f.lpf, "Also check linear Poincare flow monotonicity");
  sub->add_flag("--classify", f.classify, "Also classify the splitting");
  sub->add_flag("--nonneg", f.nonneg, "Count J(X) < -tol |X|^2 as a counterexample");
  if (point_positional) {
    auto* opt = sub->add_option("point", f.point, "Point coordinates, e.g. 0.1,0.2,0.3");
    if (!point_optional) opt->required();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks of cone-field hyperbolicity criteria for flows"};
  app.set_version_flag("--version", cv::kToolVersion);
  app.require_subcommand(1);
  Flags flags;

  struct Entry {
    const char* name;
    const char* help;
    bool positional;
    bool optional;
  };
  const Entry entries[] = {
      {"check-point", "Separation certificate at one point", true, false},
      {"check-region", "Separation certificates over region samples", false, false},
      {"classify", "Classify the splitting from orbit data", false, false},
      {"extract-splitting", "Estimate the invariant bundles and domination rate", true, true},
      {"lpf-check", "Linear Poincare flow monotonicity at samples", true, true},
  };
  std::vector<CLI::App*> subs;
  for (const auto& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    add_common(sub, flags, e.positional, e.optional);
    subs.push_back(sub);
  }
  CLI::App* catalog = app.add_subcommand("catalog", "List builtin fields");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cv::kExitOk : cv::kExitUsage;
  }

  try {
    if (catalog->parsed()) {
      std::cout << cv::catalog_json().dump(2) << "\n";
      return cv::kExitOk;
    }
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (!subs[i]->parsed()) continue;
      const cv::RunConfig config = build_config(entries[i].name, flags, *subs[i]);
      const cv::ReportFormat format = cv::report_format_from_string(flags.format);
      const cv::RunResult result = cv::run(config);
      cv::emit_report(result.report, format, flags.out);
      return result.exit_code;
    }
  } catch (const cv::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cv::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cv::kExitUsage;
  }
  return cv::kExitUsage;
}

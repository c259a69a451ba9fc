#include "confsym/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "confsym/errors.hpp"

namespace confsym {

std::string tool_version() { return "0.1.0"; }

CheckResult CheckResult::equality(std::string name, double measured,
                                  double expected, double tolerance) {
  CheckResult c;
  c.name = std::move(name);
  c.measured = measured;
  c.expected = expected;
  c.tolerance = tolerance;
  c.kind = "eq";
  c.pass = std::isfinite(measured) &&
           std::abs(measured - expected) <= tolerance;
  return c;
}

CheckResult CheckResult::upper_bound(std::string name, double measured,
                                     double bound, double slack) {
  CheckResult c;
  c.name = std::move(name);
  c.measured = measured;
  c.expected = bound;
  c.tolerance = slack;
  c.kind = "le";
  c.pass = std::isfinite(measured) && measured <= bound + slack;
  return c;
}

CheckResult CheckResult::lower_bound(std::string name, double measured,
                                     double bound, double slack) {
  CheckResult c;
  c.name = std::move(name);
  c.measured = measured;
  c.expected = bound;
  c.tolerance = slack;
  c.kind = "ge";
  c.pass = std::isfinite(measured) && measured >= bound - slack;
  return c;
}

CheckResult CheckResult::boolean(std::string name, bool ok) {
  CheckResult c;
  c.name = std::move(name);
  c.measured = ok ? 1.0 : 0.0;
  c.expected = 1.0;
  c.tolerance = 0.0;
  c.kind = "eq";
  c.pass = ok;
  return c;
}

namespace {

ordered_json check_to_json(const CheckResult& c) {
  ordered_json j;
  j["name"] = c.name;
  j["measured"] = c.measured;
  j["expected"] = c.expected;
  j["tolerance"] = c.tolerance;
  j["kind"] = c.kind;
  j["pass"] = c.pass;
  return j;
}

}  // namespace

bool Report::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::vector<std::string> Report::failing() const {
  std::vector<std::string> out;
  for (const auto& c : checks)
    if (!c.pass) out.push_back(experiment + "/" + c.name);
  return out;
}

ordered_json Report::to_json() const {
  ordered_json j;
  j["tool"] = "confsym";
  j["version"] = tool_version();
  j["experiment"] = experiment;
  j["system"] = system;
  j["seed"] = seed;
  j["config"] = config;
  j["checks"] = ordered_json::array();
  for (const auto& c : checks) j["checks"].push_back(check_to_json(c));
  j["sequences"] = sequences;
  j["timing_seconds"] = timing_seconds;
  return j;
}

std::string Report::to_string() const { return to_json().dump(2) + "\n"; }

bool SuiteReport::all_pass() const {
  for (const auto& r : reports)
    if (!r.all_pass()) return false;
  return true;
}

std::vector<std::string> SuiteReport::failing() const {
  std::vector<std::string> out;
  for (const auto& r : reports)
    for (const auto& name : r.failing()) out.push_back(name);
  return out;
}

ordered_json SuiteReport::to_json() const {
  ordered_json j;
  j["tool"] = "confsym";
  j["version"] = tool_version();
  j["experiment"] = "reproduce-all";
  j["pass"] = all_pass();
  j["experiments"] = ordered_json::array();
  for (const auto& r : reports) j["experiments"].push_back(r.to_json());
  j["timing_seconds"] = timing_seconds;
  return j;
}

std::string SuiteReport::to_string() const { return to_json().dump(2) + "\n"; }

std::string strip_timing(const std::string& report_json_text) {
  ordered_json j = ordered_json::parse(report_json_text);
  j.erase("timing_seconds");
  if (j.contains("experiments"))
    for (auto& sub : j["experiments"]) sub.erase("timing_seconds");
  return j.dump(2) + "\n";
}

std::vector<std::string> emit_plotdata(const Report& report,
                                       const std::string& out_prefix) {
  std::vector<std::string> written;
  for (const auto& [name, rows] : report.sequences.items()) {
    const std::string path = out_prefix + "_" + name + ".dat";
    std::ofstream out(path);
    if (!out)
      throw error("emit_plotdata: cannot open " + path + " for writing");
    for (const auto& row : rows) {
      bool first = true;
      for (const auto& value : row) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", value.get<double>());
        out << (first ? "" : "\t") << buf;
        first = false;
      }
      out << "\n";
    }
    written.push_back(path);
  }
  return written;
}

}  // namespace confsym

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace confsym {

using ordered_json = nlohmann::ordered_json;

/// One verified quantity. Equality checks pass when
/// |measured - expected| <= tolerance; inequality checks ("le") pass when
/// measured <= expected + tolerance.
struct CheckResult {
  std::string name;
  double measured = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  std::string kind = "eq";  // "eq" or "le"
  bool pass = false;

  static CheckResult equality(std::string name, double measured,
                              double expected, double tolerance);
  static CheckResult upper_bound(std::string name, double measured,
                                 double bound, double slack);
  static CheckResult lower_bound(std::string name, double measured,
                                 double bound, double slack = 0.0);
  static CheckResult boolean(std::string name, bool ok);
};

/// Structured experiment output: configuration echo, per-check results,
/// sequence data for plots, seed and timing. Serialization uses a stable key
/// order so identical runs emit identical bytes (timing aside).
struct Report {
  std::string experiment;
  std::string system;
  std::uint64_t seed = 0;
  ordered_json config = ordered_json::object();
  std::vector<CheckResult> checks;
  // name -> list of rows (each row a short list of numbers, e.g. (k, value)).
  ordered_json sequences = ordered_json::object();
  double timing_seconds = 0.0;

  bool all_pass() const;
  std::vector<std::string> failing() const;
  void add(CheckResult c) { checks.push_back(std::move(c)); }

  ordered_json to_json() const;
  std::string to_string() const;  // pretty JSON, trailing newline
};

/// Combined output of a multi-experiment run.
struct SuiteReport {
  std::vector<Report> reports;
  double timing_seconds = 0.0;

  bool all_pass() const;
  std::vector<std::string> failing() const;
  ordered_json to_json() const;
  std::string to_string() const;
};

/// Serialize with the timing fields removed (byte-comparison form).
std::string strip_timing(const std::string& report_json_text);

/// One whitespace-delimited text file per sequence, columns as stored.
/// Returns the written paths.
std::vector<std::string> emit_plotdata(const Report& report,
                                       const std::string& out_prefix);

std::string tool_version();

}  // namespace confsym

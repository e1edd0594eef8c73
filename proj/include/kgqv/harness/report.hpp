#pragma once

// Experiment reports: data rows, rate fits and derived pass/fail checks, with
// CSV and JSON writers.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgqv/harness/config.hpp"
#include "kgqv/stats.hpp"

namespace kgqv::harness {

inline constexpr const char* kVersion = "0.1.0";

struct Row {
  std::string series;
  double control = 0.0;  ///< eps, resolution or another swept variable
  double statistic = 0.0;
  double se = 0.0;
};

struct Fit {
  std::string series;
  LinearFit fit;
};

/// A bound check. `passed` is always computed from value and bounds.
struct Check {
  std::string name;
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool passed = false;
  std::string note;
};

inline Check within(std::string name, double value, double lo, double hi, std::string note = {}) {
  return {std::move(name), value, lo, hi, value >= lo && value <= hi, std::move(note)};
}

struct ExperimentReport {
  ResolvedConfig config;
  std::vector<Row> rows;
  std::vector<Fit> fits;
  std::vector<Check> checks;
  bool numeric_failure = false;
  std::string diagnostic;
  double wall_time_s = 0.0;

  bool passed() const noexcept {
    if (numeric_failure) return false;
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }

  const Check* find_check(const std::string& name) const noexcept {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }

  const Fit* find_fit(const std::string& series) const noexcept {
    for (const auto& f : fits)
      if (f.series == series) return &f;
    return nullptr;
  }
};

namespace detail {

/// Shortest round-trip decimal form.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// RFC 4180 field quoting.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace detail

inline std::string to_csv(const ExperimentReport& r) {
  std::ostringstream out;
  out << "# kgqv " << kVersion << " experiment=" << to_string(r.config.experiment) << " seed=" << r.config.seed
      << "; columns: series (row label), control (swept variable), statistic, se (standard error)\r\n";
  out << "series,control,statistic,se\r\n";
  for (const auto& row : r.rows)
    out << detail::csv_field(row.series) << ',' << detail::format_double(row.control) << ','
        << detail::format_double(row.statistic) << ',' << detail::format_double(row.se) << "\r\n";
  return out.str();
}

inline nlohmann::json to_json(const ExperimentReport& r, const std::string& csv_path = {}) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["experiment"] = std::string(to_string(r.config.experiment));
  j["seed"] = r.config.seed;
  j["config"] = to_json(r.config);
  j["fits"] = nlohmann::json::array();
  for (const auto& f : r.fits)
    j["fits"].push_back({{"series", f.series},
                         {"slope", f.fit.slope},
                         {"slope_se", f.fit.slope_se},
                         {"intercept", f.fit.intercept},
                         {"points", f.fit.points}});
  j["checks"] = nlohmann::json::array();
  for (const auto& c : r.checks)
    j["checks"].push_back(
        {{"name", c.name}, {"value", c.value}, {"lo", c.lo}, {"hi", c.hi}, {"passed", c.passed}, {"note", c.note}});
  j["numeric_failure"] = r.numeric_failure;
  if (!r.diagnostic.empty()) j["diagnostic"] = r.diagnostic;
  j["passed"] = r.passed();
  if (!csv_path.empty()) j["csv"] = csv_path;
  j["wall_time_s"] = r.wall_time_s;
  return j;
}

/// Writes <out>/<experiment>.csv and returns its path.
inline std::filesystem::path write_csv(const ExperimentReport& r) {
  const std::filesystem::path dir(r.config.out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto path = dir / (std::string(to_string(r.config.experiment)) + ".csv");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("out", "cannot write '" + path.string() + "'");
  f << to_csv(r);
  return path;
}

}  // namespace kgqv::harness

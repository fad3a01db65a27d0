#pragma once

// Experiment reports (CSV or JSON) and the summary reader.
//
// CSV layout:
//   # schema_version: 1
//   # experiment: <name>
//   # statement: <the result exercised, named by content>
//   # generated: <UTC timestamp>        (the only non-reproducible line)
//   # config: key = value               (one line per resolved field)
//   col_a,col_b,...
//   ...rows...
//   # assert: PASS | name | detail
//
// JSON carries the same fields plus "tables" and an "assertions" array.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <deque>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli/config.hpp"

namespace compactlab::cli {

inline constexpr int kSchemaVersion = 1;

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Assertion {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

class Report {
 public:
  Report(std::string experiment, std::string statement, const Config& config)
      : experiment_(std::move(experiment)), statement_(std::move(statement)), config_(config) {}

  Table& table(const std::string& name, std::vector<std::string> columns) {
    tables_.push_back({name, std::move(columns), {}});
    return tables_.back();
  }

  void check(const std::string& name, bool pass, const std::string& detail) {
    assertions_.push_back({name, pass, detail});
  }

  void note(const std::string& key, nlohmann::ordered_json value) { extra_[key] = std::move(value); }

  const std::vector<Assertion>& assertions() const { return assertions_; }
  const std::deque<Table>& tables() const { return tables_; }
  bool all_pass() const {
    for (const auto& a : assertions_)
      if (!a.pass) return false;
    return true;
  }

  void write_csv(std::ostream& os, const std::string& timestamp) const {
    os << "# schema_version: " << kSchemaVersion << '\n';
    os << "# experiment: " << experiment_ << '\n';
    os << "# statement: " << statement_ << '\n';
    os << "# generated: " << timestamp << '\n';
    for (const auto& [k, v] : config_.entries()) os << "# config: " << k << " = " << v << '\n';
    for (const auto& [k, v] : extra_.items()) os << "# note: " << k << " = " << v.dump() << '\n';
    for (const auto& t : tables_) {
      os << "# table: " << t.name << '\n';
      for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
      os << '\n';
      for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << fmt(r[i]);
        os << '\n';
      }
    }
    for (const auto& a : assertions_)
      os << "# assert: " << (a.pass ? "PASS" : "FAIL") << " | " << a.name << " | " << a.detail << '\n';
  }

  nlohmann::ordered_json to_json(const std::string& timestamp) const {
    nlohmann::ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["experiment"] = experiment_;
    j["statement"] = statement_;
    j["generated"] = timestamp;
    auto& cfg = j["config"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : config_.entries()) cfg[k] = v;
    if (!extra_.empty()) j["notes"] = extra_;
    auto& tables = j["tables"] = nlohmann::ordered_json::array();
    for (const auto& t : tables_) tables.push_back({{"name", t.name}, {"columns", t.columns}, {"rows", t.rows}});
    auto& as = j["assertions"] = nlohmann::ordered_json::array();
    for (const auto& a : assertions_) as.push_back({{"name", a.name}, {"pass", a.pass}, {"detail", a.detail}});
    return j;
  }

  void write_json(std::ostream& os, const std::string& timestamp) const { os << to_json(timestamp).dump(2) << '\n'; }

 private:
  std::string experiment_;
  std::string statement_;
  Config config_;
  std::deque<Table> tables_;  // deque: table() references stay valid
  std::vector<Assertion> assertions_;
  nlohmann::ordered_json extra_ = nlohmann::ordered_json::object();
};

struct ParsedReport {
  std::string path;
  std::string experiment;
  std::string statement;
  std::vector<Assertion> assertions;
};

/// Reads a CSV or JSON report; throws ConfigError on missing or corrupt files.
inline ParsedReport read_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open report");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  ParsedReport r;
  r.path = path;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
      if (!j.contains("schema_version") || !j.contains("assertions")) throw ConfigError(path + ": not a report");
      r.experiment = j.at("experiment").get<std::string>();
      r.statement = j.at("statement").get<std::string>();
      for (const auto& a : j.at("assertions"))
        r.assertions.push_back({a.at("name").get<std::string>(), a.at("pass").get<bool>(),
                                a.at("detail").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path + ": corrupt JSON report (" + e.what() + ")");
    }
    return r;
  }
  std::istringstream lines(text);
  std::string line;
  bool versioned = false;
  while (std::getline(lines, line)) {
    auto field = [&](const std::string& tag) -> std::optional<std::string> {
      const std::string prefix = "# " + tag + ": ";
      if (line.rfind(prefix, 0) == 0) return line.substr(prefix.size());
      return std::nullopt;
    };
    if (field("schema_version")) versioned = true;
    if (auto v = field("experiment")) r.experiment = *v;
    if (auto v = field("statement")) r.statement = *v;
    if (auto v = field("assert")) {
      // "STATUS | name | detail"; names may hold '|' but not " | ".
      const auto a = v->find(" | ");
      const auto b = a == std::string::npos ? a : v->find(" | ", a + 3);
      const std::string status = v->substr(0, a);
      if (b == std::string::npos || (status != "PASS" && status != "FAIL"))
        throw ConfigError(path + ": corrupt assertion line");
      r.assertions.push_back({v->substr(a + 3, b - a - 3), status == "PASS", v->substr(b + 3)});
    }
  }
  if (!versioned || r.experiment.empty()) throw ConfigError(path + ": corrupt CSV report (missing header)");
  return r;
}

/// Human-readable summary; byte-stable for identical inputs. Returns overall pass.
inline bool write_summary(std::ostream& os, const std::vector<ParsedReport>& reports) {
  bool overall = true;
  std::size_t total = 0;
  for (const auto& r : reports) {
    os << "report: " << r.path << '\n';
    os << "  experiment: " << r.experiment << '\n';
    os << "  statement:  " << r.statement << '\n';
    if (r.assertions.empty()) os << "  (no assertions)\n";
    for (const auto& a : r.assertions) {
      os << "  " << (a.pass ? "PASS" : "FAIL") << "  " << a.name << "  [" << a.detail << "]\n";
      overall = overall && a.pass;
      ++total;
    }
  }
  if (total == 0) os << "no assertions\n";
  os << "overall: " << (overall ? "PASS" : "FAIL") << '\n';
  return overall;
}

}  // namespace compactlab::cli

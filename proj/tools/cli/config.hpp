#pragma once

// Flat, typed key = value configuration with an embedded schema.
//
//   # comment
//   experiment = exit-time
//   process.alpha = 2
//   x0 = 0, 0
//   probes = 0:10:0.5          (1D range shorthand)
//   probes = 1,0; 2,0; 4,0     (points separated by ';')

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace compactlab::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FieldType { Real, Int, UInt, Bool, String, RealList, PointList };

inline const char* type_name(FieldType t) {
  switch (t) {
    case FieldType::Real: return "real";
    case FieldType::Int: return "int";
    case FieldType::UInt: return "uint";
    case FieldType::Bool: return "bool";
    case FieldType::String: return "string";
    case FieldType::RealList: return "real-list";
    case FieldType::PointList: return "point-list";
  }
  return "?";
}

struct FieldSpec {
  std::string key;
  FieldType type;
  std::string doc;
};

inline std::string trim(std::string s) {
  auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
  return s;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

inline std::optional<double> parse_real(const std::string& s) {
  const std::string t = trim(s);
  if (t.empty()) return std::nullopt;
  double v = 0.0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size()) return std::nullopt;
  return v;
}

inline std::optional<long long> parse_int(const std::string& s) {
  const std::string t = trim(s);
  long long v = 0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || p != t.data() + t.size()) return std::nullopt;
  return v;
}

inline std::optional<std::uint64_t> parse_uint(const std::string& s) {
  const std::string t = trim(s);
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || p != t.data() + t.size()) return std::nullopt;
  return v;
}

inline std::optional<std::vector<double>> parse_real_list(const std::string& s) {
  const std::string t = trim(s);
  std::vector<double> out;
  if (t.empty()) return out;
  if (t.find(':') != std::string::npos) {
    auto parts = split(t, ':');
    if (parts.size() != 3) return std::nullopt;
    auto a = parse_real(parts[0]), b = parse_real(parts[1]), h = parse_real(parts[2]);
    if (!a || !b || !h || !(*h > 0.0) || *b < *a) return std::nullopt;
    const auto n = static_cast<long long>(std::floor((*b - *a) / *h + 1e-9));
    for (long long i = 0; i <= n; ++i) out.push_back(*a + static_cast<double>(i) * *h);
    return out;
  }
  for (const auto& part : split(t, ',')) {
    auto v = parse_real(part);
    if (!v) return std::nullopt;
    out.push_back(*v);
  }
  return out;
}

inline std::optional<std::vector<std::vector<double>>> parse_point_list(const std::string& s) {
  const std::string t = trim(s);
  std::vector<std::vector<double>> out;
  if (t.empty()) return out;
  if (t.find(';') == std::string::npos && t.find(':') != std::string::npos) {
    auto xs = parse_real_list(t);
    if (!xs) return std::nullopt;
    for (double x : *xs) out.push_back({x});
    return out;
  }
  for (const auto& part : split(t, ';')) {
    if (part.empty()) continue;
    auto p = parse_real_list(part);
    if (!p || p->empty()) return std::nullopt;
    out.push_back(*p);
  }
  return out;
}

inline const std::vector<FieldSpec>& schema() {
  static const std::vector<FieldSpec> fields = {
      {"experiment", FieldType::String, "experiment name"},
      {"seed", FieldType::UInt, "64-bit run seed"},
      {"threads", FieldType::UInt, "worker threads (0 = hardware concurrency)"},
      {"output.format", FieldType::String, "csv or json"},
      {"process.alpha", FieldType::Real, "stability index in (0,2]"},
      {"process.dim", FieldType::Int, "dimension d >= 1"},
      {"x0", FieldType::RealList, "starting point"},
      {"h", FieldType::Real, "time step"},
      {"t", FieldType::Real, "time horizon of the identity or semigroup"},
      {"t_max", FieldType::Real, "simulation horizon"},
      {"n_paths", FieldType::UInt, "Monte Carlo paths (per probe)"},
      {"bridge", FieldType::Bool, "Brownian-bridge exit correction for alpha = 2"},
      {"domain.shape", FieldType::String, "full | ball | box | interval | shrinking-balls"},
      {"domain.center", FieldType::RealList, "ball center"},
      {"domain.radius", FieldType::Real, "ball radius"},
      {"domain.lo", FieldType::RealList, "box lower corner"},
      {"domain.hi", FieldType::RealList, "box upper corner"},
      {"domain.a", FieldType::Real, "interval left end"},
      {"domain.b", FieldType::Real, "interval right end"},
      {"domain.n_max", FieldType::Int, "truncation N of the shrinking-ball union"},
      {"potential.kind", FieldType::String, "none | constant | power"},
      {"potential.offset", FieldType::Real, "V = offset + coefficient |x|^exponent"},
      {"potential.coefficient", FieldType::Real, "see potential.offset"},
      {"potential.exponent", FieldType::Real, "see potential.offset"},
      {"weight.beta", FieldType::Real, "time-change weight W = factor (1 + |x|^beta)"},
      {"weight.factor", FieldType::Real, "time-change weight factor >= 1"},
      {"f.kind", FieldType::String, "gaussian | constant"},
      {"f.a", FieldType::Real, "Gaussian bump exp(-a |x-c|^2)"},
      {"f.center", FieldType::RealList, "Gaussian bump center"},
      {"f.value", FieldType::Real, "constant test function value"},
      {"scan.n", FieldType::RealList, "ball indices n of the probes x = e_n"},
      {"probes", FieldType::PointList, "probe points"},
      {"exhaustion.scale", FieldType::Real, "exhaustion radii R_k = k * scale"},
      {"exhaustion.levels", FieldType::Int, "number of exhaustion levels"},
      {"level.n", FieldType::Int, "exhaustion level n"},
      {"level.m", FieldType::Int, "compact index m < n"},
      {"lifetime.paths", FieldType::UInt, "paths per exterior lifetime probe"},
      {"lifetime.t_max", FieldType::Real, "lifetime quadrature horizon"},
      {"check_subprocess", FieldType::Bool, "also run the 1-subprocess identity"},
      {"grid.x_min", FieldType::Real, "grid left end"},
      {"grid.x_max", FieldType::Real, "grid right end"},
      {"grid.delta", FieldType::Real, "grid spacing"},
      {"spectral.alpha", FieldType::Real, "spectral power alpha (2 = half-Laplacian)"},
      {"spectral.t_grid", FieldType::RealList, "semigroup times"},
      {"spectral.levels", FieldType::RealList, "exhaustion radii for the compactness diagnostic"},
      {"spectral.control", FieldType::Bool, "also run the unkilled control generator"},
      {"trace.n_list", FieldType::RealList, "interval counts N"},
      {"trace.t", FieldType::Real, "heat-trace time"},
      {"beta.list", FieldType::RealList, "weight exponents beta"},
      {"beta.radii", FieldType::RealList, "truncation radii R"},
      {"analytics.radii", FieldType::RealList, "probe radii |x|"},
      {"analytics.gamma2", FieldType::Real, "J bound fit: gamma2"},
      {"analytics.gamma1", FieldType::Real, "J bound fit: gamma1"},
      {"analytics.train", FieldType::RealList, "J bound fit: training radii"},
      {"analytics.holdout", FieldType::RealList, "J bound fit: held-out radii"},
      {"time_change.enabled", FieldType::Bool, "emit the time-changed clock with the paths"},
  };
  return fields;
}

inline const FieldSpec* find_field(const std::string& key) {
  for (const auto& f : schema())
    if (f.key == key) return &f;
  return nullptr;
}

/// Resolved configuration: defaults overlaid by file values, all type-checked.
class Config {
 public:
  /// Parses `text`; throws ConfigError naming the field path on any violation.
  static Config parse(std::istream& in, const std::string& source = "config") {
    Config c;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      c.set(key, value);
    }
    return c;
  }

  static Config parse_string(const std::string& text, const std::string& source = "config") {
    std::istringstream is(text);
    return parse(is, source);
  }

  /// Sets and type-checks one field.
  void set(const std::string& key, const std::string& value) {
    const FieldSpec* f = find_field(key);
    if (!f) throw ConfigError(key + ": unknown field");
    check_type(*f, value);
    values_[key] = value;
  }

  /// Fills keys missing here from `defaults`.
  void overlay_defaults(const Config& defaults) {
    for (const auto& [k, v] : defaults.values_)
      if (!values_.count(k)) values_[k] = v;
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  const std::string& raw(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError(key + ": required field missing");
    return it->second;
  }

  double real(const std::string& key) const { return *parse_real(raw(key)); }
  long long integer(const std::string& key) const { return *parse_int(raw(key)); }
  std::uint64_t uint(const std::string& key) const { return *parse_uint(raw(key)); }
  bool boolean(const std::string& key) const { return raw(key) == "true"; }
  std::string string(const std::string& key) const { return raw(key); }
  std::vector<double> reals(const std::string& key) const { return *parse_real_list(raw(key)); }
  std::vector<std::vector<double>> points(const std::string& key) const { return *parse_point_list(raw(key)); }

  /// Field-path scoped validation helper.
  void require(bool ok, const std::string& key, const std::string& what) const {
    if (!ok) throw ConfigError(key + ": " + what);
  }

  /// Sorted key = value lines (the resolved config block of a report).
  std::vector<std::pair<std::string, std::string>> entries() const {
    return {values_.begin(), values_.end()};
  }

  std::string dump() const {
    std::string s;
    for (const auto& [k, v] : values_) s += k + " = " + v + "\n";
    return s;
  }

 private:
  static void check_type(const FieldSpec& f, const std::string& v) {
    bool ok = true;
    switch (f.type) {
      case FieldType::Real: ok = parse_real(v).has_value(); break;
      case FieldType::Int: ok = parse_int(v).has_value(); break;
      case FieldType::UInt: ok = parse_uint(v).has_value(); break;
      case FieldType::Bool: ok = v == "true" || v == "false"; break;
      case FieldType::String: ok = !v.empty(); break;
      case FieldType::RealList: ok = parse_real_list(v).has_value(); break;
      case FieldType::PointList: ok = parse_point_list(v).has_value(); break;
    }
    if (!ok) throw ConfigError(f.key + ": expected " + type_name(f.type) + ", got '" + v + "'");
  }

  std::map<std::string, std::string> values_;
};

}  // namespace compactlab::cli

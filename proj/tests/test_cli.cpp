#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "cli/config.hpp"
#include "cli/experiments.hpp"
#include "cli/report.hpp"

using namespace compactlab;
using namespace compactlab::cli;

namespace {

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

Config small_dynkin(unsigned paths = 4000) {
  auto c = Config::parse_string("experiment = dynkin-check\nn_paths = " + std::to_string(paths) + "\nh = 1e-2\n");
  return resolve_config(c);
}

std::string csv_of(const Report& r) {
  std::ostringstream os;
  r.write_csv(os, "T");
  return os.str();
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  const auto p = std::filesystem::temp_directory_path() / ("compactlab_test_" + name);
  std::ofstream(p) << content;
  return p;
}

}  // namespace

TEST(Config, TypeErrorsNameTheField) {
  EXPECT_EQ(error_of([] { Config::parse_string("n_paths = many"); }), "n_paths: expected uint, got 'many'");
  EXPECT_EQ(error_of([] { Config::parse_string("bridge = yes"); }), "bridge: expected bool, got 'yes'");
  EXPECT_EQ(error_of([] { Config::parse_string("process.alpha = 1.5x"); }), "process.alpha: expected real, got '1.5x'");
  EXPECT_EQ(error_of([] { Config::parse_string("no.such = 1"); }), "no.such: unknown field");
  EXPECT_EQ(error_of([] { Config::parse_string("x0 1", "f.cfg"); }), "f.cfg:1: expected 'key = value'");
}

TEST(Config, ListShorthands) {
  const auto c = Config::parse_string("probes = 0:1:0.25\nx0 = 1, 2\n# comment\nscan.n = 5,10\n");
  EXPECT_EQ(c.points("probes").size(), 5u);
  EXPECT_DOUBLE_EQ(c.points("probes").back()[0], 1.0);
  EXPECT_EQ(c.reals("x0"), (std::vector<double>{1.0, 2.0}));
  const auto p = Config::parse_string("probes = 1,0; 2,0; 4,0").points("probes");
  ASSERT_EQ(p.size(), 3u);
  EXPECT_EQ(p[2], (std::vector<double>{4.0, 0.0}));
}

TEST(Config, InvalidAlphaMessage) {
  auto c = Config::parse_string("experiment = exit-time\nprocess.alpha = 2.5\n");
  c = resolve_config(c);
  EXPECT_EQ(error_of([&] { run_experiment(c, {}); }), "process.alpha: alpha ∈ (0,2] required, got 2.5");
}

TEST(Config, NeedsTransienceForTimeChange) {
  auto c = Config::parse_string("experiment = sample-paths\nprocess.alpha = 1.5\nprocess.dim = 1\ntime_change.enabled = true\n");
  const std::string msg = error_of([&] { run_experiment(resolve_config(c), {}); });
  EXPECT_NE(msg.find("process.dim: d > α required"), std::string::npos) << msg;
}

TEST(Config, EveryDefaultParsesAndIsComplete) {
  for (const auto& e : experiments()) {
    const auto c = Config::parse_string("experiment = " + e.name + "\n" + e.defaults, e.name);
    EXPECT_EQ(c.string("experiment"), e.name);
    EXPECT_NE(find_experiment(e.name), nullptr);
  }
  EXPECT_EQ(experiments().size(), 10u);
  EXPECT_EQ(find_experiment("nope"), nullptr);
  EXPECT_NE(error_of([] { resolve_config(Config::parse_string("experiment = nope")); }).find("unknown experiment"), std::string::npos);
}

TEST(Report, CsvRoundTrip) {
  const Report r = run_experiment(small_dynkin(), {});
  const auto path = temp_file("report.csv", csv_of(r));
  const auto parsed = read_report(path.string());
  EXPECT_EQ(parsed.experiment, "dynkin-check");
  ASSERT_EQ(parsed.assertions.size(), r.assertions().size());
  for (std::size_t i = 0; i < parsed.assertions.size(); ++i) {
    EXPECT_EQ(parsed.assertions[i].name, r.assertions()[i].name);
    EXPECT_EQ(parsed.assertions[i].pass, r.assertions()[i].pass);
    EXPECT_EQ(parsed.assertions[i].detail, r.assertions()[i].detail);
  }
  std::filesystem::remove(path);
}

TEST(Report, JsonRoundTrip) {
  const Report r = run_experiment(small_dynkin(), {});
  std::ostringstream os;
  r.write_json(os, "T");
  const auto path = temp_file("report.json", os.str());
  const auto parsed = read_report(path.string());
  EXPECT_EQ(parsed.statement, read_report(temp_file("report2.csv", csv_of(r)).string()).statement);
  ASSERT_EQ(parsed.assertions.size(), 1u);
  EXPECT_EQ(parsed.assertions[0].pass, r.all_pass());
  const auto j = nlohmann::json::parse(os.str());
  EXPECT_EQ(j["schema_version"], kSchemaVersion);
  EXPECT_EQ(j["config"]["n_paths"], "4000");
  EXPECT_EQ(j["tables"][0]["columns"].size(), 6u);
}

TEST(Report, CorruptFilesThrow) {
  EXPECT_THROW(read_report("/nonexistent/report.csv"), ConfigError);
  EXPECT_THROW(read_report(temp_file("bad.json", "{ \"schema_version\": 1, ").string()), ConfigError);
  EXPECT_THROW(read_report(temp_file("bad1.csv", "a,b\n1,2\n").string()), ConfigError);
  EXPECT_THROW(read_report(temp_file("bad2.csv", "# schema_version: 1\n# experiment: x\n# assert: MAYBE | a | b\n").string()),
               ConfigError);
}

TEST(Summary, NoAssertionsAndMixedOutcome) {
  ParsedReport empty{"e.csv", "trace-study", "s", {}};
  std::ostringstream a;
  EXPECT_TRUE(write_summary(a, {empty}));
  EXPECT_NE(a.str().find("no assertions"), std::string::npos);
  ParsedReport mixed{"m.csv", "x", "s", {{"one", true, "d"}, {"two", false, "d"}}};
  std::ostringstream b;
  EXPECT_FALSE(write_summary(b, {empty, mixed}));
  EXPECT_NE(b.str().find("overall: FAIL"), std::string::npos);
  std::ostringstream c;
  write_summary(c, {empty, mixed});
  EXPECT_EQ(b.str(), c.str());
}

TEST(Reproducibility, SameSeedSameBytesModuloTimestamp) {
  const auto a = csv_of(run_experiment(small_dynkin(), {}));
  const auto b = csv_of(run_experiment(small_dynkin(), {}));
  EXPECT_EQ(a, b);
  auto other = small_dynkin();
  other.set("seed", "12");
  EXPECT_NE(a, csv_of(run_experiment(other, {})));
}

TEST(Reproducibility, ThreadCountDoesNotChangeResults) {
  Execution one, four;
  one.threads = 1;
  four.threads = 4;
  EXPECT_EQ(csv_of(run_experiment(small_dynkin(), one)), csv_of(run_experiment(small_dynkin(), four)));
  auto c = resolve_config(Config::parse_string("experiment = tightness-scan\nn_paths = 300\nh = 1e-2\nprobes = 0;2;4\n"));
  EXPECT_EQ(csv_of(run_experiment(c, one)), csv_of(run_experiment(c, four)));
}

TEST(Experiments, CheapConfigsPass) {
  const char* cfgs[] = {
      "experiment = exit-time\nn_paths = 4000\nh = 1e-3\n",
      "experiment = spectra\ngrid.x_min = -10\ngrid.x_max = 10\ngrid.delta = 0.05\n",
      "experiment = resolvent-bounds\n",
      "experiment = sample-paths\nprocess.dim = 2\nx0 = 0, 0\ntime_change.enabled = true\n",
  };
  for (const char* text : cfgs) {
    const auto r = run_experiment(resolve_config(Config::parse_string(text)), {});
    EXPECT_FALSE(r.assertions().empty()) << text;
    for (const auto& a : r.assertions()) EXPECT_TRUE(a.pass) << text << a.name << ": " << a.detail;
  }
}

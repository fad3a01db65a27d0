// compactlab: config-driven experiment runner.
//
//   compactlab --config run.cfg [--seed N] [--threads N] [--out DIR] [--format csv|json]
//   compactlab --experiment dynkin-check
//   compactlab defaults EXPERIMENT
//   compactlab summary REPORT...
//   compactlab list
//
// Exit status: 0 all assertions pass, 1 an assertion failed, 2 usage, config
// or precondition error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli/config.hpp"
#include "cli/experiments.hpp"
#include "cli/report.hpp"
#include "compactlab/errors.hpp"

namespace cli = compactlab::cli;

namespace {

constexpr int kPass = 0;
constexpr int kAssertionFailure = 1;
constexpr int kUsageError = 2;

int run(const std::string& config_path, const std::string& experiment, std::optional<std::uint64_t> seed,
        std::optional<unsigned> threads, const std::string& out_dir, const std::string& format_flag) {
  cli::Config config;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw cli::ConfigError(config_path + ": cannot open config");
    config = cli::Config::parse(in, config_path);
  }
  if (!experiment.empty()) config.set("experiment", experiment);
  if (!config.has("experiment")) throw cli::ConfigError("experiment: required field missing (use --config or --experiment)");
  if (seed) config.set("seed", std::to_string(*seed));
  if (!format_flag.empty()) config.set("output.format", format_flag);

  compactlab::Execution exec;
  if (threads)
    exec.threads = *threads;
  else if (config.has("threads"))
    exec.threads = static_cast<unsigned>(config.uint("threads"));

  config = cli::resolve_config(config);
  const std::string format = config.has("output.format") ? config.string("output.format") : "csv";
  if (format != "csv" && format != "json") throw cli::ConfigError("output.format: expected csv or json, got '" + format + "'");
  const cli::Report report = cli::run_experiment(config, exec);

  const std::string stamp = cli::utc_timestamp();
  auto emit = [&](std::ostream& os) {
    if (format == "json")
      report.write_json(os, stamp);
    else
      report.write_csv(os, stamp);
  };
  if (out_dir.empty()) {
    emit(std::cout);
  } else {
    std::filesystem::create_directories(out_dir);
    const auto path = std::filesystem::path(out_dir) / (config.string("experiment") + "." + format);
    std::ofstream os(path);
    if (!os) throw cli::ConfigError("--out: cannot write " + path.string());
    emit(os);
    std::cerr << "wrote " << path.string() << '\n';
  }
  for (const auto& a : report.assertions())
    std::cerr << (a.pass ? "PASS" : "FAIL") << "  " << a.name << "  [" << a.detail << "]\n";
  return report.all_pass() ? kPass : kAssertionFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"compactlab: Monte Carlo and spectral experiments on killed and time-changed stable processes"};
  app.set_version_flag("--version", "compactlab 1.0");

  std::string config_path, experiment, out_dir, format;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  app.add_option("--config", config_path, "experiment config (key = value)")->check(CLI::ExistingFile);
  app.add_option("--experiment", experiment, "run an experiment with its embedded defaults");
  app.add_option("--seed", seed, "64-bit seed (overrides the config)");
  app.add_option("--threads", threads, "worker threads, 0 = all cores (results do not depend on it)");
  app.add_option("--out", out_dir, "output directory (default: stdout)");
  app.add_option("--format", format, "report format")->check(CLI::IsMember({"csv", "json"}));

  auto* defaults_cmd = app.add_subcommand("defaults", "print the embedded defaults of an experiment");
  std::string defaults_name;
  defaults_cmd->add_option("experiment", defaults_name)->required();

  auto* summary_cmd = app.add_subcommand("summary", "summarize report files without recomputing");
  std::vector<std::string> report_files;
  summary_cmd->add_option("reports", report_files)->required();

  auto* list_cmd = app.add_subcommand("list", "list experiments");
  auto* schema_cmd = app.add_subcommand("schema", "print the config schema");
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsageError;
  }

  try {
    if (*list_cmd) {
      for (const auto& e : cli::experiments()) std::cout << e.name << '\n';
      return kPass;
    }
    if (*schema_cmd) {
      for (const auto& f : cli::schema()) std::cout << f.key << " (" << cli::type_name(f.type) << "): " << f.doc << '\n';
      return kPass;
    }
    if (*defaults_cmd) {
      const auto* def = cli::find_experiment(defaults_name);
      if (!def) throw cli::ConfigError("experiment: unknown experiment '" + defaults_name + "'");
      std::cout << "experiment = " << def->name << '\n' << def->defaults;
      return kPass;
    }
    if (*summary_cmd) {
      std::vector<cli::ParsedReport> reports;
      for (const auto& f : report_files) reports.push_back(cli::read_report(f));
      return cli::write_summary(std::cout, reports) ? kPass : kAssertionFailure;
    }
    if (config_path.empty() && experiment.empty()) {
      std::cerr << app.help();
      return kUsageError;
    }
    return run(config_path, experiment, seed, threads, out_dir, format);
  } catch (const cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
  } catch (const compactlab::ArgumentError& e) {
    std::cerr << "precondition violated: " << e.what() << '\n';
  } catch (const compactlab::UnsupportedConfiguration& e) {
    std::cerr << "unsupported configuration: " << e.what() << '\n';
  } catch (const compactlab::ContractViolation& e) {
    std::cerr << "contract violation: " << e.what() << '\n';
  }
  return kUsageError;
}

// Command-line front end for the experiment catalog.
#include <CLI11.hpp>

#include <iostream>

#include "sudakov/sudakov.hpp"

using namespace sudakov;

namespace {

int print_report(const ExperimentReport& rep, const std::string& format) {
  if (format == "csv") {
    std::cout << render_csv(rep);
  } else if (format == "json") {
    std::cout << to_json(rep).dump(2) << '\n';
  } else {
    std::cout << render_table(rep);
    for (const auto& w : rep.warnings) std::cout << "warning: " << w << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Packing experiments for centroid bodies and dual Sudakov bounds"};
  app.require_subcommand(1);

  std::string config_path, result_path, output, format = "table";
  std::optional<std::uint64_t> seed;
  bool rerun = false;

  auto* run_cmd = app.add_subcommand("run", "Run an experiment config and persist its report");
  run_cmd->add_option("config", config_path, "Config file (JSON)")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--seed", seed, "Override the config seeds with this single seed");
  run_cmd->add_option("-o,--output", output, "Report path (default: config 'output', else <experiment>.json)");
  run_cmd->add_option("--format", format, "Console format")->check(CLI::IsMember({"table", "csv", "json"}));

  app.add_subcommand("list-experiments", "List the registered experiments");

  auto* validate_cmd = app.add_subcommand("validate", "Check a config without running it");
  validate_cmd->add_option("config", config_path, "Config file (JSON)")->required()->check(CLI::ExistingFile);

  auto* report_cmd = app.add_subcommand("report", "Render a persisted report");
  report_cmd->add_option("result", result_path, "Report file")->required()->check(CLI::ExistingFile);
  report_cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"table", "csv", "json"}));

  auto* audit_cmd = app.add_subcommand("seed-audit", "Check seed derivation of a persisted report");
  audit_cmd->add_option("result", result_path, "Report file")->required()->check(CLI::ExistingFile);
  audit_cmd->add_flag("--rerun", rerun, "Re-run the embedded config and compare numeric columns");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(run_cmd)) {
      const auto config = load_config_file(config_path);
      const auto rep = run(config, seed);
      std::string path = output.empty() ? config.output : output;
      if (path.empty()) path = config.experiment + ".json";
      save_report(rep, path);
      print_report(rep, format);
      std::cerr << "report written to " << path << '\n';
      return rep.passed ? 0 : 1;
    }
    if (app.got_subcommand("list-experiments")) {
      for (const auto& d : experiment_catalog()) std::cout << d.name << "\n    " << d.description << '\n';
      return 0;
    }
    if (app.got_subcommand(validate_cmd)) {
      const auto config = load_config_file(config_path);
      std::cout << "ok " << config.experiment << " config " << config_hash(config) << '\n';
      std::cout << to_json(config).dump(2) << '\n';
      return 0;
    }
    if (app.got_subcommand(report_cmd)) return print_report(load_report(result_path), format);
    if (app.got_subcommand(audit_cmd)) {
      const auto audit = seed_audit(load_report(result_path), rerun);
      for (const auto& p : audit.problems) std::cout << "problem: " << p << '\n';
      std::cout << (audit.ok ? "ok" : "FAILED") << ": " << audit.rows << " rows audited";
      if (rerun) std::cout << ", " << audit.rerun_mismatches << " rerun mismatches";
      std::cout << '\n';
      return audit.ok ? 0 : 1;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

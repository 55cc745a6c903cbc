// analyze <config-file> [--out DIR] [--seed N] [--threads N]
//
// Exit codes: 0 analysis completed (whatever the verdict), 1 an identity
// failed in verify mode, 2 bad command line or scenario.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "charsym/report.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Characteristic analysis of sigma2 field theories on two-dimensional targets"};
  app.set_version_flag("--version", charsym::version_string());

  std::string config;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  app.add_option("config", config, "Scenario file (YAML)")->required();
  app.add_option("--out", out_dir, "Output directory (overrides output.dir)");
  app.add_option("--seed", seed, "Random seed (overrides analysis.seed)");
  app.add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 1024u));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  charsym::Scenario scenario;
  try {
    scenario = charsym::load_scenario(config);
  } catch (const charsym::ConfigError& e) {
    std::cerr << config << ": " << e.what() << "\n";
    return 2;
  } catch (const charsym::Error& e) {
    std::cerr << config << ": config error: " << e.what() << "\n";
    return 2;
  }
  if (seed) scenario.seed = *seed;
  if (out_dir) scenario.output.dir = *out_dir;

  try {
    const auto report = charsym::run_scenario(scenario, {threads});
    charsym::write_report(report, scenario.output.dir);
    const auto& rep = report.report;
    std::cout << charsym::version_string() << ": " << charsym::to_string(scenario.mode) << " mode";
    if (rep.contains("aggregate")) std::cout << ", verdict " << rep["aggregate"]["verdict"].get<std::string>();
    if (rep.contains("pass")) std::cout << (rep["pass"].get<bool>() ? ", all identities hold" : ", IDENTITY FAILURE");
    if (rep.contains("ray")) {
      const auto& ray = rep["ray"];
      if (ray.contains("termination")) std::cout << ", ray " << ray["termination"].get<std::string>();
      if (ray.contains("error")) std::cout << ", ray error: " << ray["error"].get<std::string>();
    }
    std::cout << "\nwrote";
    for (const auto& [name, _] : report.files) std::cout << " " << scenario.output.dir << "/" << name;
    std::cout << "\n";
    return report.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

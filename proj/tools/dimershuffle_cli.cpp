#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dimershuffle/harness.hpp"

using namespace dimershuffle;

int main(int argc, char** argv) {
  CLI::App app{"Domino shuffling experiments on the torus"};
  app.require_subcommand(1);

  const std::vector<std::string> keys{"L",     "a",        "rho1", "rho2", "delta1", "delta2", "steps", "burnin",
                                      "replicas", "seed", "nodes", "grid", "step",   "out",    "format"};
  const std::vector<std::string> names{"stationarity",     "simulate",     "speed-table",
                                       "verify-kasteleyn", "hessian-scan", "asymptotics"};
  std::map<std::string, std::map<std::string, std::optional<std::string>>> flags;
  std::map<std::string, std::string> config_path;
  std::map<std::string, std::vector<std::string>> extra;
  std::map<std::string, CLI::App*> subs;
  for (const std::string& name : names) {
    CLI::App* sub = app.add_subcommand(name, "Run the " + name + " experiment");
    subs[name] = sub;
    for (const std::string& k : keys) sub->add_option("--" + k, flags[name][k], k);
    sub->add_option("--config", config_path[name], "Config file with key = value lines");
    sub->add_option("--set", extra[name], "Extra key=value setting, e.g. threshold.tv=1e-12");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  for (const std::string& name : names) {
    if (!subs[name]->parsed()) continue;
    RunConfig cfg = default_config(*parse_command(name));
    try {
      if (!config_path[name].empty()) load_config_file(cfg, config_path[name]);
      for (auto& [k, v] : flags[name])
        if (v) apply_setting(cfg, k, *v);
      for (const std::string& kv : extra[name]) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value");
        apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
      }
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
    ExperimentResult res;
    try {
      res = run_command(cfg);
    } catch (const std::invalid_argument& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    } catch (const std::exception& e) {
      std::cerr << "failed: " << e.what() << "\n";
      return 1;
    }
    write_result(res, cfg);
    for (auto& [k, v] : res.summary) std::cerr << k << " = " << format_number(v) << "\n";
    for (auto& n : res.notes) std::cerr << "note: " << n << "\n";
    std::cerr << (res.pass ? "PASS" : "FAIL") << " (" << res.seconds << " s)\n";
    return res.pass ? 0 : 1;
  }
  return 2;
}

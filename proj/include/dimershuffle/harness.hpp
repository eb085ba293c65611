#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dimershuffle/lattice.hpp"

namespace dimershuffle {

enum class Command { kStationarity, kSimulate, kSpeedTable, kVerifyKasteleyn, kHessianScan, kAsymptotics };

std::optional<Command> parse_command(std::string_view name);
std::string command_name(Command c);

struct Thresholds {
  double tv = 1e-12;
  double speed_abs = 0.01;
  double speed_se = 3;
  double plateau_slope = 0.05;    // quarter units^2 per e-fold
  double sublinear_exponent = 0.5;
  double table_diff = 1e-10;
  double kasteleyn_speed = 1e-6;
  double kasteleyn_identity = 1e-8;
  double omega_residual = 1e-10;
  double arg_identity = 1e-8;
  double hessian_a1 = 1e-4;
  double origin_variation = 0.1;
  double asymptotic_variation = 0.5;
};

struct RunConfig {
  Command command = Command::kStationarity;
  int L = 2;
  double a = 0.5;
  double rho1 = 0;
  double rho2 = 0;
  std::optional<WindingPair> delta;  // overrides rho when set
  long steps = 4096;
  long burnin = 1024;
  int replicas = 32;
  std::uint64_t seed = 1;
  int nodes = 512;
  int grid = 41;
  double step = 1e-3;
  double margin = 0.05;
  std::vector<double> r_list{0.3, 0.5, 0.7};
  long fit_kmin = 256;
  long fit_kmax = 4096;
  long rough_kmin = 16;
  bool corrupt = false;  // negative control for stationarity
  std::string out;
  std::string format = "csv";
  Thresholds th;
};

RunConfig default_config(Command c);
// Throws std::invalid_argument on an unknown key or a malformed value.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);
// Flat "key = value" lines; '#' starts a comment.
void load_config_file(RunConfig& cfg, const std::string& path);
std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig& cfg);

struct ExperimentResult {
  std::string command;
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::pair<std::string, double>> summary;
  std::vector<std::string> notes;
  bool pass = true;
  double seconds = 0;

  double value(const std::string& key) const;
};

ExperimentResult cmd_stationarity(const RunConfig& cfg);
ExperimentResult cmd_simulate(const RunConfig& cfg);
ExperimentResult cmd_speed_table(const RunConfig& cfg);
ExperimentResult cmd_verify_kasteleyn(const RunConfig& cfg);
ExperimentResult cmd_hessian_scan(const RunConfig& cfg);
ExperimentResult cmd_asymptotics(const RunConfig& cfg);
// Dispatches on cfg.command and records the wall time.
ExperimentResult run_command(const RunConfig& cfg);

// Shortest round-trip decimal.
std::string format_number(double x);
// Header lines "# key = value", then the column header and rows. No timing.
std::string to_csv(const ExperimentResult& r);
std::string to_json(const ExperimentResult& r);
// CSV (or JSON) to cfg.out, or stdout when empty; JSON sidecar at out + ".json".
void write_result(const ExperimentResult& r, const RunConfig& cfg);

// Min of hardware concurrency and DIMERSHUFFLE_THREADS.
int worker_count();
// Runs f(0..n-1) on the worker pool.
void parallel_for(int n, const std::function<void(int)>& f);

// Nearest realizable winding to L * rho, searched outward from the rounding.
WindingPair nearest_realizable(int L, double rho1, double rho2);

struct LinearFit {
  double intercept = 0;
  double slope = 0;
  double r2 = 0;
};

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace dimershuffle

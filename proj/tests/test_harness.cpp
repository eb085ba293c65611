#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "dimershuffle/harness.hpp"
#include "dimershuffle/speed.hpp"

using namespace dimershuffle;

TEST(Harness, CommandNames) {
  for (const char* n : {"stationarity", "simulate", "speed-table", "verify-kasteleyn", "hessian-scan", "asymptotics"}) {
    auto c = parse_command(n);
    ASSERT_TRUE(c.has_value()) << n;
    EXPECT_EQ(command_name(*c), n);
  }
  EXPECT_FALSE(parse_command("simulation").has_value());
}

TEST(Harness, SettingsAndConfigFile) {
  RunConfig cfg = default_config(Command::kSimulate);
  EXPECT_EQ(cfg.L, 64);
  apply_setting(cfg, "a", " 0.25 ");
  apply_setting(cfg, "delta2", "-3");
  apply_setting(cfg, "r_list", "0.1, 0.9");
  apply_setting(cfg, "threshold.tv", "1e-9");
  EXPECT_EQ(cfg.a, 0.25);
  ASSERT_TRUE(cfg.delta.has_value());
  EXPECT_EQ(cfg.delta->d1, 0);
  EXPECT_EQ(cfg.delta->d2, -3);
  EXPECT_EQ(cfg.r_list, (std::vector<double>{0.1, 0.9}));
  EXPECT_EQ(cfg.th.tv, 1e-9);
  EXPECT_THROW(apply_setting(cfg, "colour", "1"), std::invalid_argument);
  EXPECT_THROW(apply_setting(cfg, "L", "12x"), std::invalid_argument);
  EXPECT_THROW(apply_setting(cfg, "format", "xml"), std::invalid_argument);
  EXPECT_THROW(apply_setting(cfg, "threshold.nothing", "1"), std::invalid_argument);

  const std::string path = ::testing::TempDir() + "harness_cfg.txt";
  {
    std::ofstream f(path);
    f << "# comment\nL = 8\n\nsteps = 100  # trailing\nrho1=0.125\n";
  }
  load_config_file(cfg, path);
  EXPECT_EQ(cfg.L, 8);
  EXPECT_EQ(cfg.steps, 100);
  EXPECT_EQ(cfg.rho1, 0.125);
  {
    std::ofstream f(path);
    f << "L 8\n";
  }
  EXPECT_THROW(load_config_file(cfg, path), std::invalid_argument);
  std::remove(path.c_str());
}

TEST(Harness, EchoContainsSeedAndThresholds) {
  RunConfig cfg = default_config(Command::kSimulate);
  cfg.seed = 77;
  bool seed = false, th = false;
  for (auto& [k, v] : config_echo(cfg)) {
    if (k == "seed") seed = v == "77";
    if (k == "threshold.speed_abs") th = v == "0.01";
  }
  EXPECT_TRUE(seed);
  EXPECT_TRUE(th);
}

TEST(Harness, ShortestRoundTrip) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(1.0), "1");
  EXPECT_EQ(format_number(-0.0), "0");
  EXPECT_EQ(format_number(1e-12), "1e-12");
  for (double x : {M_PI, 1.0 / 3, 2.5e-300, -123456.789}) EXPECT_EQ(std::stod(format_number(x)), x);
}

TEST(Harness, LeastSquares) {
  LinearFit f = least_squares({0, 1, 2, 3}, {1, 3, 5, 7});
  EXPECT_NEAR(f.slope, 2, 1e-14);
  EXPECT_NEAR(f.intercept, 1, 1e-14);
  EXPECT_NEAR(f.r2, 1, 1e-14);
  EXPECT_THROW(least_squares({1}, {1}), std::invalid_argument);
}

TEST(Harness, NearestRealizableWinding) {
  WindingPair d = nearest_realizable(64, 0.3, 0.1);
  EXPECT_EQ(d, (WindingPair{19, 6}));
  d = nearest_realizable(64, 0.3, -0.1);
  EXPECT_EQ(d, (WindingPair{19, -6}));
  d = nearest_realizable(4, 0.0, 0.0);
  EXPECT_EQ(d, (WindingPair{0, 0}));
}

TEST(Harness, WorkerPool) {
  setenv("DIMERSHUFFLE_THREADS", "1", 1);
  EXPECT_EQ(worker_count(), 1);
  unsetenv("DIMERSHUFFLE_THREADS");
  EXPECT_GE(worker_count(), 1);
  std::vector<int> hit(100, 0);
  parallel_for(100, [&](int i) { hit[i] += 1; });
  for (int h : hit) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(4, [](int i) { if (i == 2) throw std::runtime_error("x"); }), std::runtime_error);
}

TEST(Harness, StationarityAndNegativeControl) {
  for (double a : {1.0, 0.5}) {
    RunConfig cfg = default_config(Command::kStationarity);
    cfg.a = a;
    ExperimentResult r = cmd_stationarity(cfg);
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.value("sectors"), 13);
    EXPECT_LT(r.value("max_tv_T"), 1e-12);
  }
  RunConfig bad = default_config(Command::kStationarity);
  bad.corrupt = true;
  ExperimentResult r = cmd_stationarity(bad);
  EXPECT_FALSE(r.pass);
  EXPECT_GT(r.value("max_tv_T"), 1e-3);
  bad.L = 3;
  EXPECT_THROW(cmd_stationarity(bad), std::invalid_argument);
}

TEST(Harness, SpeedTable) {
  RunConfig cfg = default_config(Command::kSpeedTable);
  ExperimentResult r = cmd_speed_table(cfg);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.rows.size(), 41u * 41u);
  EXPECT_EQ(r.columns, (std::vector<std::string>{"rho1", "rho2", "v_closed", "v_harmonic", "abs_diff"}));
  int axis = 0;
  for (auto& row : r.rows) {
    SlopePM pm = to_pm({row[0], row[1]});
    if (std::abs(pm.plus) < 1e-12) {
      EXPECT_NEAR(row[2], row[0], 1e-12);
      ++axis;
    }
  }
  EXPECT_EQ(axis, 41);
  EXPECT_EQ(to_csv(r), to_csv(cmd_speed_table(cfg)));
}

TEST(Harness, CsvLayout) {
  RunConfig cfg = default_config(Command::kAsymptotics);
  ExperimentResult r = cmd_asymptotics(cfg);
  std::istringstream in(to_csv(r));
  std::string line;
  int comments = 0;
  while (std::getline(in, line) && line[0] == '#') ++comments;
  EXPECT_GT(comments, 20);
  EXPECT_EQ(line, "r,rho_plus,v_closed,v_asymptotic,remainder,ratio");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 9);
  const std::string js = to_json(r);
  EXPECT_NE(js.find("\"timing\""), std::string::npos);
  EXPECT_NE(js.find("\"seed\""), std::string::npos);
}

TEST(Harness, AsymptoticsRefusesUnitWeight) {
  RunConfig cfg = default_config(Command::kAsymptotics);
  EXPECT_TRUE(cmd_asymptotics(cfg).pass);
  cfg.r_list = {0.9};
  EXPECT_TRUE(cmd_asymptotics(cfg).pass);
  cfg.a = 1.0;
  EXPECT_THROW(cmd_asymptotics(cfg), std::invalid_argument);
}

TEST(Harness, HessianScan) {
  RunConfig cfg = default_config(Command::kHessianScan);
  cfg.a = 1.0;
  ExperimentResult r = cmd_hessian_scan(cfg);
  EXPECT_TRUE(r.pass);
  EXPECT_LT(r.value("max_abs_diff_closed"), 1e-4);
  cfg.a = 0.5;
  r = cmd_hessian_scan(cfg);
  EXPECT_TRUE(r.pass);
  EXPECT_LT(r.value("max_det"), 0);
  EXPECT_LT(r.value("origin_r0.5_det_variation"), 0.1);
}

TEST(Harness, VerifyKasteleyn) {
  RunConfig cfg = default_config(Command::kVerifyKasteleyn);
  ExperimentResult r = cmd_verify_kasteleyn(cfg);
  EXPECT_TRUE(r.pass);
  EXPECT_GE(r.value("points"), 25);
  EXPECT_LT(r.value("max_speed_residual"), 1e-6);
}

TEST(Harness, SimulateIsReproducibleAndThreadIndependent) {
  RunConfig cfg = default_config(Command::kSimulate);
  cfg.L = 8;
  cfg.steps = 64;
  cfg.burnin = 16;
  cfg.replicas = 3;
  cfg.rho1 = 0.25;
  cfg.rho2 = 0.125;
  ExperimentResult a = cmd_simulate(cfg);
  setenv("DIMERSHUFFLE_THREADS", "1", 1);
  ExperimentResult b = cmd_simulate(cfg);
  unsetenv("DIMERSHUFFLE_THREADS");
  EXPECT_EQ(to_csv(a), to_csv(b));
  EXPECT_EQ(a.value("delta1"), 2);
  EXPECT_EQ(a.value("delta2"), 1);
  EXPECT_EQ(a.rows.back()[0], 64);
  cfg.seed = 2;
  EXPECT_NE(to_csv(a), to_csv(cmd_simulate(cfg)));
}

TEST(Harness, SimulateSpeedMatchesMirroredClosedForm) {
  // The dynamics moves at v(rho1, -rho2); see the ledger of conventions.
  RunConfig cfg = default_config(Command::kSimulate);
  cfg.L = 16;
  cfg.steps = 1024;
  cfg.burnin = 512;
  cfg.replicas = 4;
  cfg.rho1 = 0.25;
  cfg.rho2 = 0;
  ExperimentResult r = cmd_simulate(cfg);
  EXPECT_EQ(r.value("speed_pass"), 1);
  EXPECT_NEAR(r.value("speed"), speed_closed_form({0.25, 0}, 1.0), 0.01);
  cfg.rho2 = 0.125;
  r = cmd_simulate(cfg);
  EXPECT_EQ(r.value("speed_pass_mirror"), 1);
}

TEST(Harness, SimulateRejectsBadInput) {
  RunConfig cfg = default_config(Command::kSimulate);
  cfg.replicas = 1;
  EXPECT_THROW(cmd_simulate(cfg), std::invalid_argument);
  cfg = default_config(Command::kSimulate);
  cfg.L = 4;
  cfg.delta = WindingPair{4, 0};
  EXPECT_ANY_THROW(cmd_simulate(cfg));
}

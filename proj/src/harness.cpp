#include "dimershuffle/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "dimershuffle/gibbs.hpp"
#include "dimershuffle/kasteleyn.hpp"
#include "dimershuffle/shuffle.hpp"
#include "dimershuffle/speed.hpp"

namespace dimershuffle {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr const char* kVersion = "1.0.0";

const std::map<std::string, Command>& command_table() {
  static const std::map<std::string, Command> t{{"stationarity", Command::kStationarity},
                                                {"simulate", Command::kSimulate},
                                                {"speed-table", Command::kSpeedTable},
                                                {"verify-kasteleyn", Command::kVerifyKasteleyn},
                                                {"hessian-scan", Command::kHessianScan},
                                                {"asymptotics", Command::kAsymptotics}};
  return t;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  double x = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) throw std::invalid_argument("bad value for " + key + ": " + v);
  return x;
}

long parse_long(const std::string& key, const std::string& v) {
  long x = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) throw std::invalid_argument("bad value for " + key + ": " + v);
  return x;
}

struct ThresholdKey {
  const char* name;
  double Thresholds::*field;
};

constexpr ThresholdKey kThresholdKeys[] = {
    {"tv", &Thresholds::tv},
    {"speed_abs", &Thresholds::speed_abs},
    {"speed_se", &Thresholds::speed_se},
    {"plateau_slope", &Thresholds::plateau_slope},
    {"sublinear_exponent", &Thresholds::sublinear_exponent},
    {"table_diff", &Thresholds::table_diff},
    {"kasteleyn_speed", &Thresholds::kasteleyn_speed},
    {"kasteleyn_identity", &Thresholds::kasteleyn_identity},
    {"omega_residual", &Thresholds::omega_residual},
    {"arg_identity", &Thresholds::arg_identity},
    {"hessian_a1", &Thresholds::hessian_a1},
    {"origin_variation", &Thresholds::origin_variation},
    {"asymptotic_variation", &Thresholds::asymptotic_variation},
};

std::string join(const std::vector<double>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_number(v[i]);
  return s;
}

ExperimentResult start(const RunConfig& cfg, std::vector<std::string> columns) {
  ExperimentResult r;
  r.command = command_name(cfg.command);
  r.metadata = config_echo(cfg);
  r.columns = std::move(columns);
  return r;
}

// Largest relative change between successive entries.
double successive_variation(const std::vector<double>& x) {
  double v = 0;
  for (size_t i = 1; i < x.size(); ++i) v = std::max(v, std::abs(x[i] - x[i - 1]) / std::abs(x[i]));
  return v;
}

bool is_axis(SlopePM pm) { return std::abs(pm.plus) < 1e-12 || std::abs(pm.minus) < 1e-12; }

}  // namespace

std::optional<Command> parse_command(std::string_view name) {
  auto it = command_table().find(std::string(name));
  if (it == command_table().end()) return std::nullopt;
  return it->second;
}

std::string command_name(Command c) {
  for (auto& [k, v] : command_table())
    if (v == c) return k;
  return "";
}

RunConfig default_config(Command c) {
  RunConfig cfg;
  cfg.command = c;
  switch (c) {
    case Command::kStationarity:
      cfg.L = 2;
      cfg.a = 0.5;
      break;
    case Command::kSimulate:
      cfg.L = 64;
      cfg.a = 1.0;
      cfg.rho1 = 0.3;
      cfg.rho2 = -0.1;
      break;
    case Command::kSpeedTable:
      cfg.grid = 41;
      cfg.a = 0.5;
      break;
    case Command::kVerifyKasteleyn:
      cfg.a = 0.5;
      cfg.grid = 25;
      break;
    case Command::kHessianScan:
      cfg.a = 0.5;
      cfg.grid = 37;
      break;
    case Command::kAsymptotics:
      cfg.a = 0.5;
      break;
  }
  return cfg;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "L") cfg.L = static_cast<int>(parse_long(key, v));
  else if (key == "a") cfg.a = parse_double(key, v);
  else if (key == "rho1") cfg.rho1 = parse_double(key, v);
  else if (key == "rho2") cfg.rho2 = parse_double(key, v);
  else if (key == "delta1") {
    WindingPair d = cfg.delta.value_or(WindingPair{});
    d.d1 = static_cast<int>(parse_long(key, v));
    cfg.delta = d;
  } else if (key == "delta2") {
    WindingPair d = cfg.delta.value_or(WindingPair{});
    d.d2 = static_cast<int>(parse_long(key, v));
    cfg.delta = d;
  } else if (key == "steps") cfg.steps = parse_long(key, v);
  else if (key == "burnin") cfg.burnin = parse_long(key, v);
  else if (key == "replicas") cfg.replicas = static_cast<int>(parse_long(key, v));
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_long(key, v));
  else if (key == "nodes") cfg.nodes = static_cast<int>(parse_long(key, v));
  else if (key == "grid") cfg.grid = static_cast<int>(parse_long(key, v));
  else if (key == "step") cfg.step = parse_double(key, v);
  else if (key == "margin") cfg.margin = parse_double(key, v);
  else if (key == "r_list") {
    cfg.r_list.clear();
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) cfg.r_list.push_back(parse_double(key, trim(item)));
  } else if (key == "fit_kmin") cfg.fit_kmin = parse_long(key, v);
  else if (key == "fit_kmax") cfg.fit_kmax = parse_long(key, v);
  else if (key == "rough_kmin") cfg.rough_kmin = parse_long(key, v);
  else if (key == "corrupt") cfg.corrupt = parse_long(key, v) != 0;
  else if (key == "out") cfg.out = v;
  else if (key == "format") {
    if (v != "csv" && v != "json") throw std::invalid_argument("format must be csv or json");
    cfg.format = v;
  } else if (key == "command") {
    auto c = parse_command(v);
    if (!c) throw std::invalid_argument("unknown command: " + v);
    cfg.command = *c;
  } else if (key.rfind("threshold.", 0) == 0) {
    const std::string name = key.substr(10);
    for (auto& t : kThresholdKeys)
      if (name == t.name) {
        cfg.th.*t.field = parse_double(key, v);
        return;
      }
    throw std::invalid_argument("unknown threshold: " + name);
  } else {
    throw std::invalid_argument("unknown key: " + key);
  }
}

void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file: " + path);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument(path + ":" + std::to_string(n) + ": expected key = value");
    apply_setting(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> e{
      {"command", command_name(cfg.command)},
      {"version", kVersion},
      {"L", std::to_string(cfg.L)},
      {"a", format_number(cfg.a)},
      {"rho1", format_number(cfg.rho1)},
      {"rho2", format_number(cfg.rho2)},
      {"delta", cfg.delta ? std::to_string(cfg.delta->d1) + "," + std::to_string(cfg.delta->d2) : "none"},
      {"steps", std::to_string(cfg.steps)},
      {"burnin", std::to_string(cfg.burnin)},
      {"replicas", std::to_string(cfg.replicas)},
      {"seed", std::to_string(cfg.seed)},
      {"nodes", std::to_string(cfg.nodes)},
      {"grid", std::to_string(cfg.grid)},
      {"step", format_number(cfg.step)},
      {"margin", format_number(cfg.margin)},
      {"r_list", join(cfg.r_list)},
      {"fit_kmin", std::to_string(cfg.fit_kmin)},
      {"fit_kmax", std::to_string(cfg.fit_kmax)},
      {"rough_kmin", std::to_string(cfg.rough_kmin)},
      {"corrupt", cfg.corrupt ? "1" : "0"},
  };
  for (auto& t : kThresholdKeys) e.emplace_back(std::string("threshold.") + t.name, format_number(cfg.th.*t.field));
  return e;
}

double ExperimentResult::value(const std::string& key) const {
  for (auto& [k, v] : summary)
    if (k == key) return v;
  throw std::out_of_range("no summary entry " + key);
}

int worker_count() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("DIMERSHUFFLE_THREADS")) {
    int cap = std::atoi(env);
    if (cap >= 1) n = std::min(n, cap);
  }
  return n;
}

void parallel_for(int n, const std::function<void(int)>& f) {
  const int workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex m;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(m);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

WindingPair nearest_realizable(int L, double rho1, double rho2) {
  const int c1 = static_cast<int>(std::lround(L * rho1));
  const int c2 = static_cast<int>(std::lround(L * rho2));
  std::vector<WindingPair> cand;
  for (int d1 = -L; d1 <= L; ++d1)
    for (int d2 = -L; d2 <= L; ++d2) cand.push_back({d1, d2});
  auto dist = [&](WindingPair d) { return std::hypot(d.d1 - L * rho1, d.d2 - L * rho2); };
  std::stable_sort(cand.begin(), cand.end(), [&](WindingPair x, WindingPair y) {
    double dx = dist(x), dy = dist(y);
    if (dx != dy) return dx < dy;
    return std::abs(x.d1 - c1) + std::abs(x.d2 - c2) < std::abs(y.d1 - c1) + std::abs(y.d2 - c2);
  });
  for (WindingPair d : cand) {
    if (std::abs(d.d1) + std::abs(d.d2) >= L) continue;
    try {
      staircase_config(L, d);
      return d;
    } catch (const std::exception&) {
    }
  }
  throw std::invalid_argument("no realizable winding near L * rho");
}

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  if (n < 2 || y.size() != n) throw std::invalid_argument("least_squares: need at least two points");
  double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

ExperimentResult cmd_stationarity(const RunConfig& cfg) {
  if (cfg.L < 1 || cfg.L > 2) throw std::invalid_argument("stationarity: L must be 1 or 2");
  if (!(cfg.a > 0)) throw std::invalid_argument("stationarity: a must be positive");
  ExperimentResult res = start(cfg, {"delta1", "delta2", "configs", "tv_T", "tv_F0"});
  std::set<std::pair<int, int>> sectors;
  for (const DimerConfig& eta : enumerate_matchings(cfg.L)) {
    WindingPair d = winding_numbers(eta);
    sectors.insert({d.d1, d.d2});
  }
  if (sectors.empty()) throw std::runtime_error("stationarity: sector enumeration failed");
  std::vector<std::pair<int, int>> list(sectors.begin(), sectors.end());

  const ShuffleWeights sw = make_shuffle_weights(cfg.L, {cfg.a});
  WeightField w1 = sw.w1;
  if (cfg.corrupt)
    for (int i = 0; i < 2 * cfg.L; ++i)
      for (int j = 0; j < 2 * cfg.L; ++j) {
        FaceWeights& f = w1.at(i, j);
        std::swap(f.a, f.b);
        std::swap(f.c, f.d);
      }

  res.rows.resize(list.size());
  parallel_for(static_cast<int>(list.size()), [&](int s) {
    WindingPair d{list[s].first, list[s].second};
    SectorDistribution pi = exact_distribution(sw.w0, d);
    SectorDistribution mid = push_forward_F(pi, sw.w0, 0);
    const double tv_f0 = total_variation(mid, exact_distribution(sw.w1, {-d.d1, -d.d2}));
    SectorDistribution end = push_forward_F(mid, w1, 1);
    SectorDistribution out{cfg.L, end.delta, {}};
    for (auto& [k, p] : end.table) out.table[translate(DimerConfig::from_key(cfg.L, k), -1, -1).key()] += p;
    const double tv_t = total_variation(out, pi);
    res.rows[s] = {double(d.d1), double(d.d2), double(pi.table.size()), tv_t, tv_f0};
  });

  double max_t = 0, max_f0 = 0;
  for (auto& row : res.rows) {
    max_t = std::max(max_t, row[3]);
    max_f0 = std::max(max_f0, row[4]);
  }
  res.pass = max_t < cfg.th.tv && max_f0 < cfg.th.tv;
  res.summary = {{"sectors", double(list.size())}, {"max_tv_T", max_t}, {"max_tv_F0", max_f0}, {"pass", double(res.pass)}};
  return res;
}

ExperimentResult cmd_simulate(const RunConfig& cfg) {
  if (cfg.L < 1) throw std::invalid_argument("simulate: L must be positive");
  if (!(cfg.a > 0)) throw std::invalid_argument("simulate: a must be positive");
  if (cfg.steps < 1 || cfg.burnin < 0 || cfg.replicas < 2)
    throw std::invalid_argument("simulate: need steps >= 1, burnin >= 0, replicas >= 2");
  const WindingPair delta = cfg.delta ? *cfg.delta : nearest_realizable(cfg.L, cfg.rho1, cfg.rho2);
  const DimerConfig start_config = staircase_config(cfg.L, delta);
  const Slope rho{double(delta.d1) / cfg.L, double(delta.d2) / cfg.L};

  std::vector<long> ks;
  for (int j = 0;; ++j) {
    long k = std::lround(std::pow(2.0, j / 4.0));
    if (k > cfg.steps) break;
    if (ks.empty() || k != ks.back()) ks.push_back(k);
  }
  if (ks.back() != cfg.steps) ks.push_back(cfg.steps);

  ExperimentResult res =
      start(cfg, {"k", "mean_height_change", "mean_h0_change", "var_height_change", "var_of_face_means"});
  const ShuffleWeights sw = make_shuffle_weights(cfg.L, {cfg.a});
  const int R = cfg.replicas;
  const int n = 2 * cfg.L;
  const size_t K = ks.size();
  // Per replica and checkpoint: face mean, mean of squares (quarter units), h at face (0,0).
  std::vector<std::vector<double>> m1(R, std::vector<double>(K)), m2 = m1, h00 = m1;
  std::vector<double> burn_speed(R, 0);

  const RngStream root(cfg.seed);
  parallel_for(R, [&](int r) {
    ShuffleEngine engine(sw, root.substream(r));
    engine.load({start_config, 0, 0});
    const long half = cfg.burnin / 2;
    double acc = 0;
    for (long b = 0; b < cfg.burnin; ++b) {
      StepInfo info = engine.step();
      if (b >= half) acc += info.mean_increment;
    }
    burn_speed[r] = cfg.burnin - half > 0 ? acc / double(cfg.burnin - half) : 0.0;
    const std::vector<QuarterInt> base = engine.heights();
    size_t next = 0;
    for (long k = 1; k <= cfg.steps; ++k) {
      engine.step();
      if (next < K && k == ks[next]) {
        const auto& h = engine.heights();
        double s1 = 0, s2 = 0;
        int count = 0;
        for (int j = 0; j < n; ++j)
          for (int i = (j & 1); i < n; i += 2) {
            const double d = double(h[j * n + i] - base[j * n + i]);
            s1 += d;
            s2 += d * d;
            ++count;
          }
        m1[r][next] = s1 / count;
        m2[r][next] = s2 / count;
        h00[r][next] = double(h[0] - base[0]);
        ++next;
      }
    }
  });

  std::vector<double> var(K);
  for (size_t c = 0; c < K; ++c) {
    double a1 = 0, a2 = 0, a0 = 0;
    for (int r = 0; r < R; ++r) {
      a1 += m1[r][c];
      a2 += m2[r][c];
      a0 += h00[r][c];
    }
    a1 /= R;
    a2 /= R;
    a0 /= R;
    double vm = 0;
    for (int r = 0; r < R; ++r) vm += (m1[r][c] - a1) * (m1[r][c] - a1);
    vm /= (R - 1);
    var[c] = a2 - a1 * a1;
    res.rows.push_back({double(ks[c]), a1 / 4, a0 / 4, var[c], vm});
  }

  // Speed per replica in full units.
  std::vector<double> speed(R);
  for (int r = 0; r < R; ++r) speed[r] = m1[r][K - 1] / 4 / double(cfg.steps);
  auto mean_se = [&](const std::vector<double>& x) {
    double m = 0;
    for (double v : x) m += v;
    m /= x.size();
    double s = 0;
    for (double v : x) s += (v - m) * (v - m);
    return std::pair<double, double>{m, std::sqrt(s / (x.size() - 1) / x.size())};
  };
  auto [v_emp, se] = mean_se(speed);
  auto [v_burn, se_burn] = mean_se(burn_speed);
  const double v_closed = speed_closed_form(rho, cfg.a);
  const double v_mirror = speed_closed_form({rho.rho1, -rho.rho2}, cfg.a);
  const double tol = std::max(cfg.th.speed_se * se, cfg.th.speed_abs);
  const bool speed_pass = std::abs(v_emp - v_closed) < tol;
  const bool mirror_pass = std::abs(v_emp - v_mirror) < tol;
  const bool burn_flag =
      cfg.burnin > 1 && std::abs(v_burn - v_emp) > std::max(cfg.th.speed_se * std::hypot(se, se_burn), cfg.th.speed_abs);
  if (burn_flag) res.notes.push_back("burn-in speed differs from the measured speed; consider a longer burn-in");

  const bool smooth = cfg.a < 1 && delta.d1 == 0 && delta.d2 == 0;
  std::vector<double> lx, ly, llx, lly;
  for (size_t c = 0; c < K; ++c) {
    const long lo = smooth ? cfg.fit_kmin : cfg.rough_kmin;
    if (ks[c] < lo || ks[c] > cfg.fit_kmax) continue;
    lx.push_back(std::log(double(ks[c])));
    ly.push_back(var[c]);
    if (var[c] > 0) {
      llx.push_back(std::log(double(ks[c])));
      lly.push_back(std::log(var[c]));
    }
  }
  bool fluct_pass = false;
  LinearFit fit, loglog;
  if (lx.size() >= 2) {
    fit = least_squares(lx, ly);
    if (smooth) {
      fluct_pass = std::abs(fit.slope) < cfg.th.plateau_slope;
    } else if (llx.size() >= 2) {
      loglog = least_squares(llx, lly);
      fluct_pass = fit.slope > 0 && loglog.slope < cfg.th.sublinear_exponent;
    }
  } else {
    res.notes.push_back("too few checkpoints in the fit window");
  }

  res.pass = speed_pass && fluct_pass;
  res.summary = {{"delta1", double(delta.d1)},
                 {"delta2", double(delta.d2)},
                 {"rho1_realized", rho.rho1},
                 {"rho2_realized", rho.rho2},
                 {"speed", v_emp},
                 {"speed_se", se},
                 {"v_closed", v_closed},
                 {"abs_diff", std::abs(v_emp - v_closed)},
                 {"tolerance", tol},
                 {"speed_pass", double(speed_pass)},
                 {"v_closed_mirror", v_mirror},
                 {"abs_diff_mirror", std::abs(v_emp - v_mirror)},
                 {"speed_pass_mirror", double(mirror_pass)},
                 {"burnin_speed", v_burn},
                 {"burnin_flag", double(burn_flag)},
                 {"phase_smooth", double(smooth)},
                 {"var_fit_intercept", fit.intercept},
                 {"var_fit_slope", fit.slope},
                 {"var_fit_r2", fit.r2},
                 {"var_loglog_exponent", loglog.slope},
                 {"fluct_pass", double(fluct_pass)},
                 {"pass", double(res.pass)}};
  return res;
}

ExperimentResult cmd_speed_table(const RunConfig& cfg) {
  if (cfg.grid < 1) throw std::invalid_argument("speed-table: grid must be positive");
  if (!(cfg.a > 0)) throw std::invalid_argument("speed-table: a must be positive");
  ExperimentResult res = start(cfg, {"rho1", "rho2", "v_closed", "v_harmonic", "abs_diff"});
  const int n = cfg.grid;
  res.rows.resize(size_t(n) * n);
  parallel_for(n, [&](int i) {
    for (int j = 0; j < n; ++j) {
      SlopePM pm{kPi * (-1 + 2.0 * (i + 1) / (n + 1)), kPi * (-1 + 2.0 * (j + 1) / (n + 1))};
      if (std::abs(pm.plus) < 1e-12) pm.plus = 0;
      if (std::abs(pm.minus) < 1e-12) pm.minus = 0;
      const Slope s = from_pm(pm);
      const double vc = speed_closed_form(s, cfg.a);
      // The harmonic route is undefined on the axes; use the symmetry-forced value.
      double vh;
      if (pm.plus == 0) vh = s.rho1;
      else if (pm.minus == 0) vh = 0;
      else vh = speed_harmonic(s, cfg.a);
      res.rows[size_t(i) * n + j] = {s.rho1, s.rho2, vc, vh, std::abs(vc - vh)};
    }
  });
  double max_diff = 0, max_axis = 0;
  for (auto& row : res.rows) {
    max_diff = std::max(max_diff, row[4]);
    if (is_axis(to_pm({row[0], row[1]}))) max_axis = std::max(max_axis, row[4]);
  }
  res.pass = max_diff < cfg.th.table_diff;
  res.summary = {{"points", double(res.rows.size())}, {"max_abs_diff", max_diff}, {"max_axis_diff", max_axis}, {"pass", double(res.pass)}};
  return res;
}

ExperimentResult cmd_verify_kasteleyn(const RunConfig& cfg) {
  if (!(cfg.a > 0 && cfg.a <= 1)) throw std::invalid_argument("verify-kasteleyn: need 0 < a <= 1");
  ExperimentResult res = start(cfg, {"r1", "r2", "c1", "c2", "c3", "c4", "rho1", "rho2", "v_numeric", "v_closed",
                                     "speed_residual", "identity_residual", "omega_residual", "arg_residual",
                                     "vertex_residual"});
  const std::vector<MagneticCoords> grid = default_r_grid(cfg.a, cfg.grid);
  QuadratureSpec q;
  q.n_initial = cfg.nodes;
  const double c = coupling_c(cfg.a);
  res.rows.resize(grid.size());
  std::atomic<int> positive_lhs{0};
  parallel_for(static_cast<int>(grid.size()), [&](int p) {
    const MagneticCoords r = grid[p];
    const EdgeProbabilities e = edge_probabilities(r, cfg.a, q);
    const Slope s = slope_from_kinv(r, cfg.a, q);
    const OmegaC oc = find_omega_c(r, cfg.a);
    const double vn = e.c1 - e.c2;
    const double vc = speed_closed_form(s, cfg.a);
    auto [lhs, rhs] = arg_identity_sides(s, std::arg(oc.omega), c, 0, 0);
    if (lhs > 1e-14) ++positive_lhs;
    const double vertex = std::abs(vertex_sum(r, cfg.a, q) - 1.0);
    res.rows[p] = {r.r1, r.r2, e.c1, e.c2, e.c3, e.c4, s.rho1, s.rho2, vn, vc, std::abs(vn - vc),
                   std::abs(vn - (e.c3 - e.c4)), oc.residual, std::abs(std::abs(lhs) - rhs), vertex};
  });
  double m_speed = 0, m_id = 0, m_omega = 0, m_arg = 0, m_vertex = 0;
  for (auto& row : res.rows) {
    m_speed = std::max(m_speed, row[10]);
    m_id = std::max(m_id, row[11]);
    m_omega = std::max(m_omega, row[12]);
    m_arg = std::max(m_arg, row[13]);
    m_vertex = std::max(m_vertex, row[14]);
  }
  res.pass = !grid.empty() && m_speed < cfg.th.kasteleyn_speed && m_id < cfg.th.kasteleyn_identity &&
             m_omega < cfg.th.omega_residual && m_arg < cfg.th.arg_identity && positive_lhs == 0;
  res.summary = {{"points", double(grid.size())},     {"max_speed_residual", m_speed},
                 {"max_identity_residual", m_id},     {"max_omega_residual", m_omega},
                 {"max_arg_residual", m_arg},         {"max_vertex_residual", m_vertex},
                 {"positive_arg_lhs", double(positive_lhs.load())}, {"pass", double(res.pass)}};
  return res;
}

ExperimentResult cmd_hessian_scan(const RunConfig& cfg) {
  if (!(cfg.a > 0 && cfg.a <= 1)) throw std::invalid_argument("hessian-scan: need 0 < a <= 1");
  if (cfg.grid < 2) throw std::invalid_argument("hessian-scan: grid must be at least 2");
  const bool unit = cfg.a == 1.0;
  std::vector<std::string> cols{"rho1", "rho2", "det", "trace"};
  if (unit) {
    cols.push_back("det_closed");
    cols.push_back("abs_diff");
  }
  ExperimentResult res = start(cfg, cols);
  const int n = cfg.grid;
  const double span = 1.0 - 2 * cfg.margin;
  std::vector<Slope> pts;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Slope s{-span + 2 * span * i / (n - 1), -span + 2 * span * j / (n - 1)};
      SlopePM pm = to_pm(s);
      if (std::abs(s.rho1) + std::abs(s.rho2) > 1 - cfg.margin || std::hypot(s.rho1, s.rho2) < cfg.margin) continue;
      if (std::abs(pm.plus) < cfg.margin * kPi || std::abs(pm.minus) < cfg.margin * kPi) continue;
      pts.push_back(s);
    }
  res.rows.resize(pts.size());
  parallel_for(static_cast<int>(pts.size()), [&](int p) {
    HessianResult H = hessian_fd(pts[p], cfg.a, cfg.step);
    std::vector<double> row{pts[p].rho1, pts[p].rho2, H.det, H.trace};
    if (unit) {
      const double dc = det_hessian_a1(pts[p]);
      row.push_back(dc);
      row.push_back(std::abs(H.det - dc));
    }
    res.rows[p] = row;
  });
  double max_det = -INFINITY, max_diff = 0;
  for (auto& row : res.rows) {
    max_det = std::max(max_det, row[2]);
    if (unit) max_diff = std::max(max_diff, row[5]);
  }
  bool pass = !pts.empty() && max_det < 0;
  res.summary = {{"points", double(pts.size())}, {"max_det", max_det}};
  if (unit) {
    pass = pass && max_diff < cfg.th.hessian_a1;
    res.summary.push_back({"max_abs_diff_closed", max_diff});
  } else {
    const std::vector<double> plus{0.2, 0.1, 0.05, 0.025};
    for (double r : cfg.r_list) {
      std::vector<double> tr, det;
      const std::string tag = "origin_r" + format_number(r);
      for (double p : plus) {
        HessianResult H = hessian_fd(from_pm({p, r * p}), cfg.a, cfg.step * p / 0.2);
        tr.push_back(H.trace * p);
        det.push_back(H.det);
        res.summary.push_back({tag + "_p" + format_number(p) + "_trace_scaled", H.trace * p});
        res.summary.push_back({tag + "_p" + format_number(p) + "_det", H.det});
      }
      const double vt = successive_variation(tr), vd = successive_variation(det);
      res.summary.push_back({tag + "_trace_variation", vt});
      res.summary.push_back({tag + "_det_variation", vd});
      pass = pass && vt < cfg.th.origin_variation && vd < cfg.th.origin_variation && det.back() < 0;
    }
  }
  res.pass = pass;
  res.summary.push_back({"pass", double(pass)});
  return res;
}

ExperimentResult cmd_asymptotics(const RunConfig& cfg) {
  if (!(cfg.a > 0 && cfg.a < 1)) throw std::invalid_argument("asymptotics: the expansion requires 0 < a < 1");
  ExperimentResult res = start(cfg, {"r", "rho_plus", "v_closed", "v_asymptotic", "remainder", "ratio"});
  bool pass = !cfg.r_list.empty();
  for (double r : cfg.r_list) {
    if (!(r > 0 && r < 1)) throw std::invalid_argument("asymptotics: r must lie in (0, 1)");
    std::vector<double> ratio;
    for (double p : {0.1, 0.05, 0.025}) {
      const Slope s = from_pm({p, r * p});
      const double vc = speed_closed_form(s, cfg.a), va = speed_asymptotic(s, cfg.a);
      ratio.push_back((vc - va) / std::pow(p, 5));
      res.rows.push_back({r, p, vc, va, vc - va, ratio.back()});
    }
    const double var = successive_variation(ratio);
    res.summary.push_back({"r" + format_number(r) + "_variation", var});
    pass = pass && var < cfg.th.asymptotic_variation;
  }
  res.pass = pass;
  res.summary.push_back({"pass", double(pass)});
  return res;
}

ExperimentResult run_command(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentResult r;
  switch (cfg.command) {
    case Command::kStationarity: r = cmd_stationarity(cfg); break;
    case Command::kSimulate: r = cmd_simulate(cfg); break;
    case Command::kSpeedTable: r = cmd_speed_table(cfg); break;
    case Command::kVerifyKasteleyn: r = cmd_verify_kasteleyn(cfg); break;
    case Command::kHessianScan: r = cmd_hessian_scan(cfg); break;
    case Command::kAsymptotics: r = cmd_asymptotics(cfg); break;
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0) x = 0;  // drop the sign of -0
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

std::string to_csv(const ExperimentResult& r) {
  std::string s;
  for (auto& [k, v] : r.metadata) s += "# " + k + " = " + v + "\n";
  for (auto& [k, v] : r.summary) s += "# result." + k + " = " + format_number(v) + "\n";
  for (auto& note : r.notes) s += "# note = " + note + "\n";
  for (size_t i = 0; i < r.columns.size(); ++i) s += (i ? "," : "") + r.columns[i];
  s += "\n";
  for (auto& row : r.rows) {
    for (size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + format_number(row[i]);
    s += "\n";
  }
  return s;
}

std::string to_json(const ExperimentResult& r) {
  nlohmann::ordered_json j;
  j["command"] = r.command;
  j["config"] = nlohmann::ordered_json::object();
  for (auto& [k, v] : r.metadata) j["config"][k] = v;
  j["pass"] = r.pass;
  j["summary"] = nlohmann::ordered_json::object();
  for (auto& [k, v] : r.summary) j["summary"][k] = v;
  j["notes"] = r.notes;
  j["columns"] = r.columns;
  j["rows"] = r.rows;
  j["timing"] = {{"seconds", r.seconds}, {"workers", worker_count()}};
  return j.dump(2) + "\n";
}

void write_result(const ExperimentResult& r, const RunConfig& cfg) {
  const std::string body = cfg.format == "json" ? to_json(r) : to_csv(r);
  if (cfg.out.empty()) {
    std::cout << body;
    return;
  }
  std::ofstream f(cfg.out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + cfg.out);
  f << body;
  if (cfg.format == "csv") {
    std::ofstream js(cfg.out + ".json", std::ios::binary);
    if (!js) throw std::runtime_error("cannot write " + cfg.out + ".json");
    js << to_json(r);
  }
}

}  // namespace dimershuffle

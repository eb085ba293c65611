#include "dimershuffle/kasteleyn.hpp"

#include <algorithm>
#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace dimershuffle {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();
const cplx kI{0.0, 1.0};

cplx ipow(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return {1, 0};
    case 1: return {0, 1};
    case 2: return {-1, 0};
    default: return {0, -1};
  }
}

cplx cpow_int(cplx z, int k) {
  cplx base = k < 0 ? 1.0 / z : z;
  int e = k < 0 ? -k : k;
  cplx out{1, 0};
  while (e) {
    if (e & 1) out *= base;
    base *= base;
    e >>= 1;
  }
  return out;
}

using Gauss = boost::math::quadrature::gauss<double, 20>;

template <class F>
cplx gauss_panel(F&& f, double lo, double hi) {
  const auto& x = Gauss::abscissa();
  const auto& w = Gauss::weights();
  double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  cplx sum{0, 0};
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0) {
      sum += w[i] * f(mid);
    } else {
      sum += w[i] * (f(mid - half * x[i]) + f(mid + half * x[i]));
    }
  }
  return sum * half;
}

// Composite Gauss-Legendre, panels doubled until the change drops below tol.
template <class F>
cplx gauss_adaptive(F&& f, double lo, double hi, double tol, double* change) {
  auto run = [&](int panels) {
    cplx s{0, 0};
    double h = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) s += gauss_panel(f, lo + p * h, lo + (p + 1) * h);
    return s;
  };
  cplx prev = run(1);
  for (int panels = 2; panels <= 4096; panels *= 2) {
    cplx cur = run(panels);
    double d = std::abs(cur - prev);
    prev = cur;
    if (d <= tol * std::max(1.0, std::abs(cur))) {
      if (change) *change = d;
      return cur;
    }
  }
  if (change) *change = std::abs(prev) * 1e-16;
  return prev;
}

// Coefficient of u^k in 1 / (1 + beta u + u^2).
cplx chebyshev_coeff(int k, cplx beta) {
  if (k < 0) return 0;
  cplx c0{1, 0}, c1 = -beta;
  if (k == 0) return c0;
  for (int j = 2; j <= k; ++j) {
    cplx c2 = -beta * c1 - c0;
    c0 = c1;
    c1 = c2;
  }
  return c1;
}

struct EntryIndex {
  int m = 0;
  int n = 0;
  int h = 0;
  int eps2 = 0;
};

EntryIndex entry_index(RotatedVertex x, RotatedVertex y) {
  if (!x.black() || y.black() || ((x.x1 + x.x2) & 1) == 0 || ((y.x1 + y.x2) & 1) == 0) {
    throw std::invalid_argument("kinv: need a black and a white vertex");
  }
  EntryIndex e;
  e.m = (x.x1 - y.x1 + 1) / 2;
  e.n = (y.x2 - x.x2 - 1) / 2;
  e.eps2 = y.epsilon();
  e.h = x.epsilon() ^ e.eps2;
  return e;
}

// Inner contour integral in u2 at fixed u1, split into the pole at the origin
// and the pole at the small root of u^2 + beta u + 1.
struct InnerParts {
  cplx smooth;
  cplx root_term;
  double root_modulus = 0;
};

InnerParts inner_parts(cplx u1, double a, double c, double R2, const EntryIndex& e) {
  cplx s = u1 + 1.0 / u1;
  cplx beta = (2.0 / c) / s;
  // Contour radius above one is mapped to its inverse with q -> -q.
  int sgn = R2 < 1 ? 1 : -1;
  cplx disc = std::sqrt(beta * beta - 4.0);
  cplx r1 = 0.5 * (-beta + disc), r2 = 0.5 * (-beta - disc);
  cplx small = std::abs(r1) < std::abs(r2) ? r1 : r2;
  int q1 = sgn * (e.h - 1 - e.n), q2 = sgn * (-e.h - e.n);
  cplx ea = std::pow(a, e.eps2), eb = std::pow(a, 1 - e.eps2);
  cplx pre = cpow_int(u1, -e.m) / (a * s);
  InnerParts out;
  out.smooth = pre * (ea * chebyshev_coeff(-q1 - 1, beta) + eb * u1 * chebyshev_coeff(-q2 - 1, beta));
  cplx d = small - 1.0 / small;
  out.root_term = pre * (ea * cpow_int(small, q1) + eb * u1 * cpow_int(small, q2)) / d;
  out.root_modulus = std::abs(small);
  return out;
}

}  // namespace

RotatedVertex to_rotated(int X, int Y) { return {X + Y, 1 - X + Y}; }

double MagneticCoords::R1() const { return std::sqrt(r1 / r2); }
double MagneticCoords::R2() const { return 1.0 / std::sqrt(r1 * r2); }

cplx characteristic_polynomial(cplx z, cplx w, double a) {
  double c = coupling_c(a);
  return a * (2.0 / c + w + 1.0 / w + z + 1.0 / z);
}

std::optional<std::pair<cplx, cplx>> torus_zero(MagneticCoords r, double a) {
  // With z = e^{it}, w = e^{ip}: A1 cos t + A2 cos p = -2/c and
  // B1 sin t + B2 sin p = 0.
  double c = coupling_c(a);
  double A1 = r.r1 + 1 / r.r1, B1 = r.r1 - 1 / r.r1;
  double A2 = r.r2 + 1 / r.r2, B2 = r.r2 - 1 / r.r2;
  bool swap = std::abs(B1) > std::abs(B2);
  if (swap) {
    std::swap(A1, A2);
    std::swap(B1, B2);
  }
  if (std::abs(B2) < 1e-14) return std::nullopt;
  auto H = [&](double t) {
    double cp = (-2.0 / c - A1 * std::cos(t)) / A2;
    double sp = -B1 * std::sin(t) / B2;
    return cp * cp + sp * sp - 1.0;
  };
  const int grid = 4096;
  double best_t = -1;
  for (int i = 0; i < grid && best_t < 0; ++i) {
    double t0 = kPi * i / grid, t1 = kPi * (i + 1) / grid;
    double h0 = H(t0), h1 = H(t1);
    if (h0 == 0 && i > 0) {
      best_t = t0;
    } else if ((h0 < 0) != (h1 < 0)) {
      for (int it = 0; it < 200; ++it) {
        double tm = 0.5 * (t0 + t1);
        if ((H(tm) < 0) == (h0 < 0)) {
          t0 = tm;
        } else {
          t1 = tm;
        }
      }
      best_t = 0.5 * (t0 + t1);
    }
  }
  if (best_t <= 0 || best_t >= kPi) return std::nullopt;
  double cp = (-2.0 / c - A1 * std::cos(best_t)) / A2;
  double sp = -B1 * std::sin(best_t) / B2;
  cplx zt = std::polar(1.0, best_t);
  cplx wt = std::polar(1.0, std::atan2(sp, cp));
  cplx z = swap ? wt : zt, w = swap ? zt : wt;
  if (z.imag() < 0) {
    z = std::conj(z);
    w = std::conj(w);
  }
  if (std::abs(characteristic_polynomial(r.r1 * z, r.r2 * w, a)) > 1e-8 * a / c) return std::nullopt;
  return std::make_pair(z, w);
}

bool in_amoeba(MagneticCoords r, double a) { return torus_zero(r, a).has_value(); }

OmegaC find_omega_c(MagneticCoords r, double a) {
  auto zero = torus_zero(r, a);
  if (!zero) throw std::invalid_argument("find_omega_c: r is outside the amoeba");
  double c = coupling_c(a);
  double k = std::sqrt(c / 2.0);
  auto omega = [&](cplx u) { return -kI * k * (u + 1.0 / u); };
  OmegaC out;
  int slot = 0;
  bool found = false;
  for (int conj = 0; conj < 2; ++conj) {
    cplx z = r.r1 * (conj ? std::conj(zero->first) : zero->first);
    cplx w = r.r2 * (conj ? std::conj(zero->second) : zero->second);
    for (int sign = 0; sign < 2; ++sign) {
      cplx u1 = std::sqrt(z / w) * (sign ? -1.0 : 1.0);
      cplx u2 = u1 / z;
      cplx w1 = omega(u1), w2 = omega(u2);
      out.crossings[slot++] = w1;
      if (w1.real() > 0 && w1.imag() > 0) {
        out.omega_r1 = w1;
        out.omega = std::conj(w2);
        out.residual = std::abs(1.0 - w1 * w2);
        found = true;
      }
    }
  }
  if (!found) throw std::runtime_error("find_omega_c: no crossing in the first quadrant");
  return out;
}

KinvResult kinv_entry(MagneticCoords r, double a, RotatedVertex x, RotatedVertex y, const QuadratureSpec& q) {
  EntryIndex e = entry_index(x, y);
  double c = coupling_c(a);
  double R1 = r.R1(), R2 = r.R2();
  if (std::abs(R1 - 1) < 1e-12 || std::abs(R2 - 1) < 1e-12) {
    throw std::invalid_argument("kinv: contour radius equal to one");
  }
  double Rin = std::min(R2, 1.0 / R2);
  auto parts = [&](double t) { return inner_parts(std::polar(R1, t), a, c, R2, e); };

  // Smooth part: periodic trapezoid with doubling.
  auto trap = [&](int n) {
    cplx s{0, 0};
    for (int i = 0; i < n; ++i) s += parts(2 * kPi * i / n).smooth;
    return s / double(n);
  };
  int n = std::max(256, q.n_initial);
  cplx prev = trap(n);
  double smooth_change = 0;
  for (;;) {
    if (2 * n > q.max_n) break;
    n *= 2;
    cplx cur = trap(n);
    smooth_change = std::abs(cur - prev);
    prev = cur;
    if (smooth_change <= q.tol * std::max(1.0, std::abs(cur))) break;
  }
  cplx total = prev;
  double change = smooth_change;

  // Root part: arcs of the circle where the small root lies inside.
  auto dist = [&](double t) { return parts(t).root_modulus - Rin; };
  const int grid = 4096;
  std::vector<double> d(grid);
  for (int i = 0; i < grid; ++i) d[i] = dist(2 * kPi * i / grid);
  auto refine = [&](double t0, double t1) {
    bool s0 = dist(t0) < 0;
    for (int it = 0; it < 200 && t1 - t0 > 1e-16; ++it) {
      double tm = 0.5 * (t0 + t1);
      if ((dist(tm) < 0) == s0) {
        t0 = tm;
      } else {
        t1 = tm;
      }
    }
    return 0.5 * (t0 + t1);
  };
  auto root_fn = [&](double t) { return parts(t).root_term; };
  int start = -1;
  for (int i = 0; i < grid; ++i) {
    if (d[i] >= 0) {
      start = i;
      break;
    }
  }
  cplx root_sum{0, 0};
  if (start < 0) {
    root_sum = gauss_adaptive(root_fn, 0, 2 * kPi, q.tol, &change) / (2 * kPi);
  } else {
    double arc_begin = 0;
    bool inside = false;
    for (int j = 1; j <= grid; ++j) {
      int i0 = (start + j - 1) % grid, i1 = (start + j) % grid;
      double t0 = 2 * kPi * (start + j - 1) / grid, t1 = 2 * kPi * (start + j) / grid;
      bool in0 = d[i0] < 0, in1 = d[i1] < 0;
      if (!in0 && in1) {
        arc_begin = refine(t0, t1);
        inside = true;
      } else if (in0 && !in1 && inside) {
        double arc_end = refine(t0, t1);
        double ch = 0;
        root_sum += gauss_adaptive(root_fn, arc_begin, arc_end, q.tol, &ch) / (2 * kPi);
        change += ch / (2 * kPi);
        inside = false;
      }
    }
  }
  total += root_sum;
  KinvResult out;
  out.value = -ipow(1 + e.h) * total;
  out.change = change;
  out.nodes = n;
  return out;
}

cplx s_tilde(double a, int k, int l) {
  if (k >= 0 || l >= 0) return 0;
  if (k == -1 && l == -1) return 1.0 / a;
  double c = coupling_c(a);
  double s2c = std::sqrt(2 * c);
  auto G = [&](cplx w) { return g_function(w, c) / s2c; };
  const double R = 2.0;
  const int n = 256;
  cplx sum{0, 0};
  for (int i = 0; i < n; ++i) {
    cplx w1 = std::polar(R, 2 * kPi * i / n);
    cplx f1 = cpow_int(G(w1), l) / branch_sqrt(w1, c) * w1;
    for (int j = 0; j < n; ++j) {
      cplx w2 = std::polar(R, 2 * kPi * j / n);
      sum += f1 * cpow_int(G(w2), k) / branch_sqrt(w2, c) * w2 / (1.0 - w1 * w2);
    }
  }
  // d omega = i omega d theta on each circle.
  sum *= (kI * 2.0 * kPi / double(n)) * (kI * 2.0 * kPi / double(n));
  return ipow(-k - l) / ((2 * kPi * kI) * (2 * kPi * kI) * 2.0 * (1 + a * a)) * sum;
}

cplx d_tilde_single(cplx omega_c, double a, int k, int l) {
  double c = coupling_c(a);
  double s2c = std::sqrt(2 * c);
  auto G = [&](cplx w) { return g_function(w, c) / s2c; };
  auto integrand = [&](cplx w) {
    return cpow_int(G(1.0 / w), l) * cpow_int(G(w), k) / (w * branch_sqrt(w, c) * branch_sqrt(1.0 / w, c));
  };
  double x0 = omega_c.real(), y0 = omega_c.imag();
  // Vertical segments x0 + i t (t from -y0 to y0) and -x0 + i t (t from y0 to -y0).
  auto right = [&](double t) { return integrand(cplx(x0, t)) * kI; };
  auto left = [&](double t) { return integrand(cplx(-x0, t)) * kI; };
  cplx sum = gauss_adaptive(right, -y0, y0, 1e-14, nullptr) - gauss_adaptive(left, -y0, y0, 1e-14, nullptr);
  return ipow(-k - l) / (4 * kPi * kI * (1 + a * a)) * sum + s_tilde(a, k, l);
}

cplx kinv_omega_form(MagneticCoords r, double a, RotatedVertex x, RotatedVertex y) {
  if (r.R1() >= 1 || r.R2() >= 1) throw std::invalid_argument("kinv_omega_form: need R1, R2 < 1");
  EntryIndex e = entry_index(x, y);
  OmegaC oc = find_omega_c(r, a);
  int k1 = (x.x2 - y.x2 - 1) / 2 + e.h, k2 = (x.x2 - y.x2 + 1) / 2 - e.h;
  int l1 = (y.x1 - x.x1 - 1) / 2, l2 = (y.x1 - x.x1 + 1) / 2;
  return -ipow(1 + e.h) *
         (std::pow(a, e.eps2) * d_tilde_single(oc.omega, a, k1, l1) +
          std::pow(a, 1 - e.eps2) * d_tilde_single(oc.omega, a, k2, l2));
}

EdgeProbabilities edge_probabilities(MagneticCoords r, double a, const QuadratureSpec& q) {
  auto K = [&](int x1, int x2, int y1, int y2) { return kinv_entry(r, a, {x1, x2}, {y1, y2}, q).value; };
  EdgeProbabilities p;
  p.c1 = (kI * a * K(1, 0, 0, 1)).real();
  p.c2 = (a * K(1, 0, 2, 1)).real();
  p.c3 = (kI * K(3, 0, 2, 1)).real();
  p.c4 = K(3, 0, 4, 1).real();
  return p;
}

cplx vertex_sum(MagneticCoords r, double a, const QuadratureSpec& q) {
  auto K = [&](int y1, int y2) { return kinv_entry(r, a, {1, 0}, {y1, y2}, q).value; };
  return kI * a * K(0, 1) + a * K(2, 1) + kI * K(2, -1) + K(0, -1);
}

Slope slope_from_kinv(MagneticCoords r, double a, const QuadratureSpec& q) {
  auto K = [&](int x1, int x2, int y1, int y2) { return kinv_entry(r, a, {x1, x2}, {y1, y2}, q).value; };
  Slope s;
  s.rho1 = (a * (K(1, 2, 0, 1) - K(1, 0, 2, 1))).real();
  s.rho2 = (kI * a * (K(1, 2, 2, 1) - K(1, 0, 0, 1))).real();
  return s;
}

Slope slope_arg_formula(cplx omega, double c, int d1, int d2) {
  double s1 = d1 ? -1 : 1, s2 = d2 ? -1 : 1;
  double g = arg_shifted(g_function(omega, c));
  double gi = arg_shifted(g_function(1.0 / omega, c));
  auto ind = [&](int i, int j) { return (d1 == i && d2 == j) ? 1.0 : 0.0; };
  Slope s;
  s.rho1 = s1 / kPi * (g - kPi) + s2 / kPi * (gi - kPi) + ind(0, 1) - ind(1, 0);
  s.rho2 = -s1 / kPi * (g - kPi) + s2 / kPi * (gi - kPi) + ind(1, 1) - ind(0, 0);
  return s;
}

double speed_arg_formula(cplx omega, double c, int d1, int d2) {
  double s1 = d1 ? -1 : 1, s12 = (d1 + d2) % 2 ? -1 : 1;
  double g = arg_shifted(g_function(omega, c));
  double ind00 = (d1 == 0 && d2 == 0) ? 1 : 0, ind10 = (d1 == 1 && d2 == 0) ? 1 : 0;
  return s1 / kPi * (g - kPi) - s12 / kPi * std::arg(omega) + ind00 - ind10;
}

Slope slope_from_omega(MagneticCoords r, double a) {
  return slope_arg_formula(find_omega_c(r, a).omega, coupling_c(a), r.delta1(), r.delta2());
}

double speed_from_r(MagneticCoords r, double a) {
  return speed_arg_formula(find_omega_c(r, a).omega, coupling_c(a), r.delta1(), r.delta2());
}

MagneticCoords r_from_slope(Slope target, double a, double tol) {
  if (!(target.rho1 - target.rho2 > 0 && target.rho1 - target.rho2 < 1 && target.rho1 + target.rho2 < 0 &&
        target.rho1 + target.rho2 > -1)) {
    throw std::invalid_argument("r_from_slope: slope outside the delta = (0,0) wedge");
  }
  auto err = [&](double x, double y, Slope* out) {
    MagneticCoords r{std::exp(x), std::exp(y)};
    if (!(r.R1() < 1 && r.R2() < 1) || !in_amoeba(r, a)) return false;
    *out = slope_from_omega(r, a);
    return true;
  };
  // Coarse start in (log r1, log r2) with r1 < r2 and r1 r2 > 1.
  double bx = 0, by = 0, best = 1e300;
  for (int i = 0; i < 60; ++i) {
    double x = -3.0 + 6.0 * (i + 0.5) / 60;
    for (int j = 0; j < 60; ++j) {
      double y = std::abs(x) + 8.0 * (j + 0.5) / 60;
      Slope s;
      if (!err(x, y, &s)) continue;
      double d = std::hypot(s.rho1 - target.rho1, s.rho2 - target.rho2);
      if (d < best) {
        best = d;
        bx = x;
        by = y;
      }
    }
  }
  if (best == 1e300) throw std::runtime_error("r_from_slope: no start point");
  const double h = 1e-7;
  for (int it = 0; it < 100; ++it) {
    Slope s0, sx, sy;
    err(bx, by, &s0);
    double f0 = s0.rho1 - target.rho1, f1 = s0.rho2 - target.rho2;
    if (std::hypot(f0, f1) < tol) return {std::exp(bx), std::exp(by)};
    if (!err(bx + h, by, &sx) || !err(bx, by + h, &sy)) {
      if (!err(bx - h, by, &sx) || !err(bx, by - h, &sy)) break;
      sx = {2 * s0.rho1 - sx.rho1, 2 * s0.rho2 - sx.rho2};
      sy = {2 * s0.rho1 - sy.rho1, 2 * s0.rho2 - sy.rho2};
    }
    double j00 = (sx.rho1 - s0.rho1) / h, j01 = (sy.rho1 - s0.rho1) / h;
    double j10 = (sx.rho2 - s0.rho2) / h, j11 = (sy.rho2 - s0.rho2) / h;
    double det = j00 * j11 - j01 * j10;
    double dx = (j11 * f0 - j01 * f1) / det, dy = (-j10 * f0 + j00 * f1) / det;
    double lam = 1;
    for (; lam > 1e-6; lam *= 0.5) {
      Slope s1;
      if (err(bx - lam * dx, by - lam * dy, &s1) &&
          std::hypot(s1.rho1 - target.rho1, s1.rho2 - target.rho2) < std::hypot(f0, f1)) {
        break;
      }
    }
    bx -= lam * dx;
    by -= lam * dy;
  }
  Slope s;
  if (err(bx, by, &s) && std::hypot(s.rho1 - target.rho1, s.rho2 - target.rho2) < 1e3 * tol) {
    return {std::exp(bx), std::exp(by)};
  }
  throw std::runtime_error("r_from_slope: Newton failed");
}

double speed_from_arg(Slope s, double arg_omega, int delta1, int delta2) {
  double s12 = (delta1 + delta2) % 2 ? -1 : 1;
  return 0.5 * (s.rho1 - s.rho2) + 0.5 * s12 - s12 / kPi * arg_omega;
}

std::pair<double, double> arg_identity_sides(Slope s, double arg_omega, double c, int delta1, int delta2) {
  double s12 = (delta1 + delta2) % 2 ? -1 : 1;
  double lhs = c * s12 * std::sin(kPi * (s.rho1 + s.rho2)) * std::sin(kPi * (s.rho1 - s.rho2));
  double c2 = std::cos(2 * arg_omega);
  double prod = (std::cos(kPi * (s.rho1 - s.rho2)) + c2) * (std::cos(kPi * (s.rho1 + s.rho2)) + c2);
  return {lhs, std::sqrt(std::max(0.0, prod))};
}

std::vector<MagneticCoords> default_r_grid(double a, int min_points) {
  std::vector<MagneticCoords> out;
  for (int steps = 8; static_cast<int>(out.size()) < min_points && steps <= 64; steps *= 2) {
    out.clear();
    for (int i = 0; i <= steps; ++i) {
      double r1 = 0.55 * std::pow(0.95 / 0.55, double(i) / steps);
      for (int j = 1; j <= 4 * steps; ++j) {
        double r2 = std::max(r1, 1.0 / r1) * std::pow(100.0, double(j) / (4 * steps));
        MagneticCoords r{r1, r2};
        if (r.R1() < 0.999 && r.R2() < 0.999 && in_amoeba(r, a)) out.push_back(r);
      }
    }
  }
  return out;
}

}  // namespace dimershuffle

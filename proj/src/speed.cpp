#include "dimershuffle/speed.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dimershuffle {

namespace {

constexpr double kPi = std::numbers::pi;

double sq(double x) { return x * x; }

}  // namespace

SlopePM to_pm(Slope s) { return {kPi * (s.rho1 + s.rho2), kPi * (s.rho1 - s.rho2)}; }

Slope from_pm(SlopePM pm) { return {(pm.plus + pm.minus) / (2 * kPi), (pm.plus - pm.minus) / (2 * kPi)}; }

bool in_open_square(Slope s) { return std::abs(s.rho1) + std::abs(s.rho2) < 1.0; }

double coupling_c(double a) { return a / (1 + a * a); }

double sigma_value(SlopePM pm, double c) {
  const double cm = std::cos(pm.minus), cp = std::cos(pm.plus);
  const double d = sq(cm - cp) + 4 * c * c * sq(std::sin(pm.minus)) * sq(std::sin(pm.plus));
  const double s = -(cm + cp + std::sqrt(d)) / 2;
  if (s < -1 - 1e-9 || s > 1 + 1e-9) throw std::logic_error("sigma_value: out of range");
  return std::clamp(s, -1.0, 1.0);
}

double one_plus_sigma(SlopePM pm, double c) {
  const double A = 2 * sq(std::sin(pm.minus / 2));
  const double B = 2 * sq(std::sin(pm.plus / 2));
  const double sm = std::sin(pm.minus), sp = std::sin(pm.plus);
  const double d = sq(B - A) + 4 * c * c * sq(sm) * sq(sp);
  const double den = A + B + std::sqrt(d);
  if (den == 0) return 0;
  return std::clamp(2 * (A * B - c * c * sq(sm) * sq(sp)) / den, 0.0, 2.0);
}

double speed_closed_form(Slope s, double a) {
  if (std::abs(s.rho1) + std::abs(s.rho2) > 1) throw std::invalid_argument("speed_closed_form: slope outside the square");
  const SlopePM pm = to_pm(s);
  if (pm.minus == 0) return 0;
  if (pm.plus == 0) return s.rho1;
  const double c = coupling_c(a);
  // pi - arccos(Sigma), evaluated without cancellation.
  const double angle = 2 * std::asin(std::sqrt(one_plus_sigma(pm, c) / 2));
  const double sign = pm.minus * pm.plus > 0 ? 1.0 : -1.0;
  return pm.minus / (2 * kPi) - angle / (2 * kPi) * sign;
}

double arg_shifted(cplx z) {
  double t = std::arg(z);
  if (t <= -kPi / 2) t += 2 * kPi;
  return t;
}

cplx branch_sqrt(cplx z, double c) {
  const double s = std::sqrt(2 * c);
  const cplx p = z + cplx(0, s), m = z - cplx(0, s);
  if (z.real() == 0 && std::abs(z.imag()) <= s) throw std::invalid_argument("branch_sqrt: point on the cut");
  const cplx lp(std::log(std::abs(p)), arg_shifted(p));
  const cplx lm(std::log(std::abs(m)), arg_shifted(m));
  return std::exp(0.5 * (lp + lm));
}

cplx g_function(cplx z, double c) {
  const cplx r = branch_sqrt(z, c);
  const cplx minus = z - r, plus = z + r;
  // (z - r)(z + r) = -2c; use the quotient when the difference cancels.
  return std::abs(minus) >= std::abs(plus) ? minus : -2 * c / plus;
}

HarmonicPoint harmonic_map(cplx z, double c) {
  if (!(z.real() > 0 && z.imag() > 0)) throw std::invalid_argument("harmonic_map: z outside the open quadrant");
  return {z, arg_shifted(g_function(z, c)), arg_shifted(g_function(1.0 / z, c))};
}

void harmonic_jacobian(cplx z, double c, double J[2][2]) {
  const cplx v = -z / branch_sqrt(z, c);
  const cplx w = 1.0 / z;
  const cplx vi = -w / branch_sqrt(w, c);
  J[0][0] = v.imag();
  J[0][1] = v.real();
  J[1][0] = -vi.imag();
  J[1][1] = -vi.real();
}

cplx invert_harmonic_map(double X, double Y, double c, double tol, int max_iter) {
  if (!(X > kPi / 2 && X < kPi && Y > kPi && Y < 1.5 * kPi))
    throw std::invalid_argument("invert_harmonic_map: target outside (pi/2,pi) x (pi,3pi/2)");
  double ell = 0, th = kPi / 4;
  auto residual = [&](double l, double t, double F[2]) {
    HarmonicPoint hp = harmonic_map(std::polar(std::exp(l), t), c);
    F[0] = hp.X - X;
    F[1] = hp.Y - Y;
    return std::hypot(F[0], F[1]);
  };
  double F[2];
  double res = residual(ell, th, F);
  for (int it = 0; it < max_iter; ++it) {
    if (res < tol) return std::polar(std::exp(ell), th);
    double J[2][2];
    harmonic_jacobian(std::polar(std::exp(ell), th), c, J);
    const double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
    if (det == 0) break;
    const double dl = -(J[1][1] * F[0] - J[0][1] * F[1]) / det;
    const double dt = -(-J[1][0] * F[0] + J[0][0] * F[1]) / det;
    double lam = 1.0;
    bool moved = false;
    for (int k = 0; k < 60; ++k, lam /= 2) {
      const double nl = ell + lam * dl, nt = th + lam * dt;
      if (!(nt > 0 && nt < kPi / 2)) continue;
      double G[2];
      const double nr = residual(nl, nt, G);
      if (nr < res) {
        ell = nl;
        th = nt;
        res = nr;
        F[0] = G[0];
        F[1] = G[1];
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  if (res < tol * 10) return std::polar(std::exp(ell), th);
  throw std::runtime_error("invert_harmonic_map: no convergence");
}

ReflectionResult reflect(Slope s, Reflection which) {
  switch (which) {
    case Reflection::kSwap:
      return {{s.rho2, s.rho1}, 0.0, -1.0};
    case Reflection::kAntiSwap:
      return {{-s.rho2, -s.rho1}, s.rho1 - s.rho2, -1.0};
    case Reflection::kFlipSecond:
      return {{s.rho1, -s.rho2}, -s.rho2, 1.0};
    case Reflection::kFlipFirst:
      return {{-s.rho1, s.rho2}, s.rho1, 1.0};
  }
  throw std::invalid_argument("reflect: unknown reflection");
}

double speed_harmonic(Slope s, double a) {
  if (!in_open_square(s)) throw std::invalid_argument("speed_harmonic: slope outside the open square");
  SlopePM pm = to_pm(s);
  if (pm.plus == 0 || pm.minus == 0) throw std::invalid_argument("speed_harmonic: slope on an axis");
  if (pm.minus < 0) {
    ReflectionResult r = reflect(s, Reflection::kSwap);
    return r.offset + r.scale * speed_harmonic(r.image, a);
  }
  if (pm.plus < 0) {
    ReflectionResult r = reflect(s, Reflection::kAntiSwap);
    return r.offset + r.scale * speed_harmonic(r.image, a);
  }
  const double c = coupling_c(a);
  const double X = pm.minus / 2 + kPi / 2;
  const double Y = -pm.plus / 2 + 1.5 * kPi;
  const cplx z = invert_harmonic_map(X, Y, c);
  return X / kPi - 1 + std::arg(z) / kPi;
}

namespace {

double radicand(double r, double c) { return 1 + 2 * (-1 + 8 * c * c) * r * r + r * r * r * r; }

}  // namespace

double f1(double r, double c) { return 0.25 * (1 + r * r - std::sqrt(radicand(r, c))); }

double f2(double r, double c) {
  const double S = radicand(r, c);
  const double r2 = r * r, r4 = r2 * r2;
  return (-1 - r4 + (1 + r2) * (1 + (-2 + 32 * c * c) * r2 + r4) / std::sqrt(S)) / 48;
}

double f1_prime(double r, double c) {
  const double S = radicand(r, c);
  const double dS = 4 * (-1 + 8 * c * c) * r + 4 * r * r * r;
  return 0.25 * (2 * r - dS / (2 * std::sqrt(S)));
}

double f1_second(double r, double c) {
  const double S = radicand(r, c);
  const double dS = 4 * (-1 + 8 * c * c) * r + 4 * r * r * r;
  const double d2S = 4 * (-1 + 8 * c * c) + 12 * r * r;
  return 0.25 * (2 - d2S / (2 * std::sqrt(S)) + dS * dS / (4 * S * std::sqrt(S)));
}

double speed_asymptotic(Slope s, double a) {
  const SlopePM pm = to_pm(s);
  if (!(pm.minus > 0 && pm.minus < pm.plus)) throw std::invalid_argument("speed_asymptotic: need 0 < rho_minus < rho_plus");
  if (!(a < 1)) throw std::invalid_argument("speed_asymptotic: requires a < 1");
  const double c = coupling_c(a);
  const double r = pm.minus / pm.plus, p = pm.plus;
  const double F1 = f1(r, c), F2 = f2(r, c);
  const double rt2 = std::sqrt(2.0);
  return r * p / (2 * kPi) - std::sqrt(F1) / (2 * kPi) * (rt2 * p + (F1 / (6 * rt2) + F2 / (rt2 * F1)) * p * p * p);
}

double asymptotic_dv_drho_plus(double r, double c) {
  const double F1 = f1(r, c);
  return -std::sqrt(2.0) * (2 * F1 - r * f1_prime(r, c)) / (4 * kPi * std::sqrt(F1));
}

double asymptotic_trace_scaled(double r, double c) {
  const double F1 = f1(r, c), d1 = f1_prime(r, c), d2 = f1_second(r, c);
  return (1 + r * r) / (2 * kPi) * (d1 * d1 - 2 * F1 * d2) / (2 * std::sqrt(2.0) * std::pow(F1, 1.5));
}

double asymptotic_det(double r, double c) {
  const double F1 = f1(r, c), d1 = f1_prime(r, c), d2 = f1_second(r, c);
  return (F1 * F1 + 6 * f2(r, c)) * (2 * F1 * d2 - d1 * d1) / (16 * kPi * kPi * F1 * F1);
}

namespace {

void raw_hessian(Slope s, double a, double h, double H[2][2], double& h21) {
  auto v = [&](double dx, double dy) { return speed_closed_form({s.rho1 + dx, s.rho2 + dy}, a); };
  const double f0 = v(0, 0);
  const double fxp = v(h, 0), fxm = v(-h, 0), fyp = v(0, h), fym = v(0, -h);
  H[0][0] = (fxp - 2 * f0 + fxm) / (h * h);
  H[1][1] = (fyp - 2 * f0 + fym) / (h * h);
  H[0][1] = (v(h, h) - v(h, -h) - v(-h, h) + v(-h, -h)) / (4 * h * h);
  H[1][0] = H[0][1];
  h21 = (fxp + fxm + fyp + fym - 2 * f0 - v(h, -h) - v(-h, h)) / (2 * h * h);
}

}  // namespace

HessianResult hessian_fd(Slope s, double a, double step) {
  if (std::abs(s.rho1) + std::abs(s.rho2) + 2 * step >= 1)
    throw std::invalid_argument("hessian_fd: stencil leaves the open square");
  double A[2][2], B[2][2], a21, b21;
  raw_hessian(s, a, step, A, a21);
  raw_hessian(s, a, step / 2, B, b21);
  HessianResult out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.h[i][j] = (4 * B[i][j] - A[i][j]) / 3;
  const double h21 = (4 * b21 - a21) / 3;
  out.symmetry_defect = std::abs(out.h[0][1] - h21);
  out.det = out.h[0][0] * out.h[1][1] - out.h[0][1] * out.h[1][0];
  out.trace = out.h[0][0] + out.h[1][1];
  out.step = step;
  return out;
}

double det_hessian_a1(Slope s) {
  const SlopePM pm = to_pm(s);
  const double cp = std::cos(pm.plus), cm = std::cos(pm.minus);
  const double den = 3 + cp + cm - cp * cm;
  return -4 * kPi * kPi * sq(std::cos(pm.plus / 2)) * sq(std::cos(pm.minus / 2)) / (den * den);
}

}  // namespace dimershuffle

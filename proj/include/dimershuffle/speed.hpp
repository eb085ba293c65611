#pragma once

#include <complex>

namespace dimershuffle {

using cplx = std::complex<double>;

struct Slope {
  double rho1 = 0;
  double rho2 = 0;
};

// rho_plus = pi (rho1 + rho2), rho_minus = pi (rho1 - rho2).
struct SlopePM {
  double plus = 0;
  double minus = 0;
};

SlopePM to_pm(Slope s);
Slope from_pm(SlopePM pm);
bool in_open_square(Slope s);

// c = a / (1 + a^2).
double coupling_c(double a);

// Sigma of the closed form, clamped into [-1, 1].
double sigma_value(SlopePM pm, double c);
// 1 + Sigma without cancellation near Sigma = -1.
double one_plus_sigma(SlopePM pm, double c);

// Defined on the closed square; axis values are the symmetry-forced limits.
double speed_closed_form(Slope s, double a);

// Argument in (-pi/2, 3pi/2].
double arg_shifted(cplx z);
// sqrt(z^2 + 2c) with the cut on i[-sqrt(2c), sqrt(2c)].
cplx branch_sqrt(cplx z, double c);
// G(z) = z - sqrt(z^2 + 2c).
cplx g_function(cplx z, double c);

struct HarmonicPoint {
  cplx z;
  double X = 0;
  double Y = 0;
};

HarmonicPoint harmonic_map(cplx z, double c);
// Newton in (log|z|, arg z) with step halving.
cplx invert_harmonic_map(double X, double Y, double c, double tol = 1e-13, int max_iter = 200);
// 2x2 Jacobian d(X,Y)/d(log|z|, arg z), row major.
void harmonic_jacobian(cplx z, double c, double J[2][2]);

double speed_harmonic(Slope s, double a);

enum class Reflection { kSwap, kAntiSwap, kFlipFirst, kFlipSecond };

// v(s) = offset + scale * v(image).
struct ReflectionResult {
  Slope image;
  double offset = 0;
  double scale = 1;
};

ReflectionResult reflect(Slope s, Reflection which);

double f1(double r, double c);
double f2(double r, double c);
double f1_prime(double r, double c);
double f1_second(double r, double c);

// Truncated expansion for 0 < rho_minus < rho_plus, a < 1.
double speed_asymptotic(Slope s, double a);
// Limit of d v / d rho_plus at fixed rho_minus / rho_plus = r.
double asymptotic_dv_drho_plus(double r, double c);
// Limits of trace(H) * rho_plus and det(H) as rho -> 0 along fixed r, for the
// Hessian taken in (rho_plus, rho_minus).
double asymptotic_trace_scaled(double r, double c);
double asymptotic_det(double r, double c);

struct HessianResult {
  double h[2][2] = {};
  double det = 0;
  double trace = 0;
  double symmetry_defect = 0;
  double step = 0;
};

// Central differences in (rho1, rho2) with one Richardson refinement.
HessianResult hessian_fd(Slope s, double a, double step = 1e-3);

double det_hessian_a1(Slope s);

}  // namespace dimershuffle

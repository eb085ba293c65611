#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "dimershuffle/speed.hpp"

namespace dimershuffle {

// Vertex in the 45-degree rotated frame, x1 + x2 odd. Black vertices have x1
// odd; the corners of the 'a' face (0,0) are BL (0,1), BR (1,0), TL (1,2),
// TR (2,1).
struct RotatedVertex {
  int x1 = 0;
  int x2 = 0;
  bool black() const { return (x1 & 1) != 0; }
  // Sub-lattice index: x1 + x2 = 2 eps + 1 mod 4.
  int epsilon() const { return (((x1 + x2) % 4 + 4) % 4) == 1 ? 0 : 1; }
};

// Torus vertex (X,Y) -> (X + Y, 1 - X + Y).
RotatedVertex to_rotated(int X, int Y);

struct MagneticCoords {
  double r1 = 1;
  double r2 = 1;
  double R1() const;
  double R2() const;
  int delta1() const { return R1() > 1 ? 1 : 0; }
  int delta2() const { return R2() > 1 ? 1 : 0; }
};

struct QuadratureSpec {
  int n_initial = 512;  // trapezoid nodes, power of two >= 256
  int max_n = 1 << 16;
  double tol = 1e-13;
};

cplx characteristic_polynomial(cplx z, cplx w, double a);

// Zero of P(r1 z, r2 w) on the unit torus with Im z > 0.
std::optional<std::pair<cplx, cplx>> torus_zero(MagneticCoords r, double a);
bool in_amoeba(MagneticCoords r, double a);

struct OmegaC {
  cplx omega;     // first-quadrant crossing on the R2 ellipse
  cplx omega_r1;  // first-quadrant crossing on the R1 ellipse, conj(1 / omega)
  double residual = 0;            // |1 - omega_1 omega_2| at the crossing
  std::array<cplx, 4> crossings;  // the four crossings on the R1 ellipse, one per quadrant
};

// Requires R1, R2 < 1 and r inside the amoeba.
OmegaC find_omega_c(MagneticCoords r, double a);

struct KinvResult {
  cplx value;
  double change = 0;  // difference between the last two refinements
  int nodes = 0;
};

// K^{-1}(x, y) for black x and white y from the double contour integral. The
// inner integral is evaluated by residues; the outer one by the trapezoid rule
// on the smooth part and Gauss-Legendre panels on the arcs where a pole lies
// inside the inner contour.
KinvResult kinv_entry(MagneticCoords r, double a, RotatedVertex x, RotatedVertex y, const QuadratureSpec& q = {});

// Same entry through the single-integral form between the crossings.
cplx kinv_omega_form(MagneticCoords r, double a, RotatedVertex x, RotatedVertex y);
cplx d_tilde_single(cplx omega_c, double a, int k, int l);
cplx s_tilde(double a, int k, int l);

struct EdgeProbabilities {
  double c1 = 0;  // bottom edge of an 'a' face
  double c2 = 0;  // right edge of an 'a' face
  double c3 = 0;  // bottom edge of a '1' face
  double c4 = 0;  // right edge of a '1' face
};

EdgeProbabilities edge_probabilities(MagneticCoords r, double a, const QuadratureSpec& q = {});
// Sum of the four edge probabilities at the black vertex (1,0).
cplx vertex_sum(MagneticCoords r, double a, const QuadratureSpec& q = {});

Slope slope_from_kinv(MagneticCoords r, double a, const QuadratureSpec& q = {});
// Arg formulas for the slope and the speed at a given crossing.
Slope slope_arg_formula(cplx omega, double c, int delta1, int delta2);
double speed_arg_formula(cplx omega, double c, int delta1, int delta2);
// Arg formulas at omega.
Slope slope_from_omega(MagneticCoords r, double a);
double speed_from_r(MagneticCoords r, double a);
// Inverse of slope_from_omega on the delta = (0,0) wedge.
MagneticCoords r_from_slope(Slope target, double a, double tol = 1e-13);
// v from the slope and arg omega_c.
double speed_from_arg(Slope s, double arg_omega, int delta1, int delta2);
// Left and right sides of the relation between the slope and arg omega_c.
std::pair<double, double> arg_identity_sides(Slope s, double arg_omega, double c, int delta1, int delta2);

// Points with R1, R2 < 1 inside the amoeba.
std::vector<MagneticCoords> default_r_grid(double a, int min_points = 25);

}  // namespace dimershuffle

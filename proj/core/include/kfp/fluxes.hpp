#pragma once
// Boundary-flux integrals over corner boxes and the two cross-checked
// constants they pin down: the mass-flux rate of the x^{-2/3} profile and
// the pairing constant C_*.

namespace kfp::fluxes {

struct FluxBox {
  double delta = 1.0;  // scale
  double b = 1.0;      // aspect: box is {0 <= x <= b delta^3, -delta <= v <= r delta}
  double r = 0.5;      // restitution coefficient
};

struct FluxConstants {
  double mass_flux;  // 9^{2/3}(log r + pi/sqrt(3))
  double c_star;     // closed form; NaN for r >= r_c where it is undefined
  double kappa;      // = -mass_flux
};

FluxConstants flux_constants(double r);

// Adaptive quadrature of \int_{-M}^{M} zeta Lambda_{-2/3}(zeta) dzeta.
// Converges to pi/sqrt(3) as M grows.
double zeta_lambda_moment(double M);

// Flux of G_gamma through the three x>0 edges of the box, with the normal
// pointing into the box: left edge x = b delta^3 with n = (-1,0), top edge
// v = r delta with n_v = -1, bottom edge v = -delta with n_v = +1.
double boundary_flux(double gamma, const FluxBox& box);

struct FluxSplit {
  double flux;   // signed total
  double scale;  // sum of |integrand| integrals over the three edges
};
FluxSplit boundary_flux_detail(double gamma, const FluxBox& box);

struct BoxCheck {
  double values[3][3];   // (delta, b) in {0.5,1,2} x {0.25,1,4}
  double scales[3][3];   // per-box integrand scale (for normalized comparisons)
  double mean;
  double max_abs_dev;    // max |value - mean|
  double max_rel_spread; // max_abs_dev / |mean|
  double scale;          // max integrand scale across boxes
};
BoxCheck box_independence_check(double gamma, double r);

// C_* via the cross-Wronskian quadrature route with Cesaro tail averaging
// over [R_max/2, R_max].  Throws ConvergenceError when the 1/w tails fail
// to cancel (exponent-solver drift).
double c_star_quadrature(double r, double R_max = 200.0);

}  // namespace kfp::fluxes

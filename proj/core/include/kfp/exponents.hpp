#pragma once
// Restitution-coefficient exponent algebra: the transcendental root alpha(r),
// its conjugate beta(r) = -alpha - 2/3, the trigonometric constant
// K_gamma = 2 cos(pi (gamma + 1/3)), the mass-flux rate kappa(r), and the
// closed form of the pairing constant C_* on the collapsing side.

namespace kfp::exponents {

struct ExponentTable {
  double r;
  double alpha;
  double beta;
  double k_alpha;
  double k_beta;
  double r_c;
};

// threshold restitution coefficient e^{-pi/sqrt(3)} ~ 0.16303
double critical_r();

// Unique root of (2+3a) log r + log(2 cos(pi (a+1/3))) = 0 in
// (-5/6, 1/6) \ {-2/3}.  Throws DomainError for r <= 0 and for r within
// 1e-9 of critical_r() (degenerate double root at -2/3).
double alpha_of_r(double r);

// beta = -alpha - 2/3
double beta_of_r(double r);

// K_gamma = 2 cos(pi (gamma + 1/3)), gamma in (-5/6, 1/6)
double k_gamma(double gamma);

// kappa(r) = -9^{2/3} (log r + pi/sqrt(3)); positive iff r < critical_r()
double kappa(double r);

// Closed form of C_*(r) for 0 < r < critical_r(); strictly negative there.
double c_star_closed(double r);

ExponentTable make_exponent_table(double r);

// residual of r^{2+3g} * 2cos(pi(g+1/3)) - 1  (the steady-trace identity)
double steady_trace_residual(double r, double gamma);

}  // namespace kfp::exponents

#pragma once
// Self-similar profile family: the slice profile Lambda_gamma, the
// two-variable profiles G_gamma(x,v) = x^gamma Lambda_gamma(v/(9x)^{1/3}),
// their wall traces, and the adjoint-side profile F_beta.

namespace kfp::profiles {

struct PhasePoint {
  double x;
  double v;
};

// Lambda_gamma(zeta) = U(-gamma, 2/3, -zeta^3) via the two-M real
// combination for |zeta| <= 50, algebraic tail expansion beyond.
// gamma in (-5/6, 1/6).
double lambda_profile(double gamma, double zeta);

// d/dzeta of the above (analytic, not finite-differenced).
double lambda_profile_prime(double gamma, double zeta);

// Closed form of the gamma = -2/3 member:
//   Lambda(zeta) = 3 \int_{-inf}^{zeta} exp(s^3 - zeta^3) ds,
// evaluated by adaptive quadrature after the substitution s = zeta - u.
double lambda_m23_closed(double zeta);

// G_gamma at an interior point (x > 0).
double g_gamma(double gamma, PhasePoint p);

// Wall trace of G_gamma from the closed asymptotic constants:
//   v < 0 : |v|^{3 gamma} / 9^gamma
//   v > 0 : K_gamma |v|^{3 gamma} / 9^gamma,  K_gamma = 2 cos(pi(gamma+1/3))
double boundary_trace(double gamma, double v);

// Adjoint-side profile with an explicit exponent:
//   F(x,v) = x^beta U(-beta, 2/3, v^3/(9x)),  x > 0, beta in (-5/6, 1/6).
// beta = 0 gives the constant solution F == 1 exactly.
double adjoint_profile(double beta, PhasePoint p);

// F_beta(x,v) with beta = beta(r); defined for 0 < r < r_c, x > 0.
double f_beta(double r, PhasePoint p);

}  // namespace kfp::profiles

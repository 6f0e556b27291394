#include "kfp/profiles.hpp"

#include <cmath>
#include <algorithm>

#include "kfp/errors.hpp"
#include "kfp/exponents.hpp"
#include "kfp/quadrature.hpp"
#include "kfp/specfun.hpp"

namespace kfp::profiles {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kZetaSwitch = 50.0;

void check_gamma(double gamma) {
  if (!(gamma > -5.0 / 6.0 && gamma < 1.0 / 6.0))
    throw DomainError("lambda_profile: gamma outside (-5/6, 1/6)");
}

struct LambCoef {
  double pref;  // pi / sin(2 pi / 3)
  double c1;    // 1 / (Gamma(1/3 - gamma) Gamma(2/3))
  double c2;    // 1 / (Gamma(-gamma) Gamma(4/3)); zero at gamma = 0
};

LambCoef lamb_coef(double gamma) {
  using specfun::recip_gamma;
  LambCoef c;
  c.pref = kPi / std::sin(2.0 * kPi / 3.0);
  c.c1 = recip_gamma(1.0 / 3.0 - gamma) * recip_gamma(2.0 / 3.0);
  c.c2 = recip_gamma(-gamma) * recip_gamma(4.0 / 3.0);
  return c;
}

// Tail series  Lambda ~ C |zeta|^{3g} sum_s (-g)_s (1/3-g)_s / s! (sgn/|zeta|^3)^s
// with C = K_gamma, sgn = +1 on the right and C = 1, sgn = -1 on the left.
// Termwise derivative for the prime variant.
double lambda_tail(double gamma, double zeta, bool derivative) {
  const double az = std::abs(zeta);
  const double C = zeta > 0 ? 2.0 * std::cos(kPi * (gamma + 1.0 / 3.0)) : 1.0;
  const double sign_z = zeta > 0 ? 1.0 : -1.0;
  // the |zeta|^{-3s} scaling lives entirely in the exponent p below
  double coef = 1.0, sum = 0.0, prev = 1e300;
  for (int s = 0; s < 40; ++s) {
    const double p = 3.0 * gamma - 3.0 * s;
    const double term =
        derivative ? coef * p * std::pow(az, p - 1.0) * sign_z : coef * std::pow(az, p);
    if (std::abs(term) >= prev) break;  // past the optimal truncation point
    sum += term;
    prev = std::max(std::abs(term), 1e-300);
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    coef *= (-gamma + s) * (1.0 / 3.0 - gamma + s) / (s + 1) * sign_z;
  }
  return C * sum;
}

}  // namespace

double lambda_profile(double gamma, double zeta) {
  check_gamma(gamma);
  if (zeta < 0.0) {
    // z = -zeta^3 > 0: the two-M combination cancels catastrophically once
    // z is large, so go through the U ladder instead (connection formula for
    // small z, Laplace integral mid-range, algebraic expansion beyond).
    return specfun::tricomi_u(-gamma, 2.0 / 3.0, -zeta * zeta * zeta).value;
  }
  if (zeta > kZetaSwitch) return lambda_tail(gamma, zeta, false);
  const auto c = lamb_coef(gamma);
  const double z = -zeta * zeta * zeta;
  auto m1 = specfun::kummer_m(-gamma, 2.0 / 3.0, z);
  auto m2 = specfun::kummer_m(1.0 / 3.0 - gamma, 4.0 / 3.0, z);
  return c.pref * (c.c1 * m1.value + c.c2 * zeta * m2.value);
}

double lambda_profile_prime(double gamma, double zeta) {
  check_gamma(gamma);
  if (zeta < 0.0) {
    // d/dzeta U(-g, 2/3, -zeta^3) = -3 zeta^2 g U(1-g, 5/3, -zeta^3)
    const double z = -zeta * zeta * zeta;
    return -3.0 * zeta * zeta * gamma * specfun::tricomi_u(1.0 - gamma, 5.0 / 3.0, z).value;
  }
  if (zeta > kZetaSwitch) return lambda_tail(gamma, zeta, true);
  const auto c = lamb_coef(gamma);
  const double z = -zeta * zeta * zeta;
  const double dz = -3.0 * zeta * zeta;
  // M'(a,b,z) = (a/b) M(a+1, b+1, z)
  const double a1 = -gamma, b1 = 2.0 / 3.0;
  const double a2 = 1.0 / 3.0 - gamma, b2 = 4.0 / 3.0;
  auto m1p = specfun::kummer_m(a1 + 1.0, b1 + 1.0, z);
  auto m2 = specfun::kummer_m(a2, b2, z);
  auto m2p = specfun::kummer_m(a2 + 1.0, b2 + 1.0, z);
  return c.pref * (c.c1 * (a1 / b1) * m1p.value * dz + c.c2 * m2.value +
                   c.c2 * zeta * (a2 / b2) * m2p.value * dz);
}

double lambda_m23_closed(double zeta) {
  // 3 \int_0^inf exp(-u q(u)) du,  q(u) = u^2 - 3 zeta u + 3 zeta^2 > 0.
  // The exponent u q(u) is nondecreasing (d/du = 3(u - zeta)^2 >= 0), so the
  // integrand is monotone: find the cutoff by doubling, then adapt.  For
  // large |zeta| the mass sits in a layer of width ~ 1/q(0) = 1/(3 zeta^2)
  // next to u = 0 that a plain adaptive pass can sample right past, so the
  // integration range is pre-split geometrically from the layer scale up.
  auto f = [&](double u) {
    double q = (u - 3.0 * zeta) * u + 3.0 * zeta * zeta;
    return std::exp(-u * q);
  };
  double U = 1.0;
  while (f(U) > 1e-19 && U < 1e8) U *= 2.0;
  const double layer = 1.0 / std::max(1.0, 3.0 * zeta * zeta);
  double total = 0.0, err = 0.0, lo = 0.0;
  bool ok = true;
  for (double hi = std::min(layer, U); lo < U; hi = std::min(4.0 * hi, U)) {
    auto r = quad::integrate(f, lo, hi, 1e-13, 1e-12, 6000);
    total += r.value;
    err += r.err_est;
    ok = ok && r.converged;
    lo = hi;
  }
  if (!ok || err > 1e-10)
    throw ConvergenceError("lambda_m23_closed: quadrature did not converge", 3.0 * total);
  return 3.0 * total;
}

double g_gamma(double gamma, PhasePoint p) {
  if (!(p.x > 0.0)) throw DomainError("g_gamma: need x > 0");
  const double zeta = p.v / std::cbrt(9.0 * p.x);
  return std::pow(p.x, gamma) * lambda_profile(gamma, zeta);
}

double boundary_trace(double gamma, double v) {
  check_gamma(gamma);
  if (v == 0.0) throw DomainError("boundary_trace: singular at v = 0");
  const double k = (v > 0.0) ? 2.0 * std::cos(kPi * (gamma + 1.0 / 3.0)) : 1.0;
  return k * std::pow(std::abs(v), 3.0 * gamma) * std::pow(9.0, -gamma);
}

double adjoint_profile(double beta, PhasePoint p) {
  if (!(p.x > 0.0)) throw DomainError("adjoint_profile: need x > 0");
  if (!(beta > -5.0 / 6.0 && beta < 1.0 / 6.0))
    throw DomainError("adjoint_profile: beta outside (-5/6, 1/6)");
  if (beta == 0.0) return 1.0;  // U(0,b,z) = 1: the constant solution
  const double y = p.v * p.v * p.v / (9.0 * p.x);
  auto u = specfun::tricomi_u(-beta, 2.0 / 3.0, y);
  return std::pow(p.x, beta) * u.value;
}

double f_beta(double r, PhasePoint p) {
  if (!(r > 0.0 && r < exponents::critical_r()))
    throw DomainError("f_beta: need 0 < r < r_c");
  return adjoint_profile(exponents::beta_of_r(r), p);
}

}  // namespace kfp::profiles

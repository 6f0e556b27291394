#include "kfp/fluxes.hpp"

#include <cmath>
#include <limits>
#include <algorithm>

#include "kfp/errors.hpp"
#include "kfp/exponents.hpp"
#include "kfp/profiles.hpp"
#include "kfp/quadrature.hpp"

namespace kfp::fluxes {
namespace {

constexpr double kPi = 3.14159265358979323846;
const double kSqrt3 = std::sqrt(3.0);
const double kNineTwoThirds = std::pow(9.0, 2.0 / 3.0);
const double kCbrt9 = std::cbrt(9.0);

// d/dv G_gamma(x, v) = x^gamma Lambda'(zeta) / (9x)^{1/3}
double dv_g(double gamma, double x, double v) {
  const double c = std::cbrt(9.0 * x);
  return std::pow(x, gamma) * profiles::lambda_profile_prime(gamma, v / c) / c;
}

double g_at(double gamma, double x, double v) {
  return std::pow(x, gamma) * profiles::lambda_profile(gamma, v / std::cbrt(9.0 * x));
}

}  // namespace

FluxConstants flux_constants(double r) {
  if (!(r > 0.0)) throw DomainError("flux_constants: need r > 0");
  FluxConstants fc;
  fc.mass_flux = kNineTwoThirds * (std::log(r) + kPi / kSqrt3);
  fc.kappa = -fc.mass_flux;
  fc.c_star = (r < exponents::critical_r()) ? exponents::c_star_closed(r)
                                            : std::numeric_limits<double>::quiet_NaN();
  return fc;
}

double zeta_lambda_moment(double M) {
  if (M == 0.0) return 0.0;
  if (!(M > 0.0 && M <= 1e3)) throw DomainError("zeta_lambda_moment: need 0 <= M <= 1e3");
  auto f = [](double zeta) { return zeta * profiles::lambda_profile(-2.0 / 3.0, zeta); };
  // split at the profile's internal representation switch to keep the
  // adaptive bisection off the (tiny) seam
  double cuts[] = {-M, -50.0, 0.0, 50.0, M};
  double total = 0.0;
  for (int i = 0; i + 1 < 5; ++i) {
    double a = std::clamp(cuts[i], -M, M), b = std::clamp(cuts[i + 1], -M, M);
    if (b <= a) continue;
    auto r = quad::integrate(f, a, b, 1e-10, 1e-10, 4000);
    total += r.value;
  }
  return total;
}

FluxSplit boundary_flux_detail(double gamma, const FluxBox& box) {
  const double delta = box.delta, b = box.b, r = box.r;
  if (!(delta > 0.0 && b > 0.0 && r > 0.0))
    throw DomainError("boundary_flux: box parameters must be positive");
  const double xL = b * delta * delta * delta;
  const double v_top = r * delta, v_bot = -delta;

  // left edge x = xL, n = (-1, 0):  integrand -v G n_x = +v G
  auto f_left = [&](double v) { return v * g_at(gamma, xL, v); };
  auto f_left_abs = [&](double v) { return std::abs(v * g_at(gamma, xL, v)); };
  // 2000+ nodes: 128 Gauss-16 panels; halved-resolution pass guards refinement
  double left = quad::gauss16_panels(f_left, v_bot, v_top, 128);
  double left_abs = quad::gauss16_panels(f_left_abs, v_bot, v_top, 128);
  {
    const double coarse = quad::gauss16_panels(f_left, v_bot, v_top, 64);
    if (std::abs(left - coarse) > 1e-9 * (1.0 + std::abs(left) + left_abs))
      throw ConvergenceError("boundary_flux: left-edge quadrature failed to refine", left);
  }

  // horizontal edges: dyadic refinement toward x = 0 (boundary layer where
  // zeta = v/(9x)^{1/3} swings to +-inf); 40 octaves x 4 panels x 16 nodes
  auto horiz = [&](double v_edge, double sign, double& absint) {
    auto f = [&](double x) { return sign * dv_g(gamma, x, v_edge); };
    auto fa = [&](double x) { return std::abs(dv_g(gamma, x, v_edge)); };
    double s = 0.0, sa = 0.0;
    double hi = xL;
    for (int k = 0; k < 40; ++k) {
      const double lo = xL * std::ldexp(1.0, -(k + 1));
      s += quad::gauss16_panels(f, lo, hi, 4);
      sa += quad::gauss16_panels(fa, lo, hi, 4);
      hi = lo;
    }
    s += quad::gauss16_panels(f, 0.0, hi, 2);
    sa += quad::gauss16_panels(fa, 0.0, hi, 2);
    absint = sa;
    return s;
  };

  double top_abs = 0.0, bot_abs = 0.0;
  const double top = horiz(v_top, -1.0, top_abs);  // n_v = -1
  const double bot = horiz(v_bot, +1.0, bot_abs);  // n_v = +1

  FluxSplit out;
  out.flux = left + top + bot;
  out.scale = left_abs + top_abs + bot_abs;
  return out;
}

double boundary_flux(double gamma, const FluxBox& box) {
  return boundary_flux_detail(gamma, box).flux;
}

BoxCheck box_independence_check(double gamma, double r) {
  const double deltas[3] = {0.5, 1.0, 2.0};
  const double bs[3] = {0.25, 1.0, 4.0};
  BoxCheck chk{};
  double sum = 0.0;
  chk.scale = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      auto fs = boundary_flux_detail(gamma, FluxBox{deltas[i], bs[j], r});
      chk.values[i][j] = fs.flux;
      chk.scales[i][j] = fs.scale;
      chk.scale = std::max(chk.scale, fs.scale);
      sum += fs.flux;
    }
  chk.mean = sum / 9.0;
  chk.max_abs_dev = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      chk.max_abs_dev = std::max(chk.max_abs_dev, std::abs(chk.values[i][j] - chk.mean));
  chk.max_rel_spread = chk.max_abs_dev / std::max(1e-300, std::abs(chk.mean));
  return chk;
}

double c_star_quadrature(double r, double R_max) {
  if (!(r > 0.0 && r < exponents::critical_r()))
    throw DomainError("c_star_quadrature: defined for 0 < r < r_c");
  if (!(R_max >= 50.0 && R_max <= 500.0))
    throw DomainError("c_star_quadrature: R_max in [50, 500]");
  const double alpha = exponents::alpha_of_r(r);
  const double beta = -alpha - 2.0 / 3.0;

  auto f = [&](double w) {
    const double lap = profiles::lambda_profile(alpha, w);
    const double lam = profiles::lambda_profile(alpha, -w);
    const double lbp = profiles::lambda_profile(beta, w);
    const double lbm = profiles::lambda_profile(beta, -w);
    return w * (lap * lbm - lam * lbp);
  };

  const double half = 0.5 * R_max;
  // I(R/2)
  double Ihalf = 0.0;
  {
    double cuts[] = {0.0, std::min(50.0, half), half};
    for (int i = 0; i + 1 < 3; ++i) {
      if (cuts[i + 1] <= cuts[i]) continue;
      Ihalf += quad::integrate(f, cuts[i], cuts[i + 1], 1e-10, 1e-10, 4000).value;
    }
  }
  // Cesaro average over [R/2, R]:
  //   Ibar = I(R/2) + (2/R) \int (R - w) f(w) dw;   drift = \int f
  auto fw = [&](double w) { return (R_max - w) * f(w); };
  double tail_w = 0.0, drift = 0.0;
  {
    double cuts[] = {half, std::clamp(50.0, half, R_max), R_max};
    for (int i = 0; i + 1 < 3; ++i) {
      if (cuts[i + 1] <= cuts[i]) continue;
      tail_w += quad::integrate(fw, cuts[i], cuts[i + 1], 1e-10, 1e-10, 4000).value;
      drift += quad::integrate(f, cuts[i], cuts[i + 1], 1e-10, 1e-10, 4000).value;
    }
  }
  const double Ibar = Ihalf + 2.0 / R_max * tail_w;
  if (std::abs(drift) > 1e-4 * (1.0 + std::abs(Ibar)))
    throw ConvergenceError("c_star_quadrature: 1/w tails failed to cancel", Ibar);

  const double val = -Ibar - 2.0 * std::cos(kPi * (beta + 1.0 / 3.0)) * std::log(r);
  return kNineTwoThirds * val;
}

}  // namespace kfp::fluxes

#include "kfp/exponents.hpp"

#include <cmath>
#include <algorithm>

#include "kfp/errors.hpp"

namespace kfp::exponents {
namespace {
constexpr double kPi = 3.14159265358979323846;
const double kSqrt3 = std::sqrt(3.0);
const double kNineTwoThirds = std::pow(9.0, 2.0 / 3.0);

// y_r(a) = (2+3a) log r + log(2 cos(pi (a+1/3))), a in (-5/6, 1/6).
// y -> -inf at both ends; a = -2/3 is always a root; the interesting root is
// on the far side of the maximizer from -2/3.
double y_of(double a, double logr) {
  return (2.0 + 3.0 * a) * logr + std::log(2.0 * std::cos(kPi * (a + 1.0 / 3.0)));
}

double dy_of(double a, double logr) {
  return 3.0 * logr - kPi * std::tan(kPi * (a + 1.0 / 3.0));
}
}  // namespace

double critical_r() { return std::exp(-kPi / kSqrt3); }

double alpha_of_r(double r) {
  if (!(r > 0.0)) throw DomainError("alpha_of_r: need r > 0");
  const double rc = critical_r();
  if (std::abs(r - rc) <= 1e-9)
    throw DomainError("alpha_of_r: degenerate double root at r = r_c (guard band 1e-9)");
  const double logr = std::log(r);
  // maximizer of y_r on (-5/6, 1/6)
  const double a_max = std::atan(3.0 * logr / kPi) / kPi - 1.0 / 3.0;
  // the nontrivial root lies on the opposite side of a_max from -2/3
  double lo, hi;
  const double edge = 1e-13;
  if (r < rc) {
    lo = -5.0 / 6.0 + edge;
    hi = a_max;
  } else {
    lo = a_max;
    hi = 1.0 / 6.0 - edge;
  }
  // endpoints: y(lo or hi near the interval ends) -> -inf, y(a_max) > 0
  double flo = y_of(lo, logr), fhi = y_of(hi, logr);
  if (r < rc) {
    if (!(flo < 0.0 && fhi > 0.0))
      throw ConvergenceError("alpha_of_r: bracketing failed");
  } else {
    if (!(flo > 0.0 && fhi < 0.0))
      throw ConvergenceError("alpha_of_r: bracketing failed");
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double fm = y_of(mid, logr);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
    if (hi - lo < 1e-14) break;
  }
  double a = 0.5 * (lo + hi);
  // Newton polish
  for (int it = 0; it < 4; ++it) {
    double f = y_of(a, logr), df = dy_of(a, logr);
    if (df == 0.0) break;
    double step = f / df;
    double an = a - step;
    if (an <= -5.0 / 6.0 || an >= 1.0 / 6.0) break;
    a = an;
    if (std::abs(step) < 1e-15) break;
  }
  return a;
}

double beta_of_r(double r) { return -alpha_of_r(r) - 2.0 / 3.0; }

double k_gamma(double gamma) {
  if (!(gamma > -5.0 / 6.0 && gamma < 1.0 / 6.0))
    throw DomainError("k_gamma: gamma outside (-5/6, 1/6)");
  return 2.0 * std::cos(kPi * (gamma + 1.0 / 3.0));
}

double kappa(double r) {
  if (!(r > 0.0)) throw DomainError("kappa: need r > 0");
  return -kNineTwoThirds * (std::log(r) + kPi / kSqrt3);
}

double c_star_closed(double r) {
  const double rc = critical_r();
  if (!(r > 0.0 && r < rc))
    throw DomainError("c_star_closed: defined for 0 < r < r_c only");
  const double a = alpha_of_r(r);
  const double b = -a - 2.0 / 3.0;
  const double val = kPi / 3.0 * (std::sin(kPi * a) + kSqrt3 * std::cos(kPi * a)) -
                     2.0 * std::cos(kPi * (b + 1.0 / 3.0)) * std::log(r);
  return kNineTwoThirds * val;
}

ExponentTable make_exponent_table(double r) {
  ExponentTable t;
  t.r = r;
  t.alpha = alpha_of_r(r);
  t.beta = -t.alpha - 2.0 / 3.0;
  t.k_alpha = k_gamma(t.alpha);
  t.k_beta = 2.0 * std::cos(kPi * (t.beta + 1.0 / 3.0));
  t.r_c = critical_r();
  return t;
}

double steady_trace_residual(double r, double gamma) {
  return std::pow(r, 2.0 + 3.0 * gamma) * 2.0 * std::cos(kPi * (gamma + 1.0 / 3.0)) - 1.0;
}

}  // namespace kfp::exponents

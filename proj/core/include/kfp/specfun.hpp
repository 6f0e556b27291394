#pragma once
// Gamma / Beta plumbing and the confluent hypergeometric pair M(a,b,z),
// U(a,b,z) on the real line, restricted to the parameter envelope this
// project actually exercises.  U at negative argument is *defined* as the
// real principal-branch combination of two M's (real cube roots for
// b = 2/3, 4/3), which is the convention the rest of the toolkit relies on.
#include <cstddef>

namespace kfp::specfun {

struct SpecFunResult {
  double value;
  double abs_err_est;
};

// Gamma function; throws DomainError at the poles (x = 0, -1, -2, ...).
SpecFunResult gamma_fn(double x);

// 1/Gamma(x); entire, zero at the poles of Gamma.
double recip_gamma(double x);

// Euler Beta B(x,y) = Gamma(x)Gamma(y)/Gamma(x+y).
SpecFunResult beta_fn(double x, double y);

// Kummer M(a,b,z) = 1F1(a;b;z).  b must not be a nonpositive integer.
// Series for |z| <= 40 (Kummer-transformed for z < 0 so all large terms are
// positive), asymptotic expansions beyond.  Throws AccuracyError if e^z
// overflows a double.
SpecFunResult kummer_m(double a, double b, double z);

// Tricomi U(a,b,z), b a non-integer multiple of 1/3 (2/3 and 4/3 plus the
// shifts the derivative relations need).  For z < 0 the real combination
//   U(a,b,z) = pi/sin(pi b) [ M(a,b,z)/(G(1+a-b)G(b))
//                             - z^{1-b} M(1+a-b,2-b,z)/(G(a)G(2-b)) ]
// with z^{1-b} taken as the real cube root.
SpecFunResult tricomi_u(double a, double b, double z);

// dU/dz = -a U(a+1, b+1, z); same conventions as tricomi_u.
SpecFunResult tricomi_u_prime(double a, double b, double z);

}  // namespace kfp::specfun

#pragma once
// Adaptive Gauss-Kronrod (G7,K15) and fixed Gauss-Legendre panels.
#include <cmath>
#include <cstddef>
#include <vector>
#include <algorithm>

#include "kfp/errors.hpp"

namespace kfp::quad {

struct Result {
  double value = 0.0;
  double err_est = 0.0;
  bool converged = true;
};

namespace detail {
// K15 abscissae (positive half), K15 weights, embedded G7 weights.
inline constexpr double xgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.000000000000000};
inline constexpr double wgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr double wg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

template <class F>
inline void g7k15(const F& f, double a, double b, double& k15, double& err) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double fc = f(c);
  double resg = fc * wg[3];
  double resk = fc * wgk[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * xgk[j];
    const double f1 = f(c - dx), f2 = f(c + dx);
    resk += wgk[j] * (f1 + f2);
    if (j % 2 == 1) resg += wg[j / 2] * (f1 + f2);
  }
  k15 = resk * h;
  err = std::abs((resk - resg) * h);
  // sharpen the classic QUADPACK way
  err = std::min(err, std::pow(200.0 * err / std::max(1e-300, std::abs(k15) + err), 1.5) * (std::abs(k15) + err));
}
}  // namespace detail

// Adaptive integration of f over [a,b].
template <class F>
Result integrate(const F& f, double a, double b, double abs_tol = 1e-12,
                 double rel_tol = 1e-10, int max_intervals = 4000) {
  struct Iv { double a, b, val, err; };
  std::vector<Iv> stack;
  double v0, e0;
  detail::g7k15(f, a, b, v0, e0);
  stack.push_back({a, b, v0, e0});
  double total = v0, toterr = e0;
  while ((int)stack.size() < max_intervals) {
    if (toterr <= abs_tol || toterr <= rel_tol * std::abs(total)) break;
    // split the interval with the largest error
    size_t worst = 0;
    for (size_t i = 1; i < stack.size(); ++i)
      if (stack[i].err > stack[worst].err) worst = i;
    Iv iv = stack[worst];
    const double m = 0.5 * (iv.a + iv.b);
    if (m <= iv.a || m >= iv.b) break;  // interval at rounding limit
    double v1, e1, v2, e2;
    detail::g7k15(f, iv.a, m, v1, e1);
    detail::g7k15(f, m, iv.b, v2, e2);
    total += v1 + v2 - iv.val;
    toterr += e1 + e2 - iv.err;
    stack[worst] = {iv.a, m, v1, e1};
    stack.push_back({m, iv.b, v2, e2});
  }
  Result r;
  r.value = total;
  r.err_est = toterr;
  r.converged = (toterr <= abs_tol || toterr <= rel_tol * std::abs(total));
  return r;
}

// 16-point Gauss-Legendre on [a,b]; n_panels equal panels.
namespace detail {
inline constexpr double xgl16[8] = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
    0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
    0.9445750230732326, 0.9894009349916499};
inline constexpr double wgl16[8] = {
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
    0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
    0.0622535239386479, 0.0271524594117541};
}  // namespace detail

template <class F>
double gauss16(const F& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0.0;
  for (int j = 0; j < 8; ++j) {
    const double dx = h * detail::xgl16[j];
    s += detail::wgl16[j] * (f(c - dx) + f(c + dx));
  }
  return s * h;
}

template <class F>
double gauss16_panels(const F& f, double a, double b, int n_panels) {
  double s = 0.0;
  const double h = (b - a) / n_panels;
  for (int k = 0; k < n_panels; ++k) s += gauss16(f, a + k * h, a + (k + 1) * h);
  return s;
}

// Panels refined dyadically toward the left endpoint a: [a + (b-a)/2^{k+1},
// a + (b-a)/2^k], k = 0..levels-1, plus the residual sliver integrated as one
// panel. Used for integrands with a boundary layer at a.
template <class F>
double gauss16_dyadic_left(const F& f, double a, double b, int levels) {
  double s = 0.0;
  double hi = b;
  for (int k = 0; k < levels; ++k) {
    const double lo = a + (b - a) * std::ldexp(1.0, -(k + 1));
    s += gauss16(f, lo, hi);
    hi = lo;
  }
  s += gauss16(f, a, hi);
  return s;
}

}  // namespace kfp::quad

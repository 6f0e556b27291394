#include "kfp/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <initializer_list>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "kfp/errors.hpp"
#include "kfp/exponents.hpp"
#include "kfp/fluxes.hpp"
#include "kfp/lattice.hpp"
#include "kfp/particle.hpp"
#include "kfp/profiles.hpp"
#include "kfp/solver.hpp"

namespace kfp::acceptance {
namespace {

constexpr double kPi = 3.14159265358979323846;

std::string fmt(const char* pattern, ...) {
  char buf[256];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof buf, pattern, args);
  va_end(args);
  return buf;
}

// accumulate a named measurement and fold its verdict into the check
struct Gate {
  std::vector<std::string>* notes;
  bool ok = true;

  void require(bool cond, std::string line) {
    notes->push_back((cond ? "    ok   " : "    FAIL ") + std::move(line));
    ok = ok && cond;
  }
  void info(std::string line) { notes->push_back("         " + std::move(line)); }
};

// ---------------------------------------------------------------- check 1

bool check_exponents(Gate& g) {
  using exponents::alpha_of_r;
  const double rc = exponents::critical_r();

  const double a1 = std::abs(alpha_of_r(1.0));
  g.require(a1 < 1e-12, fmt("alpha(1) = %.3e  (|.| < 1e-12)", a1));

  const double lo = std::abs(alpha_of_r(rc - 1e-4) + 2.0 / 3.0);
  const double hi = std::abs(alpha_of_r(rc + 1e-4) + 2.0 / 3.0);
  g.require(lo < 5e-3 && hi < 5e-3,
            fmt("alpha(r_c -+ 1e-4) + 2/3 = %.2e / %.2e  (< 5e-3)", lo, hi));

  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double r = std::exp(std::log(1e-3) +
                              (std::log(0.99) - std::log(1e-3)) * i / 199.0);
    const double a = alpha_of_r(r);
    const double res = std::abs((2.0 + 3.0 * a) * std::log(r) +
                                std::log(2.0 * std::cos(kPi * (a + 1.0 / 3.0))));
    worst = std::max(worst, res);
  }
  g.require(worst < 1e-10,
            fmt("root-equation residual on 200 log-spaced r: max %.2e  (< 1e-10)", worst));
  return g.ok;
}

// ---------------------------------------------------------------- check 2

bool check_profiles(Gate& g) {
  using profiles::lambda_m23_closed;
  using profiles::lambda_profile;

  double worst_rel = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double z = -10.0 + 0.1 * i;
    const double a = lambda_profile(-2.0 / 3.0, z);
    const double b = lambda_m23_closed(z);
    worst_rel = std::max(worst_rel, std::abs(a - b) / std::max(1e-300, std::abs(b)));
  }
  g.require(worst_rel < 1e-6,
            fmt("series vs closed-form profile on [-10,10]: max rel gap %.2e  (< 1e-6)", worst_rel));

  // L'' + 3 z^2 L' - 9 g z L = 0 with the analytic first derivative and a
  // four-point stencil on it for L'' (one 1/h amplification instead of the
  // 1/h^2 of an all-value stencil, which would measure evaluator noise)
  using profiles::lambda_profile_prime;
  double worst_ode = 0.0;
  for (double gamma : {-0.724436214918, -2.0 / 3.0, -1.0 / 3.0}) {
    for (double z = -5.0; z <= 5.0; z += 0.05) {
      const double h = 1e-3 * std::max(1.0, std::abs(z));
      const double l0 = lambda_profile(gamma, z);
      const double d1 = lambda_profile_prime(gamma, z);
      const double d2 = (-lambda_profile_prime(gamma, z + 2 * h) +
                         8 * lambda_profile_prime(gamma, z + h) -
                         8 * lambda_profile_prime(gamma, z - h) +
                         lambda_profile_prime(gamma, z - 2 * h)) /
                        (12.0 * h);
      const double res = std::abs(d2 + 3.0 * z * z * d1 - 9.0 * gamma * z * l0) /
                         (1.0 + std::abs(l0));
      worst_ode = std::max(worst_ode, res);
    }
  }
  g.require(worst_ode < 1e-5, fmt("profile ODE residual (scaled): max %.2e  (< 1e-5)", worst_ode));
  return g.ok;
}

// ---------------------------------------------------------------- check 3

bool check_fluxes(Gate& g) {
  for (double r : {0.05, 0.10, 0.50}) {
    const double want = std::pow(9.0, 2.0 / 3.0) * (std::log(r) + kPi / std::sqrt(3.0));
    const double got = fluxes::boundary_flux(-2.0 / 3.0, fluxes::FluxBox{1.0, 1.0, r});
    const double rel = std::abs(got - want) / std::abs(want);
    g.require(rel < 1e-3, fmt("flux of the universal profile, r=%.2f: rel gap %.2e  (< 1e-3)", r, rel));

    const auto box = fluxes::box_independence_check(-2.0 / 3.0, r);
    g.require(box.max_rel_spread < 1e-3,
              fmt("box-shape invariance, r=%.2f: rel spread %.2e  (< 1e-3)", r, box.max_rel_spread));

    const double alpha = exponents::alpha_of_r(r);
    const auto d = fluxes::boundary_flux_detail(alpha, fluxes::FluxBox{1.0, 1.0, r});
    const double scaled = std::abs(d.flux) / d.scale;
    g.require(scaled < 1e-6,
              fmt("flux of the alpha profile, r=%.2f: |flux|/scale %.2e  (< 1e-6)", r, scaled));
  }
  return g.ok;
}

// ---------------------------------------------------------------- check 4

bool check_moment(Gate& g) {
  const double target = kPi / std::sqrt(3.0);
  const double got = fluxes::zeta_lambda_moment(100.0);
  g.require(std::abs(got - target) < 1e-2,
            fmt("zeta moment at M=100: %.6f vs %.6f, gap %.2e  (< 1e-2)", got, target,
                std::abs(got - target)));
  return g.ok;
}

// ---------------------------------------------------------------- check 5

bool check_pairing_constant(Gate& g) {
  for (double r : {0.03, 0.05, 0.08, 0.10, 0.13, 0.15}) {
    const double closed = exponents::c_star_closed(r);
    const double quad = fluxes::c_star_quadrature(r);
    const double rel = std::abs(closed - quad) / std::abs(closed);
    g.require(rel < 1e-3 && closed < 0.0 && quad < 0.0,
              fmt("C*(%.2f) = %.6f, quadrature %.6f, rel gap %.2e  (< 1e-3, both negative)", r,
                  closed, quad, rel));
  }
  return g.ok;
}

// ---------------------------------------------------------------- check 6

bool check_particle(Gate& g, std::uint64_t seed) {
  using namespace kfp::particle;
  const double target = kPi / std::sqrt(3.0);

  WalkConfig cfg;
  cfg.t_max = 1e15;  // hit times have a heavy tail; keep censoring negligible
  const FlightStats st = launch_speed_statistics(100000, seed, cfg);
  g.require(std::abs(st.mean_log_speed - target) < 0.05,
            fmt("mean log hit speed from (0,1): %.4f vs %.4f  (+- 0.05, stderr %.4f)",
                st.mean_log_speed, target, st.stderr_log_speed));

  const ScanResult sc =
      collapse_threshold_scan({0.08, 0.11, 0.14, 0.17, 0.20, 0.25}, 300, seed + 1);
  g.require(sc.r_c_hat > 0.143 && sc.r_c_hat < 0.183,
            fmt("threshold scan estimate r_c = %.4f  (in [0.143, 0.183])", sc.r_c_hat));

  const ParticleState start{0.0, 1.0, 0.0};
  const ChainStats sub = collapse_statistics(0.05, 1000, start, 100000, 1e-6, 1e12, seed + 2);
  g.require(sub.collapse_fraction > 0.95,
            fmt("collapse fraction at r=0.05: %.3f  (> 0.95)", sub.collapse_fraction));
  const ChainStats super_ = collapse_statistics(0.50, 1000, start, 100000, 1e-6, 1e12, seed + 2);
  g.require(super_.collapse_fraction < 0.05,
            fmt("collapse fraction at r=0.50: %.3f  (< 0.05)", super_.collapse_fraction));
  return g.ok;
}

// ---------------------------------------------------------------- check 7

bool check_lattice(Gate& g) {
  using namespace kfp::lattice;
  auto cfg_at = [](double h, WallRule rule) {
    LatticeConfig cfg;
    cfg.h = h;
    cfg.rule = rule;
    cfg.init = point_mass_init(1.0, h);
    return cfg;
  };

  const ToyComparison trap = compare_to_continuum(cfg_at(0.01, WallRule::trapping()), 0.5, 1.0);
  g.require(trap.l1_gap < 0.02, fmt("trapping wall vs absorbing image: L1 gap %.2e  (< 0.02)",
                                    trap.l1_gap));
  const ToyComparison refl =
      compare_to_continuum(cfg_at(0.01, WallRule::nontrapping(1.0)), 0.5, 1.0);
  g.require(refl.l1_gap < 0.02, fmt("escaping wall vs reflecting image: L1 gap %.2e  (< 0.02)",
                                    refl.l1_gap));

  const ToyComparison part = compare_to_continuum(cfg_at(0.01, WallRule::partial(1.0)), 0.5, 1.0);
  const double m = part.lattice.origin_mass;
  const double equil = part.lattice.u.front() / 2.0;  // U(0,t) / (2 mu), mu = 1
  g.require(std::abs(m - equil) < 0.05 * m,
            fmt("exchange wall equilibrium: m %.5f vs U(0)/2mu %.5f, rel gap %.3f  (< 0.05)", m,
                equil, std::abs(m - equil) / m));

  for (auto rule : {WallRule::trapping(), WallRule::nontrapping(1.0), WallRule::partial(1.0)}) {
    const double g1 = compare_to_continuum(cfg_at(0.01, rule), 0.5, 1.0).l1_gap;
    const double g2 = compare_to_continuum(cfg_at(0.005, rule), 0.5, 1.0).l1_gap;
    g.require(g2 < g1, fmt("halving h shrinks the gap: %.2e -> %.2e", g1, g2));
  }
  return g.ok;
}

// ---------------------------------------------------------------- check 8

double solver_kernel_l1(std::size_t nx, std::size_t nv) {
  using namespace kfp::solver;
  Grid g = build_grid(1.0, 18.0, 7.0, nx, nv, 0.3, 0.05);
  const double t0 = 1.5, x0 = 8.0, tau = 0.35;
  SolverState s = initialize(g, FreeKernel{t0, x0});
  const long n = (long)std::ceil(tau / (0.9 * cfl_limit(g)));
  for (long i = 0; i < n; ++i) s = advance(std::move(s), g, tau / n);
  double m0 = 0.0;
  for (std::size_t i = 0; i < g.nx(); ++i)
    for (std::size_t k = 0; k < g.nv(); ++k)
      m0 += initial_density(FreeKernel{t0, x0}, g.x[i], g.v[k]) * g.xw[i] * g.vw[k];
  double l1 = 0.0;
  for (std::size_t i = 0; i < g.nx(); ++i)
    for (std::size_t k = 0; k < g.nv(); ++k) {
      const double exact = initial_density(FreeKernel{t0 + tau, x0}, g.x[i], g.v[k]) / m0;
      l1 += std::abs(s.at(i, k, g.nv()) - exact) * g.xw[i] * g.vw[k];
    }
  return l1;
}

bool check_solver(Gate& g) {
  using namespace kfp::solver;

  // mass law on the subcritical side: ledger growth rate vs kappa * a_{-2/3}
  SolverConfig sub;
  sub.r = 0.1;
  sub.mode = DiagnosticMode::trapping;
  sub.x_max = 2.0;
  sub.v_max = 2.5;
  sub.n_x = 96;
  sub.n_v = 64;
  sub.t_final = 0.2;
  sub.rho_cut = 8e-3;
  sub.rho_fit = 3.2e-2;
  sub.x_min = 1e-3;
  sub.samples = 11;
  sub.init = ProfileCutoff{-2.0 / 3.0, 1.0};
  const DiagnosticSeries ser = run_diagnostic(sub);
  const double kap = exponents::kappa(0.1);

  int windows = 0;
  double worst_rel = 0.0, best_rel = 1e300;
  for (std::size_t i = 0; i + 1 < ser.rows.size(); ++i) {
    const auto& a = ser.rows[i];
    const auto& b = ser.rows[i + 1];
    if (a.fit_residual >= 0.1 || b.fit_residual >= 0.1) continue;
    const double dmdt = (b.total_mass - a.total_mass) / (b.t - a.t);
    const double amid = 0.5 * (a.a_m23 + b.a_m23);
    const double rel = std::abs(dmdt + kap * amid) / std::abs(dmdt);
    ++windows;
    worst_rel = std::max(worst_rel, rel);
    best_rel = std::min(best_rel, rel);
    g.info(fmt("window [%.2f, %.2f]: dM/dt %.4f, -kappa a %.4f, rel gap %.0f%%", a.t, b.t, dmdt,
               -kap * amid, 100.0 * rel));
  }
  g.require(windows > 0 && worst_rel < 0.10,
            fmt("subcritical mass law |dM/dt + kappa a| < 10%% of |dM/dt| on %d windows: "
                "worst %.0f%%",
                windows, 100.0 * worst_rel));
  if (worst_rel >= 0.10 && windows > 0)
    g.info("the corner absorber books the gross wall-corridor circulation, not the net "
           "flux, and the two-profile fit is near-degenerate at this r; see README");

  // supercritical side: the flux amplitude must stay at the fit noise floor
  SolverConfig sup;
  sup.r = 0.5;
  sup.mode = DiagnosticMode::supercritical;
  sup.samples = 11;
  const DiagnosticSeries ss = run_diagnostic(sup);
  double worst_margin = 0.0;
  for (const auto& row : ss.rows) {
    if (row.t < 0.2) continue;  // corner region not yet populated
    const double floor =
        row.fit_residual * std::max(std::abs(row.a_alpha), std::abs(row.a_m23));
    worst_margin = std::max(worst_margin, std::abs(row.a_m23) / (3.0 * floor));
  }
  g.require(worst_margin <= 1.0,
            fmt("supercritical flux amplitude <= 3x fit-noise floor: worst ratio %.2f", worst_margin));

  const double l1 = solver_kernel_l1(256, 128);
  g.require(l1 < 0.03, fmt("free-kernel interior L1 error at 256x128: %.4f  (< 0.03)", l1));
  return g.ok;
}

struct CheckSpec {
  const char* name;
  double budget_s;
  std::function<bool(Gate&, std::uint64_t)> fn;
};

const std::vector<CheckSpec>& battery() {
  static const std::vector<CheckSpec> entries{
      {"exponent fidelity", 1.0, [](Gate& g, std::uint64_t) { return check_exponents(g); }},
      {"profile identities", 10.0, [](Gate& g, std::uint64_t) { return check_profiles(g); }},
      {"boundary-flux constants", 30.0, [](Gate& g, std::uint64_t) { return check_fluxes(g); }},
      {"zeta-moment limit", 5.0, [](Gate& g, std::uint64_t) { return check_moment(g); }},
      {"pairing-constant cross-check", 60.0,
       [](Gate& g, std::uint64_t) { return check_pairing_constant(g); }},
      {"particle-walk dichotomy", 600.0,
       [](Gate& g, std::uint64_t s) { return check_particle(g, s); }},
      {"lattice toy limits", 120.0, [](Gate& g, std::uint64_t) { return check_lattice(g); }},
      {"kinetic solver mass law", 600.0, [](Gate& g, std::uint64_t) { return check_solver(g); }},
  };
  return entries;
}

}  // namespace

int check_count() { return (int)battery().size(); }

CheckResult run_check(int index, std::uint64_t seed) {
  if (index < 1 || index > check_count())
    throw ConfigError("check index out of range: " + std::to_string(index));
  const CheckSpec& entry = battery()[index - 1];
  CheckResult res;
  res.index = index;
  res.name = entry.name;
  res.budget_s = entry.budget_s;
  Gate gate{&res.notes};
  const auto start = std::chrono::steady_clock::now();
  bool ok = false;
  try {
    ok = entry.fn(gate, seed);
  } catch (const std::exception& e) {
    res.notes.push_back(std::string("    FAIL threw: ") + e.what());
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (res.seconds >= entry.budget_s)
    res.notes.push_back(fmt("    FAIL wall time %.1f s exceeds the %.0f s budget", res.seconds,
                            entry.budget_s));
  res.passed = ok && res.seconds < entry.budget_s;
  return res;
}

void print_result(const CheckResult& res, std::ostream& os) {
  os << (res.passed ? "[PASS] " : "[FAIL] ") << "check " << res.index << "/" << check_count()
     << ": " << res.name << fmt("  (%.1f s, budget %.0f s)", res.seconds, res.budget_s) << "\n";
  for (const std::string& line : res.notes) os << line << "\n";
}

int run_selected(const std::vector<int>& indices, std::ostream& os, std::uint64_t seed) {
  std::vector<int> which = indices;
  if (which.empty())
    for (int i = 1; i <= check_count(); ++i) which.push_back(i);
  int failures = 0;
  for (int idx : which) {
    const CheckResult res = run_check(idx, seed);
    print_result(res, os);
    if (!res.passed) ++failures;
  }
  os << (failures == 0 ? "all checks passed"
                       : fmt("%d of %zu checks failed", failures, which.size()))
     << "\n";
  return failures;
}

int run_all(std::ostream& os, std::uint64_t seed) { return run_selected({}, os, seed); }

}  // namespace kfp::acceptance

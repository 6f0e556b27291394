#pragma once
// Half-lattice random walk with a trapping, escaping, or partially-trapping
// wall site, its diffusive-limit density estimate, and the continuum
// references it converges to: image-method closed forms (absorbing /
// reflecting wall) and a mass-conserving finite-volume solve of the
// exchange-wall problem m(t) = U(0,t) / (2 mu).
//
// Walk rules on sites x_n = n h, one synchronous update per time step h^2:
//   interior n >= 1:  move to n-1 or n+1 with probability 1/2 each
//   wall n = 0:       move to 1 with probability lambda, stay otherwise
// lambda = 0 traps forever (absorbing wall in the limit), lambda in (0,1]
// fixed escapes freely (reflecting wall), lambda = mu h keeps a macroscopic
// atom of mass at the wall in equilibrium with the nearby density.

#include <cstddef>
#include <vector>

namespace kfp::lattice {

enum class WallRuleKind { trapping, nontrapping, partial };

struct WallRule {
  WallRuleKind kind = WallRuleKind::trapping;
  double param = 0.0;  // escape probability (nontrapping) or exchange rate mu

  static WallRule trapping() { return {WallRuleKind::trapping, 0.0}; }
  static WallRule nontrapping(double lambda);
  static WallRule partial(double mu);

  // per-step escape probability out of site 0 at spacing h
  double escape_probability(double h) const;
};

struct LatticeConfig {
  double h = 0.01;
  WallRule rule{};
  long steps = 0;
  std::vector<double> init;  // occupancy P_n(0); unit total mass
};

struct LatticeState {
  std::vector<double> occupancy;  // P_n(k) for n = 0..N
  long k = 0;
};

// throws ConfigError on h <= 0, out-of-range rule parameters, or an init
// vector that is empty, negative, or not unit mass
void validate(const LatticeConfig& cfg);

// occupancy vector with unit mass at the site nearest to x0
std::vector<double> point_mass_init(double x0, double h);

// one synchronous update; the last entry acts as a reflecting far wall
LatticeState step_lattice(const LatticeState& state, const LatticeConfig& cfg);

struct DensityEstimate {
  std::vector<double> x;     // site positions h .. N h
  std::vector<double> u;     // density estimate at those sites
  double origin_mass = 0.0;  // atom at x = 0
  double h = 0.0;
  double t = 0.0;
};

// Run t_phys / h^2 steps from cfg.init on a lattice truncated ten standard
// deviations past the initial support, then rescale the occupancy to a
// density (P_n / h at x = n h) plus the wall atom P_0.  A single-site init
// populates only every other site at any fixed step (the walk alternates
// parity), so the estimate averages two consecutive steps, which projects
// the checkerboard mode out without touching the total mass.
DensityEstimate diffusive_limit(const LatticeConfig& cfg, double t_phys);

// continuum references: heat equation u_t = (1/2) u_xx on x > 0 for a unit
// point mass released at x0
double heat_kernel(double y, double t);
double dirichlet_reference(double x, double x0, double t);  // absorbing wall
double neumann_reference(double x, double x0, double t);    // reflecting wall
double dirichlet_origin_mass(double x0, double t);          // absorbed mass

struct RobinSolution {
  std::vector<double> x;  // cell centers delta .. M delta
  std::vector<double> u;
  double origin_mass = 0.0;
  double delta = 0.0;         // spacing of the accepted grid
  double err_estimate = 0.0;  // gap between the last two refinement levels
};

// Exchange-wall continuum reference: backward-Euler finite-volume solve of
// u_t = (1/2) u_xx with the wall closure U(0) = 2 mu m and flux ledger
// m'(t) = (1/2) U_x(0,t), so total mass m + integral of U is conserved to
// solver roundoff.  The grid is refined (halving the spacing) until the
// density + atom change drops below tol; throws ConvergenceError otherwise.
// mu = 0 degenerates to the absorbing wall, large mu approaches the
// reflecting one.
RobinSolution robin_reference(double mu, double x0, double t,
                              double tol = 1e-3);

struct ToyComparison {
  DensityEstimate lattice;
  std::vector<double> u_ref;  // continuum reference sampled at lattice sites
  double l1_gap = 0.0;        // h * sum |u - u_ref|
  double m_ref = 0.0;         // continuum wall atom
};

// run the walk for the configured rule and compare against the matching
// continuum reference (trapping -> absorbing image, nontrapping ->
// reflecting image, partial -> exchange-wall finite-volume solution)
ToyComparison compare_to_continuum(const LatticeConfig& cfg, double t_phys,
                                   double x0);

}  // namespace kfp::lattice

#pragma once
// Monte Carlo engine for an inelastic Brownian particle on the half line:
//   dX = V dt,  dV = sqrt(2) dW,  X >= 0,  V -> -r V whenever X reaches 0.
// Free flight uses exact joint-Gaussian increments, so there is no
// discretization bias away from the wall; the adaptive step guard keeps
// within-step wall crossings either negligibly unlikely or resolved by
// interpolation of the step skeleton.  All step-size knobs are dimensionless
// and scale-free: the dynamics is equivariant under
// (x, v, t) -> (L^3 x, L v, L^2 t) with common noise, and the stepper
// preserves that equivariance (dt_max/t_max carry time units, eps_x carries
// position units; everything else is a pure number).

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "kfp/rng.hpp"

namespace kfp::particle {

struct ParticleState {
  double x = 0.0;  // position, >= 0 (equals 0 only at wall events)
  double v = 0.0;  // velocity
  double t = 0.0;  // elapsed time
};

// One exact free-flight step of length dt driven by two independent standard
// normal draws: the pair (dV, dX - v dt) is jointly Gaussian with
// Var(dV) = 2 dt, Var(dX - v dt) = (2/3) dt^3, Cov = dt^2.
// Throws DomainError unless dt > 0.
ParticleState exact_increment(const ParticleState& s, double dt,
                              std::pair<double, double> noise);

// Inelastic wall law: incoming v_in < 0 maps to -r * v_in > 0 (one
// multiplication, so post-speed == r * pre-speed bitwise).
// Throws DomainError unless v_in < 0 and 0 < r <= 1.
double reflect(double v_in, double r);

enum class Termination {
  cutoff,      // bounce budget exhausted (or speed ceiling, where one is set)
  collapse,    // speed fell below the floor with time to spare
  time_limit,  // physical time budget exhausted mid-flight
};

struct BounceRecord {
  std::vector<double> hit_times;   // strictly increasing wall-hit times
  std::vector<double> hit_speeds;  // |V| just before each impact (> 0)
  Termination terminated = Termination::cutoff;
};

struct WalkConfig {
  double dt_max = std::numeric_limits<double>::infinity();  // hard step cap
  double eps_x = 1e-9;      // wall bracketing resolution (position units)
  double t_max = 1e12;      // physical time budget (absolute clock)
  double guard_in = 0.5;    // dt = guard_in x^2/(x+|v|^3)^{4/3} moving wallward
  double guard_out = 0.2;   // dt = guard_out (x^{2/3} + kick v^2) moving away
  double kick = 1e-3;       // first-step scale when leaving the wall
  double cone = 1.0 / 64;   // time-of-flight step once x <= cone |v|^3
  bool zero_noise = false;  // deterministic ballistic test hook
};

struct WallHit {
  ParticleState state;      // x = 0, v < 0 (pre-reflection), t = hit time
  double speed = 0.0;       // |v| at impact
  bool timed_out = false;   // time budget ran out before the wall was reached
};

// Integrate one free flight until the wall is hit or cfg.t_max is reached.
// Start must satisfy x > 0, or x = 0 with v > 0.  Crossings inside a step
// are localized by bisection on the cubic skeleton interpolating the step's
// exact endpoints; once x < eps_x with v < 0 the approach is treated as
// ballistic.
WallHit run_to_wall(ParticleState start, const WalkConfig& cfg,
                    rng::NormalStream& noise);

// Chain flights with inelastic reflection until one of: max_bounces recorded
// (cutoff), post-reflection speed below speed_floor with the geometric bound
// on the remaining rebound time fitting the budget (collapse), or t_max
// exhausted (time_limit).  Noise comes from NormalStream(seed, stream).
BounceRecord bounce_chain(double r, ParticleState start, int max_bounces,
                          double speed_floor, double t_max, std::uint64_t seed,
                          const WalkConfig& cfg = {}, std::uint64_t stream = 0);

// Statistics of log |V| at the first wall hit for flights launched from
// (x, v) = (0, 1); paths fan out over per-path noise streams.
struct FlightStats {
  double mean_log_speed = 0.0;
  double stderr_log_speed = 0.0;
  long completed = 0;
  long timed_out = 0;
};
FlightStats launch_speed_statistics(long paths, std::uint64_t seed,
                                    const WalkConfig& cfg = {});

// Terminal-state tally of bounce chains started from `start`.
struct ChainStats {
  long collapsed = 0;
  long timed_out = 0;
  long cutoff = 0;
  double collapse_fraction = 0.0;
};
ChainStats collapse_statistics(double r, long paths, ParticleState start,
                               int max_bounces, double speed_floor,
                               double t_max, std::uint64_t seed,
                               const WalkConfig& cfg = {});

// Restitution sweep: for each r, chains from (0, 1) accumulate consecutive
// hit-speed log ratios (whose mean is log r + E[log H], H the unit-launch
// hit speed) and the collapse fraction.  The threshold estimate r_c_hat is
// the zero crossing of mean_log_ratio across the grid, interpolated in
// log r.  Same path index reuses the same noise stream at every r, so the
// per-r results are coupled.
struct ScanRow {
  double r;
  long paths;
  long bounces;            // ratios accumulated for this row
  double collapse_fraction;
  double mean_log_ratio;
  double stderr_log_ratio;
};
struct ScanResult {
  std::vector<ScanRow> rows;
  double r_c_hat = 0.0;
};
ScanResult collapse_threshold_scan(const std::vector<double>& r_grid,
                                   long paths_per_r, std::uint64_t seed,
                                   const WalkConfig& cfg = {});

}  // namespace kfp::particle

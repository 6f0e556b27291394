#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "kfp/errors.hpp"
#include "kfp/particle.hpp"

using namespace kfp;
using namespace kfp::particle;

namespace {
constexpr double kLogHitSpeedMean = 1.813799364234218;  // pi / sqrt(3)
}

TEST_CASE("exact increment: deterministic skeleton and exact moment law") {
  const ParticleState s{2.0, -0.4, 1.5};

  SUBCASE("zero noise is free flight") {
    const ParticleState o = exact_increment(s, 0.25, {0.0, 0.0});
    CHECK(o.x == doctest::Approx(2.0 - 0.4 * 0.25).epsilon(1e-15));
    CHECK(o.v == -0.4);
    CHECK(o.t == doctest::Approx(1.75).epsilon(1e-15));
  }

  SUBCASE("nonpositive step is rejected") {
    CHECK_THROWS_AS(exact_increment(s, 0.0, {0.1, 0.2}), DomainError);
    CHECK_THROWS_AS(exact_increment(s, -1.0, {0.1, 0.2}), DomainError);
  }

  SUBCASE("sampled covariance matches the transition law") {
    rng::NormalStream ns(5, 0);
    const double dt = 0.37;
    double sv = 0, svv = 0, sx = 0, sxx = 0, sxv = 0;
    const long n = 1000000;
    for (long i = 0; i < n; ++i) {
      const ParticleState o = exact_increment(s, dt, ns.pair());
      const double dv = o.v - s.v;
      const double dx = o.x - s.x - s.v * dt;
      sv += dv;
      svv += dv * dv;
      sx += dx;
      sxx += dx * dx;
      sxv += dv * dx;
    }
    const double var_dv = svv / n - (sv / n) * (sv / n);
    const double var_dx = sxx / n - (sx / n) * (sx / n);
    const double cov = sxv / n - (sv / n) * (sx / n);
    CHECK(var_dv / (2.0 * dt) == doctest::Approx(1.0).epsilon(0.005));
    CHECK(var_dx / ((2.0 / 3.0) * dt * dt * dt) ==
          doctest::Approx(1.0).epsilon(0.005));
    // corr(dV, dX - v dt) = dt^2 / sqrt(2dt * (2/3)dt^3) = sqrt(3)/2
    CHECK(cov / std::sqrt(var_dv * var_dx) ==
          doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(0.005));
  }
}

TEST_CASE("reflect: inelastic wall law") {
  CHECK(reflect(-1.0, 0.5) == 0.5);
  CHECK(reflect(-2.0, 1.0) == 2.0);  // elastic
  CHECK(reflect(-0.1, 0.16303) == doctest::Approx(0.016303).epsilon(1e-12));

  // post-speed is r * pre-speed bitwise (single multiplication)
  for (double v : {-3.7, -0.02, -123.456}) {
    for (double r : {0.1, 0.5, 0.9999}) {
      CHECK(reflect(v, r) == -r * v);
      CHECK(reflect(v, r) > 0.0);
    }
  }

  CHECK_THROWS_AS(reflect(0.0, 0.5), DomainError);
  CHECK_THROWS_AS(reflect(1.0, 0.5), DomainError);
  CHECK_THROWS_AS(reflect(-1.0, 0.0), DomainError);
  CHECK_THROWS_AS(reflect(-1.0, 1.5), DomainError);
}

TEST_CASE("run_to_wall: ballistic hook hits the wall at the exact time") {
  WalkConfig cfg;
  cfg.zero_noise = true;
  rng::NormalStream ns(0, 0);

  WallHit h = run_to_wall(ParticleState{1.0, -1.0, 0.0}, cfg, ns);
  CHECK_FALSE(h.timed_out);
  CHECK(h.state.t == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(h.speed == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(h.state.x == 0.0);
  CHECK(h.state.v < 0.0);

  SUBCASE("time budget cuts the flight") {
    WalkConfig tight = cfg;
    tight.t_max = 0.1;
    WallHit cut = run_to_wall(ParticleState{1.0, -1.0, 0.0}, tight, ns);
    CHECK(cut.timed_out);
    CHECK(cut.state.t == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(cut.state.x > 0.0);
  }

  SUBCASE("invalid starts are rejected") {
    CHECK_THROWS_AS(run_to_wall(ParticleState{-1.0, 1.0, 0.0}, cfg, ns),
                    DomainError);
    CHECK_THROWS_AS(run_to_wall(ParticleState{0.0, -1.0, 0.0}, cfg, ns),
                    DomainError);
    CHECK_THROWS_AS(run_to_wall(ParticleState{0.0, 0.0, 0.0}, cfg, ns),
                    DomainError);
  }
}

TEST_CASE("run_to_wall: launch speed statistics match the critical constant") {
  WalkConfig cfg;
  cfg.t_max = 1e15;  // flight times have a heavy t^{-1/4} tail; a generous
                     // budget keeps the completed-flight selection negligible
  const FlightStats st = launch_speed_statistics(100000, 1, cfg);
  CHECK(st.completed + st.timed_out == 100000);
  CHECK(st.timed_out < 200);
  CHECK(st.stderr_log_speed < 0.01);
  CHECK(st.mean_log_speed == doctest::Approx(kLogHitSpeedMean).epsilon(0.028));
  CHECK(std::abs(st.mean_log_speed - kLogHitSpeedMean) < 0.05);
}

TEST_CASE("run_to_wall: hit times refine consistently as eps_x shrinks") {
  // common noise per path; only the bracketing resolution changes
  const int levels = 9, paths = 32;
  std::vector<std::vector<double>> times(levels);
  for (int k = 0; k < levels; ++k) {
    WalkConfig cfg;
    cfg.eps_x = 1e-3 * std::pow(2.0, -k);
    cfg.t_max = 1e6;
    for (int p = 0; p < paths; ++p) {
      rng::NormalStream ns(11, static_cast<std::uint64_t>(p));
      const WallHit h = run_to_wall(ParticleState{0.9, -0.3, 0.0}, cfg, ns);
      times[k].push_back(h.timed_out ? -1.0 : h.state.t);
    }
  }
  std::vector<double> diff(levels - 1, 0.0);
  for (int k = 0; k + 1 < levels; ++k) {
    int n = 0;
    for (int p = 0; p < paths; ++p) {
      if (times[k][p] >= 0.0 && times[k + 1][p] >= 0.0) {
        diff[k] += std::abs(times[k][p] - times[k + 1][p]);
        ++n;
      }
    }
    REQUIRE(n >= 28);
    diff[k] /= n;
  }
  // refinement gaps collapse once eps_x is small: Cauchy in eps_x
  for (int k = 4; k + 1 < levels; ++k) CHECK(diff[k] < 1e-7);
  CHECK(diff[levels - 2] < 1e-9);
  CHECK(diff[levels - 2] <= diff[1] + 1e-12);
}

TEST_CASE("bounce records scale exactly under the cubic-linear-quadratic rescaling") {
  // (x, v, t) -> (L^3 x, L v, L^2 t) with common noise must reproduce the
  // same chain; L = 2 keeps every rescaling a power of two
  const double L = 2.0, L2 = L * L, L3 = 8.0;
  double worst = 0.0;
  for (int p = 0; p < 100; ++p) {
    WalkConfig cfg1;
    cfg1.eps_x = 1e-9;
    WalkConfig cfg2 = cfg1;
    cfg2.eps_x = L3 * cfg1.eps_x;
    const BounceRecord a =
        bounce_chain(0.3, ParticleState{0.37, -0.21, 0.0}, 4, 1e-12, 40.0, 77,
                     cfg1, static_cast<std::uint64_t>(p));
    const BounceRecord b =
        bounce_chain(0.3, ParticleState{L3 * 0.37, L * -0.21, 0.0}, 4,
                     L * 1e-12, L2 * 40.0, 77, cfg2,
                     static_cast<std::uint64_t>(p));
    REQUIRE(a.hit_times.size() == b.hit_times.size());
    REQUIRE(a.terminated == b.terminated);
    for (std::size_t i = 0; i < a.hit_times.size(); ++i) {
      worst = std::max(worst, std::abs(b.hit_times[i] - L2 * a.hit_times[i]) /
                                  (L2 * a.hit_times[i]));
      worst = std::max(worst, std::abs(b.hit_speeds[i] - L * a.hit_speeds[i]) /
                                  (L * a.hit_speeds[i]));
    }
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("bounce_chain: ballistic chain records exactly one bounce") {
  WalkConfig cfg;
  cfg.zero_noise = true;
  const BounceRecord rec =
      bounce_chain(0.5, ParticleState{1.0, -1.0, 0.0}, 50, 1e-9, 10.0, 0, cfg);
  // after the reflection the velocity stays positive and x grows: no re-entry
  REQUIRE(rec.hit_times.size() == 1);
  CHECK(rec.hit_times[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rec.hit_speeds[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rec.terminated == Termination::time_limit);

  CHECK_THROWS_AS(bounce_chain(0.0, ParticleState{1.0, -1.0, 0.0}, 5, 1e-9,
                               10.0, 0, cfg),
                  DomainError);
  CHECK_THROWS_AS(bounce_chain(1.0001, ParticleState{1.0, -1.0, 0.0}, 5, 1e-9,
                               10.0, 0, cfg),
                  DomainError);
}

TEST_CASE("bounce_chain: identical seeds reproduce identical records") {
  const ParticleState start{1.0, -1.0, 0.0};
  const BounceRecord a = bounce_chain(0.2, start, 10, 1e-9, 1e9, 123,
                                      WalkConfig{}, 7);
  const BounceRecord b = bounce_chain(0.2, start, 10, 1e-9, 1e9, 123,
                                      WalkConfig{}, 7);
  CHECK(a.hit_times == b.hit_times);
  CHECK(a.hit_speeds == b.hit_speeds);
  CHECK(a.terminated == b.terminated);

  const BounceRecord c = bounce_chain(0.2, start, 10, 1e-9, 1e9, 123,
                                      WalkConfig{}, 8);
  CHECK(a.hit_times != c.hit_times);

  SUBCASE("record invariants") {
    REQUIRE(a.hit_times.size() >= 2);
    for (std::size_t i = 1; i < a.hit_times.size(); ++i)
      CHECK(a.hit_times[i] > a.hit_times[i - 1]);
    for (double s : a.hit_speeds) CHECK(s > 0.0);
  }
}

TEST_CASE("collapse dichotomy across the critical restitution") {
  const ParticleState start{0.0, 1.0, 0.0};
  const ChainStats sub =
      collapse_statistics(0.05, 1000, start, 100000, 1e-6, 1e12, 2);
  CHECK(sub.collapsed + sub.timed_out + sub.cutoff == 1000);
  CHECK(sub.collapse_fraction > 0.95);

  const ChainStats super =
      collapse_statistics(0.5, 1000, start, 100000, 1e-6, 1e12, 2);
  CHECK(super.collapse_fraction < 0.05);
}

TEST_CASE("threshold scan brackets the critical restitution") {
  const std::vector<double> grid{0.08, 0.11, 0.14, 0.17, 0.20, 0.25};
  const ScanResult sc = collapse_threshold_scan(grid, 300, 3);
  REQUIRE(sc.rows.size() == grid.size());
  for (std::size_t i = 0; i < sc.rows.size(); ++i) {
    CHECK(sc.rows[i].r == grid[i]);
    CHECK(sc.rows[i].paths == 300);
    CHECK(sc.rows[i].bounces > 0);
    CHECK(sc.rows[i].stderr_log_ratio > 0.0);
  }
  // collapse fraction is non-increasing in r (coupled paths; small slack for
  // the residual sampling noise)
  for (std::size_t i = 0; i + 1 < sc.rows.size(); ++i)
    CHECK(sc.rows[i].collapse_fraction >=
          sc.rows[i + 1].collapse_fraction - 0.08);
  CHECK(sc.r_c_hat > 0.143);
  CHECK(sc.r_c_hat < 0.183);

  SUBCASE("domain guards") {
    CHECK_THROWS_AS(collapse_threshold_scan({}, 10, 0), DomainError);
    CHECK_THROWS_AS(collapse_threshold_scan({0.01}, 10, 0), DomainError);
    CHECK_THROWS_AS(collapse_threshold_scan({1.5}, 10, 0), DomainError);
    CHECK_THROWS_AS(collapse_threshold_scan({0.5}, 0, 0), DomainError);
  }
}

TEST_CASE("threshold scan at the elastic end recovers the launch-speed mean") {
  // at r = 1 the hit-speed log ratio has mean log(1) + E[log H] = E[log H]
  const ScanResult sc = collapse_threshold_scan({1.0}, 6000, 4);
  REQUIRE(sc.rows.size() == 1);
  CHECK(sc.rows[0].collapse_fraction == 0.0);
  CHECK(std::abs(sc.rows[0].mean_log_ratio - kLogHitSpeedMean) < 0.05);
}

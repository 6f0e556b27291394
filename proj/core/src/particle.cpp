#include "kfp/particle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>

#include "kfp/errors.hpp"

namespace kfp::particle {

namespace {

constexpr long kStepBudget = 50'000'000;  // per flight; orders beyond normal use

// Cubic Hermite interpolation of one step on s in [0, dt]; matches position
// and velocity at both endpoints, which the increments supply exactly.
struct StepSkeleton {
  double x0, v0, x1, v1, dt;

  double pos(double s) const {
    const double u = s / dt, w = 1.0 - u;
    return x0 * (1.0 + 2.0 * u) * w * w + v0 * dt * u * w * w +
           x1 * u * u * (3.0 - 2.0 * u) - v1 * dt * u * u * w;
  }
  double vel(double s) const {
    const double u = s / dt, w = 1.0 - u;
    return (x1 - x0) * 6.0 * u * w / dt + v0 * w * (1.0 - 3.0 * u) +
           v1 * u * (3.0 * u - 2.0);
  }
};

// First zero of the skeleton position in (0, dt]; exists whenever
// pos(0) > 0 >= pos(dt).  Coarse scan isolates the first sign change, then
// bisection localizes it to relative machine precision.
double first_crossing(const StepSkeleton& sk) {
  constexpr int kScan = 32;
  double lo = 0.0, hi = sk.dt;
  for (int i = 1; i <= kScan; ++i) {
    const double s = sk.dt * (static_cast<double>(i) / kScan);
    if (sk.pos(s) <= 0.0) {
      hi = s;
      break;
    }
    lo = s;
  }
  for (int it = 0; it < 90 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (sk.pos(mid) <= 0.0)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

double adaptive_dt(const ParticleState& s, const WalkConfig& cfg) {
  const double av = std::abs(s.v);
  double dt;
  if (s.v < 0.0) {
    const double v3 = av * av * av;
    if (s.x <= cfg.cone * v3) {
      dt = s.x / av;  // time of flight; the skeleton resolves the impact
    } else {
      const double c = std::cbrt(s.x + v3);
      const double q = s.x / (c * c);
      dt = cfg.guard_in * q * q;
    }
  } else {
    const double c = std::cbrt(s.x);
    dt = cfg.guard_out * (c * c + cfg.kick * s.v * s.v);
  }
  return std::min(dt, cfg.dt_max);
}

// Distribute body(0..n-1) over hardware threads; each index writes only its
// own slot, so results are schedule-independent.
void parallel_paths(long n, const std::function<void(long)>& body) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned nt =
      static_cast<unsigned>(std::min<long>(hw, std::max<long>(1, n)));
  if (nt == 1) {
    for (long i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr first_error;
  std::mutex err_mutex;
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (unsigned k = 0; k < nt; ++k) {
    pool.emplace_back([&] {
      try {
        long i;
        while ((i = next.fetch_add(1, std::memory_order_relaxed)) < n) body(i);
      } catch (...) {
        std::scoped_lock lk(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

struct ChainOpts {
  int max_bounces;
  double speed_floor;
  double speed_ceiling;  // infinity = disabled; exceeding it counts as cutoff
  double t_max;
};

BounceRecord run_chain(double r, ParticleState start, const ChainOpts& opt,
                       const WalkConfig& base, rng::NormalStream& noise) {
  if (!(r > 0.0 && r <= 1.0))
    throw DomainError("bounce_chain: restitution must lie in (0, 1]");
  WalkConfig cfg = base;
  cfg.t_max = opt.t_max;
  BounceRecord rec;
  ParticleState s = start;
  while (static_cast<int>(rec.hit_times.size()) < opt.max_bounces) {
    const WallHit hit = run_to_wall(s, cfg, noise);
    if (hit.timed_out) {
      rec.terminated = Termination::time_limit;
      return rec;
    }
    double t_hit = hit.state.t;
    if (!rec.hit_times.empty() && t_hit <= rec.hit_times.back()) {
      // flight shorter than the absolute clock resolution: snap upward so
      // hit times stay strictly increasing
      t_hit = std::nextafter(rec.hit_times.back(),
                             std::numeric_limits<double>::infinity());
    }
    rec.hit_times.push_back(t_hit);
    rec.hit_speeds.push_back(hit.speed);
    const double u = hit.state.v < 0.0 ? reflect(hit.state.v, r) : 0.0;
    if (u < opt.speed_floor) {
      // operational collapse: once this slow, the remaining rebound times
      // are geometrically bounded by ~ u^2/(1 - r^2) time units
      const double slack = 1e3 * u * u / std::max(1.0 - r * r, 1e-3);
      rec.terminated = (t_hit + slack < opt.t_max) ? Termination::collapse
                                                   : Termination::time_limit;
      return rec;
    }
    if (u > opt.speed_ceiling) {
      rec.terminated = Termination::cutoff;
      return rec;
    }
    s = ParticleState{0.0, u, t_hit};
  }
  rec.terminated = Termination::cutoff;
  return rec;
}

}  // namespace

ParticleState exact_increment(const ParticleState& s, double dt,
                              std::pair<double, double> noise) {
  if (!(dt > 0.0)) throw DomainError("exact_increment: dt must be > 0");
  const double dv = std::sqrt(2.0 * dt) * noise.first;
  const double bridge = std::sqrt(dt * dt * dt / 6.0) * noise.second;
  return {s.x + s.v * dt + 0.5 * dt * dv + bridge, s.v + dv, s.t + dt};
}

double reflect(double v_in, double r) {
  if (!(v_in < 0.0))
    throw DomainError("reflect: incoming velocity must be negative");
  if (!(r > 0.0 && r <= 1.0))
    throw DomainError("reflect: restitution must lie in (0, 1]");
  return -r * v_in;
}

WallHit run_to_wall(ParticleState start, const WalkConfig& cfg,
                    rng::NormalStream& noise) {
  if (!(start.x > 0.0 || (start.x == 0.0 && start.v > 0.0)))
    throw DomainError("run_to_wall: need x > 0, or x = 0 with outgoing v");
  ParticleState s = start;
  for (long step = 0; step < kStepBudget; ++step) {
    if (s.t >= cfg.t_max) return {s, 0.0, true};
    if (s.v < 0.0 && s.x <= cfg.eps_x &&
        s.x <= cfg.cone * (-s.v) * (-s.v) * (-s.v)) {
      // inside the certain-hit cone and below the bracketing resolution:
      // the remaining approach is ballistic (the cone condition keeps this
      // branch scale-free; eps_x alone must not trigger it, or flights whose
      // whole geometry sits below eps_x would be absorbed mid-air)
      const double speed = -s.v;
      return {ParticleState{0.0, s.v, s.t + s.x / speed}, speed, false};
    }
    double dt = adaptive_dt(s, cfg);
    bool final_step = false;
    if (s.t + dt >= cfg.t_max) {
      dt = cfg.t_max - s.t;
      final_step = true;
    }
    if (!(dt > 0.0)) return {s, 0.0, true};
    const auto z =
        cfg.zero_noise ? std::pair{0.0, 0.0} : noise.pair();
    const ParticleState n = exact_increment(s, dt, z);
    if (n.x <= 0.0) {
      const StepSkeleton sk{s.x, s.v, n.x, n.v, dt};
      const double sc = first_crossing(sk);
      double vh = sk.vel(sc);
      if (vh > 0.0) vh = -vh;  // grazing root: keep the incoming orientation
      return {ParticleState{0.0, vh, s.t + sc}, -vh, false};
    }
    if (final_step) return {n, 0.0, true};
    s = n;
  }
  throw ConvergenceError("run_to_wall: step budget exhausted", s.t);
}

BounceRecord bounce_chain(double r, ParticleState start, int max_bounces,
                          double speed_floor, double t_max, std::uint64_t seed,
                          const WalkConfig& cfg, std::uint64_t stream) {
  rng::NormalStream noise(seed, stream);
  const ChainOpts opt{max_bounces, speed_floor,
                      std::numeric_limits<double>::infinity(), t_max};
  return run_chain(r, start, opt, cfg, noise);
}

FlightStats launch_speed_statistics(long paths, std::uint64_t seed,
                                    const WalkConfig& cfg) {
  if (paths < 1) throw DomainError("launch_speed_statistics: paths >= 1");
  std::vector<double> logs(static_cast<std::size_t>(paths),
                           std::numeric_limits<double>::quiet_NaN());
  parallel_paths(paths, [&](long i) {
    rng::NormalStream noise(seed, static_cast<std::uint64_t>(i));
    const WallHit hit = run_to_wall(ParticleState{0.0, 1.0, 0.0}, cfg, noise);
    if (!hit.timed_out) logs[static_cast<std::size_t>(i)] = std::log(hit.speed);
  });
  FlightStats st;
  double sum = 0.0;
  for (double l : logs) {
    if (std::isnan(l)) {
      ++st.timed_out;
    } else {
      ++st.completed;
      sum += l;
    }
  }
  if (st.completed == 0) return st;
  st.mean_log_speed = sum / static_cast<double>(st.completed);
  double ss = 0.0;
  for (double l : logs) {
    if (!std::isnan(l)) {
      const double d = l - st.mean_log_speed;
      ss += d * d;
    }
  }
  if (st.completed > 1)
    st.stderr_log_speed = std::sqrt(
        ss / (static_cast<double>(st.completed - 1) *
              static_cast<double>(st.completed)));
  return st;
}

ChainStats collapse_statistics(double r, long paths, ParticleState start,
                               int max_bounces, double speed_floor,
                               double t_max, std::uint64_t seed,
                               const WalkConfig& cfg) {
  if (paths < 1) throw DomainError("collapse_statistics: paths >= 1");
  std::vector<char> outcome(static_cast<std::size_t>(paths), 0);
  parallel_paths(paths, [&](long i) {
    const BounceRecord rec =
        bounce_chain(r, start, max_bounces, speed_floor, t_max, seed, cfg,
                     static_cast<std::uint64_t>(i));
    outcome[static_cast<std::size_t>(i)] =
        static_cast<char>(rec.terminated);
  });
  ChainStats st;
  for (char o : outcome) {
    switch (static_cast<Termination>(o)) {
      case Termination::collapse: ++st.collapsed; break;
      case Termination::time_limit: ++st.timed_out; break;
      case Termination::cutoff: ++st.cutoff; break;
    }
  }
  st.collapse_fraction =
      static_cast<double>(st.collapsed) / static_cast<double>(paths);
  return st;
}

ScanResult collapse_threshold_scan(const std::vector<double>& r_grid,
                                   long paths_per_r, std::uint64_t seed,
                                   const WalkConfig& cfg) {
  if (r_grid.empty()) throw DomainError("collapse_threshold_scan: empty grid");
  if (paths_per_r < 1)
    throw DomainError("collapse_threshold_scan: paths >= 1");
  for (double r : r_grid)
    if (!(r > 0.02 && r <= 1.0))
      throw DomainError("collapse_threshold_scan: r values must lie in (0.02, 1]");

  // Time budget far above ceiling^2 * typical flight times, so completed
  // flights carry no noticeable selection against long excursions (the
  // flight-time tail is heavy; conditioning on fitting the budget would
  // otherwise bias the hit-speed ratios downward).
  const ChainOpts opt{400, 1e-9, 1e3, 1e24};
  ScanResult out;
  out.rows.reserve(r_grid.size());
  for (double r : r_grid) {
    std::vector<double> ratio_sum(static_cast<std::size_t>(paths_per_r), 0.0);
    std::vector<double> ratio_sq(static_cast<std::size_t>(paths_per_r), 0.0);
    std::vector<long> ratio_n(static_cast<std::size_t>(paths_per_r), 0);
    std::vector<char> collapsed(static_cast<std::size_t>(paths_per_r), 0);
    parallel_paths(paths_per_r, [&](long i) {
      // same stream index at every r couples the rows path-by-path
      rng::NormalStream noise(seed, static_cast<std::uint64_t>(i));
      const BounceRecord rec =
          run_chain(r, ParticleState{0.0, 1.0, 0.0}, opt, cfg, noise);
      const auto k = static_cast<std::size_t>(i);
      for (std::size_t b = 1; b < rec.hit_speeds.size(); ++b) {
        const double y = std::log(rec.hit_speeds[b] / rec.hit_speeds[b - 1]);
        ratio_sum[k] += y;
        ratio_sq[k] += y * y;
        ++ratio_n[k];
      }
      collapsed[k] = rec.terminated == Termination::collapse ? 1 : 0;
    });
    double sum = 0.0, sq = 0.0;
    long n = 0, ncol = 0;
    for (std::size_t k = 0; k < ratio_n.size(); ++k) {
      sum += ratio_sum[k];
      sq += ratio_sq[k];
      n += ratio_n[k];
      ncol += collapsed[k];
    }
    ScanRow row;
    row.r = r;
    row.paths = paths_per_r;
    row.bounces = n;
    row.collapse_fraction =
        static_cast<double>(ncol) / static_cast<double>(paths_per_r);
    row.mean_log_ratio = n > 0 ? sum / static_cast<double>(n) : 0.0;
    row.stderr_log_ratio =
        n > 1 ? std::sqrt((sq / n - row.mean_log_ratio * row.mean_log_ratio) /
                          static_cast<double>(n - 1))
              : 0.0;
    out.rows.push_back(row);
  }

  // threshold: zero crossing of mean_log_ratio, interpolated in log r
  std::vector<const ScanRow*> sorted;
  sorted.reserve(out.rows.size());
  for (const auto& row : out.rows) sorted.push_back(&row);
  std::sort(sorted.begin(), sorted.end(),
            [](const ScanRow* a, const ScanRow* b) { return a->r < b->r; });
  out.r_c_hat = 0.0;
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    const double m0 = sorted[i]->mean_log_ratio;
    const double m1 = sorted[i + 1]->mean_log_ratio;
    if (m0 < 0.0 && m1 >= 0.0) {
      const double l0 = std::log(sorted[i]->r), l1 = std::log(sorted[i + 1]->r);
      out.r_c_hat = std::exp(l0 - m0 * (l1 - l0) / (m1 - m0));
      break;
    }
  }
  if (out.r_c_hat == 0.0) {
    // grid did not bracket the sign change: pool the per-row estimates of
    // E[log H] = mean_log_ratio - log r, weighted by ratio counts
    double acc = 0.0, wn = 0.0;
    for (const auto& row : out.rows) {
      acc += (row.mean_log_ratio - std::log(row.r)) *
             static_cast<double>(row.bounces);
      wn += static_cast<double>(row.bounces);
    }
    if (wn > 0.0) out.r_c_hat = std::exp(-acc / wn);
  }
  return out;
}

}  // namespace kfp::particle

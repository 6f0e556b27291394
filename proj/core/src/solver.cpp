#include "kfp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>
#include <utility>

#include <json.hpp>

#include "kfp/errors.hpp"
#include "kfp/exponents.hpp"
#include "kfp/profiles.hpp"

namespace kfp::solver {

namespace {

constexpr double kPi = std::numbers::pi_v<double>;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::vector<double> geometric_nodes(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  const double span = std::log(hi / lo);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = lo * std::exp(span * static_cast<double>(i) /
                           static_cast<double>(n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

// cell widths from midpoint interfaces; first_interface anchors the left end
std::vector<double> midpoint_widths(const std::vector<double>& nodes,
                                    double first_interface) {
  const std::size_t n = nodes.size();
  std::vector<double> w(n);
  double left = first_interface;
  for (std::size_t i = 0; i < n; ++i) {
    const double right = (i + 1 < n)
                             ? 0.5 * (nodes[i] + nodes[i + 1])
                             : nodes[n - 1] + 0.5 * (nodes[n - 1] - nodes[n - 2]);
    w[i] = right - left;
    left = right;
  }
  return w;
}

}  // namespace

Grid build_grid(double r, double x_max, double v_max, std::size_t n_x,
                std::size_t n_v, double x_min, double v_min) {
  if (!(r > 0.0) || r > 1.0)
    throw ConfigError("restitution must lie in (0, 1], got " +
                      std::to_string(r));
  if (n_x < 2 || n_v < 2)
    throw ConfigError("grid needs at least two nodes per axis");
  if (!(x_max > 0.0) || !(v_max > 0.0))
    throw ConfigError("domain extents must be positive");
  if (x_min == 0.0) x_min = 1e-4 * x_max;
  if (v_min == 0.0) v_min = 1e-2 * v_max;
  if (!(x_min > 0.0) || !(x_min < x_max) || !(v_min > 0.0) || !(v_min < v_max))
    throw ConfigError("inner grid scales must satisfy 0 < min < max");

  Grid g;
  g.r = r;
  g.n_pairs = n_v;
  const std::vector<double> u = geometric_nodes(v_min, v_max, n_v);
  g.v.resize(2 * n_v);
  for (std::size_t k = 0; k < n_v; ++k) {
    g.v[n_v - 1 - k] = -u[k];
    g.v[n_v + k] = r * u[k];  // paired node, exactly r times the partner
  }
  for (std::size_t k = 0; k + 1 < g.v.size(); ++k)
    if (!(g.v[k] < g.v[k + 1]))
      throw ConfigError("velocity pairing produced non-monotone nodes");

  g.x = geometric_nodes(x_min, x_max, n_x);
  g.xw = midpoint_widths(g.x, 0.0);  // first interface is the wall
  g.vw = midpoint_widths(g.v, g.v[0] - 0.5 * (g.v[1] - g.v[0]));
  return g;
}

double cfl_limit(const Grid& g) {
  const double w_min = *std::min_element(g.xw.begin(), g.xw.end());
  const double v_top = std::max(-g.v.front(), g.v.back());
  return w_min / v_top;
}

double initial_density(const InitialData& init, double x, double v) {
  return std::visit(
      overloaded{
          [&](const GaussianBlob& b) {
            const double dx = (x - b.x0) / b.sx;
            const double dv = (v - b.v0) / b.sv;
            return std::exp(-0.5 * (dx * dx + dv * dv)) /
                   (2.0 * kPi * b.sx * b.sv);
          },
          [&](const FreeKernel& kern) {
            // covariance [[2/3 t^3, t^2], [t^2, 2t]], determinant t^4 / 3
            const double t = kern.t0;
            const double dx = x - kern.x0;
            const double q = 3.0 * dx * dx / (t * t * t) -
                             3.0 * dx * v / (t * t) + v * v / t;
            return std::sqrt(3.0) / (2.0 * kPi * t * t) * std::exp(-q);
          },
          [&](const ProfileCutoff& pc) {
            const double u = std::abs(v);
            if (x + u * u * u > pc.rho_max) return 0.0;
            return profiles::g_gamma(pc.gamma, {x, v});
          },
      },
      init);
}

SolverState initialize(const Grid& g, const InitialData& init) {
  SolverState s;
  const std::size_t nx = g.nx(), nv = g.nv();
  s.p.assign(nx * nv, 0.0);
  double mass = 0.0;
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t k = 0; k < nv; ++k) {
      if (g.excised(i, k)) continue;
      const double val = initial_density(init, g.x[i], g.v[k]);
      s.at(i, k, nv) = val;
      mass += val * g.xw[i] * g.vw[k];
    }
  if (!(mass > 0.0))
    throw ConfigError("initial data carries no mass on the active grid");
  for (double& val : s.p) val /= mass;
  return apply_wall_bc(std::move(s), g);
}

SolverState apply_wall_bc(SolverState state, const Grid& g) {
  state.wall_in.assign(g.nv(), 0.0);
  const double gain = 1.0 / (g.r * g.r);
  for (std::size_t k = 0; k < g.n_pairs; ++k)  // outgoing rows v = -u
    state.wall_in[g.pair(k)] = gain * state.at(0, k, g.nv());
  return state;
}

double interior_mass(const SolverState& state, const Grid& g) {
  const std::size_t nx = g.nx(), nv = g.nv();
  double mass = 0.0;
  for (std::size_t i = 0; i < nx; ++i) {
    double row = 0.0;
    for (std::size_t k = 0; k < nv; ++k) row += state.at(i, k, nv) * g.vw[k];
    mass += row * g.xw[i];
  }
  return mass;
}

SolverState advance(SolverState state, const Grid& g, double dt,
                    bool seal_wall) {
  const std::size_t nx = g.nx(), nv = g.nv();
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  if (dt > cfl_limit(g) * (1.0 + 1e-9))
    throw ConfigError("time step " + std::to_string(dt) +
                      " violates the transport bound " +
                      std::to_string(cfl_limit(g)));

  const std::vector<double> p = state.p;  // donor values of this step
  std::vector<double>& pn = state.p;
  double booked = 0.0, edge = 0.0;

  // explicit donor-cell transport in x.  Outgoing rows (v < 0) first: their
  // wall outflow re-enters at the paired incoming row as an exact mass
  // transfer, or goes to the ledger when the receiving cell is excised.
  for (std::size_t k = 0; k < nv; ++k) {
    const double vel = g.v[k];
    const double du = g.vw[k];
    const double speed = std::abs(vel);
    if (vel < 0.0) {
      for (std::size_t i = 0; i < nx; ++i) {
        const double donor = p[i * nv + k];
        if (donor == 0.0 || g.excised(i, k)) continue;
        const double out = speed * dt * du * donor;  // mass leaving left
        pn[i * nv + k] -= out / (g.xw[i] * du);
        if (i == 0) {
          if (seal_wall) {
            pn[k] += out / (g.xw[0] * du);  // put it back: zero-flux wall
          } else {
            const std::size_t kp = g.pair(k);
            if (g.excised(0, kp))
              booked += out;
            else
              pn[kp] += out / (g.xw[0] * g.vw[kp]);
          }
        } else if (g.excised(i - 1, k)) {
          booked += out;
        } else {
          pn[(i - 1) * nv + k] += out / (g.xw[i - 1] * du);
        }
      }
    } else {
      for (std::size_t i = 0; i < nx; ++i) {
        const double donor = p[i * nv + k];
        if (donor == 0.0) continue;
        const double out = speed * dt * du * donor;  // mass leaving right
        pn[i * nv + k] -= out / (g.xw[i] * du);
        if (i + 1 < nx)  // the excised set is left-contiguous per row
          pn[(i + 1) * nv + k] += out / (g.xw[i + 1] * du);
        else
          edge += out;
      }
    }
  }

  // implicit backward-Euler diffusion in v, column by column, on contiguous
  // active velocity blocks.  Global ends are sealed; a block end that abuts
  // an excised cell leaks across a zero-value interface into the corner.
  std::vector<double> sub(nv), diag(nv), sup(nv), rhs(nv);
  for (std::size_t i = 0; i < nx; ++i) {
    std::size_t k = 0;
    while (k < nv) {
      if (g.excised(i, k)) {
        ++k;
        continue;
      }
      std::size_t b = k;
      while (b + 1 < nv && !g.excised(i, b + 1)) ++b;
      const std::size_t len = b - k + 1;
      bool leaks = false;
      double before = 0.0;
      for (std::size_t j = 0; j < len; ++j) {
        const std::size_t kk = k + j;
        double d = 1.0, lo = 0.0, hi = 0.0;
        if (kk > 0) {
          const double c = dt / (g.vw[kk] * (g.v[kk] - g.v[kk - 1]));
          d += c;
          if (kk > k)
            lo = -c;  // coupled neighbour
          else
            leaks = true;  // excised below: Dirichlet-zero interface
        }
        if (kk + 1 < nv) {
          const double c = dt / (g.vw[kk] * (g.v[kk + 1] - g.v[kk]));
          d += c;
          if (kk < b)
            hi = -c;
          else
            leaks = true;
        }
        sub[j] = lo;
        diag[j] = d;
        sup[j] = hi;
        rhs[j] = pn[i * nv + kk];
        before += g.vw[kk] * rhs[j];
      }
      for (std::size_t j = 1; j < len; ++j) {
        const double w = sub[j] / diag[j - 1];
        diag[j] -= w * sup[j - 1];
        rhs[j] -= w * rhs[j - 1];
      }
      rhs[len - 1] /= diag[len - 1];
      for (std::size_t j = len - 1; j-- > 0;)
        rhs[j] = (rhs[j] - sup[j] * rhs[j + 1]) / diag[j];
      double after = 0.0;
      for (std::size_t j = 0; j < len; ++j) {
        pn[i * nv + k + j] = rhs[j];
        after += g.vw[k + j] * rhs[j];
      }
      if (leaks) booked += (before - after) * g.xw[i];
      k = b + 1;
    }
  }

  state.mass_ledger += booked;
  state.edge_loss += edge;
  state.t += dt;
  return apply_wall_bc(std::move(state), g);
}

OriginFit fit_origin(const SolverState& state, const Grid& g, double rho) {
  if (!(rho > 0.0)) throw ConfigError("fit radius must be positive");
  const double alpha = exponents::alpha_of_r(g.r);
  const double m23 = -2.0 / 3.0;
  const std::size_t nv = g.nv();

  double s11 = 0.0, s12 = 0.0, s22 = 0.0, r1 = 0.0, r2 = 0.0, syy = 0.0;
  std::vector<double> ys, b1s, b2s, ws;
  for (std::size_t k = 0; k < nv; ++k) {
    const double u = std::abs(g.v[k]);
    const double x_arc = rho - u * u * u;
    if (x_arc < g.x.front() || x_arc > g.x.back()) continue;
    const auto it = std::upper_bound(g.x.begin(), g.x.end(), x_arc);
    std::size_t j = static_cast<std::size_t>(it - g.x.begin());
    if (j == 0) j = 1;
    if (j == g.x.size()) --j;
    const double th = (x_arc - g.x[j - 1]) / (g.x[j] - g.x[j - 1]);
    // identical interpolation for the state and the basis: exact members of
    // the span are recovered to rounding
    const auto lerp = [&](double a, double b) { return a + th * (b - a); };
    const double y = lerp(state.at(j - 1, k, nv), state.at(j, k, nv));
    const double b1 = lerp(profiles::g_gamma(alpha, {g.x[j - 1], g.v[k]}),
                           profiles::g_gamma(alpha, {g.x[j], g.v[k]}));
    const double b2 = lerp(profiles::g_gamma(m23, {g.x[j - 1], g.v[k]}),
                           profiles::g_gamma(m23, {g.x[j], g.v[k]}));
    const double w = g.vw[k];
    ys.push_back(y);
    b1s.push_back(b1);
    b2s.push_back(b2);
    ws.push_back(w);
    s11 += w * b1 * b1;
    s12 += w * b1 * b2;
    s22 += w * b2 * b2;
    r1 += w * b1 * y;
    r2 += w * b2 * y;
    syy += w * y * y;
  }
  if (ys.size() < 8)
    throw ConfigError("fit arc at rho = " + std::to_string(rho) +
                      " crosses fewer than 8 resolved rows");

  // normalize the columns so the solve is conditioned independently of the
  // rho-scaling of the two profiles
  const double n1 = std::sqrt(s11), n2 = std::sqrt(s22);
  if (!(n1 > 0.0) || !(n2 > 0.0))
    throw ConvergenceError("degenerate profile basis on the fit arc");
  const double c12 = s12 / (n1 * n2);
  const double det = 1.0 - c12 * c12;
  if (!(det > 1e-14))
    throw ConvergenceError("profile basis is numerically parallel on the arc");
  const double q1 = r1 / n1, q2 = r2 / n2;
  OriginFit fit;
  fit.fit_radius = rho;
  fit.collinearity = std::abs(c12);
  fit.a_alpha = (q1 - c12 * q2) / det / n1;
  fit.a_m23 = (q2 - c12 * q1) / det / n2;
  // a nonnegative density cannot carry a negative amplitude on the more
  // singular of the two profiles; project onto that half-space
  if (alpha < m23 && fit.a_alpha < 0.0) {
    fit.a_alpha = 0.0;
    fit.a_m23 = r2 / s22;
    fit.constrained = true;
  } else if (alpha > m23 && fit.a_m23 < 0.0) {
    fit.a_m23 = 0.0;
    fit.a_alpha = r1 / s11;
    fit.constrained = true;
  }
  double misfit = 0.0;
  for (std::size_t s = 0; s < ys.size(); ++s) {
    const double d = ys[s] - fit.a_alpha * b1s[s] - fit.a_m23 * b2s[s];
    misfit += ws[s] * d * d;
  }
  fit.residual = syy > 0.0 ? std::sqrt(misfit / syy) : 0.0;
  fit.unreliable = fit.residual > 0.5;
  return fit;
}

namespace {

std::string mode_name(DiagnosticMode mode) {
  switch (mode) {
    case DiagnosticMode::trapping:
      return "trapping";
    case DiagnosticMode::nontrapping:
      return "nontrapping";
    case DiagnosticMode::partial:
      return "partial";
    case DiagnosticMode::supercritical:
      return "supercritical";
  }
  return "?";
}

DiagnosticMode mode_from_name(const std::string& name) {
  if (name == "trapping") return DiagnosticMode::trapping;
  if (name == "nontrapping") return DiagnosticMode::nontrapping;
  if (name == "partial") return DiagnosticMode::partial;
  if (name == "supercritical") return DiagnosticMode::supercritical;
  throw ConfigError("unknown diagnostic mode \"" + name + "\"");
}

double mode_residual(DiagnosticMode mode, double mu_star, double m,
                     const OriginFit& fit) {
  switch (mode) {
    case DiagnosticMode::trapping:
      return std::abs(fit.a_alpha);
    case DiagnosticMode::nontrapping:
    case DiagnosticMode::supercritical:
      return std::abs(fit.a_m23);
    case DiagnosticMode::partial:
      return std::abs(fit.a_alpha - mu_star * m);
  }
  return 0.0;
}

}  // namespace

void validate(const SolverConfig& cfg) {
  if (!(cfg.r > 0.0) || cfg.r > 1.0)
    throw ConfigError("restitution must lie in (0, 1]");
  const double rc = exponents::critical_r();
  if (std::abs(cfg.r - rc) < 1e-9)
    throw ConfigError("restitution sits on the degenerate threshold");
  const bool sub = cfg.r < rc;
  switch (cfg.mode) {
    case DiagnosticMode::trapping:
    case DiagnosticMode::nontrapping:
      if (!sub)
        throw ConfigError(mode_name(cfg.mode) +
                          " diagnostics need subthreshold restitution");
      break;
    case DiagnosticMode::partial:
      if (!sub)
        throw ConfigError("partial diagnostics need subthreshold restitution");
      if (cfg.mu_star < 0.0)
        throw ConfigError("equilibrium rate mu* must be nonnegative");
      break;
    case DiagnosticMode::supercritical:
      if (sub)
        throw ConfigError(
            "supercritical diagnostics need above-threshold restitution");
      break;
  }
  if (cfg.n_x < 32 || cfg.n_v < 32)
    throw ConfigError("diagnostic grids need at least 32 nodes per axis");
  if (!(cfg.x_max > 0.0) || !(cfg.v_max > 0.0))
    throw ConfigError("domain extents must be positive");
  if (!(cfg.t_final > 0.0)) throw ConfigError("final time must be positive");
  if (!(cfg.rho_cut > 0.0) || cfg.rho_cut >= cfg.x_max)
    throw ConfigError("excision radius must lie in (0, x_max)");
  if (!(cfg.rho_fit >= 2.0 * cfg.rho_cut))
    throw ConfigError("fit radius must be at least twice the excision radius");
  if (cfg.dt < 0.0) throw ConfigError("time step must be nonnegative");
  if (cfg.samples < 2) throw ConfigError("need at least two output samples");
}

DiagnosticSeries run_diagnostic(const SolverConfig& cfg) {
  validate(cfg);
  const double x_min = cfg.x_min > 0.0 ? cfg.x_min : cfg.rho_cut / 8.0;
  const double v_min =
      cfg.v_min > 0.0 ? cfg.v_min : std::cbrt(cfg.rho_cut) / 8.0;
  Grid g = build_grid(cfg.r, cfg.x_max, cfg.v_max, cfg.n_x, cfg.n_v, x_min,
                      v_min);
  g.rho_cut = cfg.rho_cut;

  SolverState s = initialize(g, cfg.init);
  double dt = cfg.dt > 0.0 ? cfg.dt : 0.9 * cfl_limit(g);
  const long n_steps = std::max(1L, static_cast<long>(std::ceil(
                                        cfg.t_final / dt - 1e-12)));
  dt = cfg.t_final / static_cast<double>(n_steps);

  DiagnosticSeries series;
  series.r = cfg.r;
  series.mode = cfg.mode;
  const auto record = [&]() {
    const OriginFit fit = fit_origin(s, g, cfg.rho_fit);
    DiagnosticRow row;
    row.t = s.t;
    row.total_mass = interior_mass(s, g);
    row.m = s.mass_ledger;
    row.a_alpha = fit.a_alpha;
    row.a_m23 = fit.a_m23;
    row.fit_residual = fit.residual;
    row.mode_residual = mode_residual(cfg.mode, cfg.mu_star, row.m, fit);
    series.rows.push_back(row);
  };

  const auto due_step = [&](long sample) {
    return std::lround(static_cast<double>(sample) *
                       static_cast<double>(n_steps) /
                       static_cast<double>(cfg.samples - 1));
  };
  record();
  long next_sample = 1;
  while (next_sample + 1 < static_cast<long>(cfg.samples) &&
         due_step(next_sample) == 0)
    ++next_sample;  // coarse runs: several samples can land on one step
  for (long step = 1; step <= n_steps; ++step) {
    s = advance(std::move(s), g, dt);
    if (step == due_step(next_sample) || step == n_steps) {
      record();
      do {
        ++next_sample;
      } while (next_sample + 1 < static_cast<long>(cfg.samples) &&
               due_step(next_sample) <= step);
    }
  }
  series.edge_loss = s.edge_loss;
  return series;
}

void write_csv(const DiagnosticSeries& series, std::ostream& os) {
  os << "t,total_mass,m,a_alpha,a_m23,fit_residual,mode_residual\n";
  char line[512];
  for (const DiagnosticRow& row : series.rows) {
    std::snprintf(line, sizeof line,
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", row.t,
                  row.total_mass, row.m, row.a_alpha, row.a_m23,
                  row.fit_residual, row.mode_residual);
    os << line;
  }
}

std::string to_json(const SolverConfig& cfg) {
  nlohmann::json j;
  j["r"] = cfg.r;
  j["mode"] = mode_name(cfg.mode);
  j["mu_star"] = cfg.mu_star;
  j["x_max"] = cfg.x_max;
  j["v_max"] = cfg.v_max;
  j["n_x"] = cfg.n_x;
  j["n_v"] = cfg.n_v;
  j["dt"] = cfg.dt;
  j["t_final"] = cfg.t_final;
  j["rho_cut"] = cfg.rho_cut;
  j["rho_fit"] = cfg.rho_fit;
  j["x_min"] = cfg.x_min;
  j["v_min"] = cfg.v_min;
  j["samples"] = cfg.samples;
  std::visit(overloaded{
                 [&](const GaussianBlob& b) {
                   j["init"] = {{"kind", "gaussian"}, {"x0", b.x0},
                                {"v0", b.v0},         {"sx", b.sx},
                                {"sv", b.sv}};
                 },
                 [&](const FreeKernel& k) {
                   j["init"] = {
                       {"kind", "kernel"}, {"t0", k.t0}, {"x0", k.x0}};
                 },
                 [&](const ProfileCutoff& p) {
                   j["init"] = {{"kind", "profile"},
                                {"gamma", p.gamma},
                                {"rho_max", p.rho_max}};
                 },
             },
             cfg.init);
  return j.dump(2);
}

SolverConfig config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad solver config: ") + e.what());
  }
  SolverConfig cfg;
  try {
    cfg.r = j.value("r", cfg.r);
    if (j.contains("mode")) cfg.mode = mode_from_name(j.at("mode"));
    cfg.mu_star = j.value("mu_star", cfg.mu_star);
    cfg.x_max = j.value("x_max", cfg.x_max);
    cfg.v_max = j.value("v_max", cfg.v_max);
    cfg.n_x = j.value("n_x", cfg.n_x);
    cfg.n_v = j.value("n_v", cfg.n_v);
    cfg.dt = j.value("dt", cfg.dt);
    cfg.t_final = j.value("t_final", cfg.t_final);
    cfg.rho_cut = j.value("rho_cut", cfg.rho_cut);
    cfg.rho_fit = j.value("rho_fit", cfg.rho_fit);
    cfg.x_min = j.value("x_min", cfg.x_min);
    cfg.v_min = j.value("v_min", cfg.v_min);
    cfg.samples = j.value("samples", cfg.samples);
    if (j.contains("init")) {
      const auto& ji = j.at("init");
      const std::string kind = ji.value("kind", "gaussian");
      if (kind == "gaussian") {
        GaussianBlob b;
        b.x0 = ji.value("x0", b.x0);
        b.v0 = ji.value("v0", b.v0);
        b.sx = ji.value("sx", b.sx);
        b.sv = ji.value("sv", b.sv);
        cfg.init = b;
      } else if (kind == "kernel") {
        FreeKernel k;
        k.t0 = ji.value("t0", k.t0);
        k.x0 = ji.value("x0", k.x0);
        cfg.init = k;
      } else if (kind == "profile") {
        ProfileCutoff p;
        p.gamma = ji.value("gamma", p.gamma);
        p.rho_max = ji.value("rho_max", p.rho_max);
        cfg.init = p;
      } else {
        throw ConfigError("unknown initial-data kind \"" + kind + "\"");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad solver config: ") + e.what());
  }
  return cfg;
}

}  // namespace kfp::solver

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <doctest.h>

#include "kfp/errors.hpp"
#include "kfp/lattice.hpp"

using namespace kfp;
using namespace kfp::lattice;

namespace {

LatticeConfig make_cfg(double h, WallRule rule, double x0) {
  LatticeConfig cfg;
  cfg.h = h;
  cfg.rule = rule;
  cfg.init = point_mass_init(x0, h);
  return cfg;
}

double estimate_mass(const DensityEstimate& est) {
  double mass = est.origin_mass;
  for (double u : est.u) mass += est.h * u;
  return mass;
}

}  // namespace

TEST_CASE("step_lattice: exact one-step updates") {
  LatticeConfig cfg = make_cfg(0.1, WallRule::trapping(), 0.0);

  SUBCASE("interior split is exactly half-half") {
    LatticeState s{{0.0, 1.0, 0.0, 0.0, 0.0}, 0};
    const LatticeState n = step_lattice(s, cfg);
    CHECK(n.k == 1);
    CHECK(n.occupancy[0] == 0.5);
    CHECK(n.occupancy[1] == 0.0);
    CHECK(n.occupancy[2] == 0.5);
    CHECK(n.occupancy[3] == 0.0);
  }

  SUBCASE("full escape moves the wall mass up") {
    cfg.rule = WallRule::nontrapping(1.0);
    LatticeState s{{1.0, 0.0, 0.0, 0.0}, 0};
    const LatticeState n = step_lattice(s, cfg);
    CHECK(n.occupancy[0] == 0.0);
    CHECK(n.occupancy[1] == 1.0);
  }

  SUBCASE("trapping keeps the wall mass put") {
    LatticeState s{{1.0, 0.0, 0.0, 0.0}, 0};
    const LatticeState n = step_lattice(s, cfg);
    CHECK(n.occupancy[0] == 1.0);
  }
}

TEST_CASE("synchronous update conserves mass and positivity") {
  const std::vector<WallRule> rules{WallRule::trapping(),
                                    WallRule::nontrapping(0.5),
                                    WallRule::partial(1.0)};
  for (const WallRule& rule : rules) {
    LatticeConfig cfg = make_cfg(0.01, rule, 0.5);
    LatticeState s;
    s.occupancy.assign(1101, 0.0);
    s.occupancy[50] = 1.0;
    for (int k = 0; k < 10000; ++k) s = step_lattice(s, cfg);
    CHECK(s.k == 10000);
    const double mass =
        std::accumulate(s.occupancy.begin(), s.occupancy.end(), 0.0);
    CHECK(std::abs(mass - 1.0) <= 1e-12);
    CHECK(*std::min_element(s.occupancy.begin(), s.occupancy.end()) >= 0.0);
  }
}

TEST_CASE("trapping walk converges to the absorbing-wall image solution") {
  const LatticeConfig cfg = make_cfg(0.01, WallRule::trapping(), 1.0);
  const ToyComparison cmp = compare_to_continuum(cfg, 0.5, 1.0);
  CHECK(cmp.l1_gap < 0.02);   // contract bound
  CHECK(cmp.l1_gap < 3e-4);   // regression bound (measured 7e-5)
  CHECK(cmp.m_ref == doctest::Approx(std::erfc(1.0)).epsilon(1e-12));
  CHECK(std::abs(cmp.lattice.origin_mass - cmp.m_ref) < 5e-4);
  CHECK(std::abs(estimate_mass(cmp.lattice) - 1.0) < 1e-12);
}

TEST_CASE("escaping walk converges to the reflecting-wall image solution") {
  const LatticeConfig cfg = make_cfg(0.01, WallRule::nontrapping(1.0), 1.0);
  const ToyComparison cmp = compare_to_continuum(cfg, 0.5, 1.0);
  CHECK(cmp.l1_gap < 0.02);
  CHECK(cmp.l1_gap < 3e-4);  // measured 8e-5
  CHECK(cmp.m_ref == 0.0);
  CHECK(cmp.lattice.origin_mass < 0.005);

  // the residual wall atom is a lattice artifact of size O(h)
  const LatticeConfig half = make_cfg(0.005, WallRule::nontrapping(1.0), 1.0);
  const ToyComparison cmp2 = compare_to_continuum(half, 0.5, 1.0);
  CHECK(cmp2.lattice.origin_mass ==
        doctest::Approx(0.5 * cmp.lattice.origin_mass).epsilon(0.1));
}

TEST_CASE("partially trapping walk equilibrates the wall atom") {
  const double mu = 1.0;
  const LatticeConfig cfg = make_cfg(0.01, WallRule::partial(mu), 1.0);
  const ToyComparison cmp = compare_to_continuum(cfg, 0.5, 1.0);

  // atom in equilibrium with the neighbouring density: m = U(0) / (2 mu)
  const double m_h = cmp.lattice.origin_mass;
  const double wall_density = cmp.lattice.u.front();
  CHECK(std::abs(m_h - wall_density / (2.0 * mu)) < 0.05 * m_h);
  CHECK(std::abs(m_h - wall_density / (2.0 * mu)) < 0.03 * m_h);  // measured 2%

  // gap to the exchange-wall continuum reference
  CHECK(cmp.l1_gap < 0.01);  // measured 0.0011
  CHECK(std::abs(m_h - cmp.m_ref) < 2e-3);
}

TEST_CASE("wall atom is monotone in the escape probability") {
  std::vector<double> atoms;
  const std::vector<WallRule> ladder{
      WallRule::trapping(), WallRule::nontrapping(0.25),
      WallRule::nontrapping(0.5), WallRule::nontrapping(1.0)};
  for (const WallRule& rule : ladder) {
    const LatticeConfig cfg = make_cfg(0.01, rule, 1.0);
    atoms.push_back(diffusive_limit(cfg, 0.5).origin_mass);
  }
  for (std::size_t i = 0; i + 1 < atoms.size(); ++i)
    CHECK(atoms[i] > atoms[i + 1]);
  CHECK(atoms.front() > 0.15);   // measured 0.1573
  CHECK(atoms.back() < 0.0025);  // measured 0.0021
}

TEST_CASE("density gap to the continuum shrinks when the lattice refines") {
  const std::vector<WallRule> rules{WallRule::trapping(),
                                    WallRule::nontrapping(1.0),
                                    WallRule::partial(1.0)};
  for (const WallRule& rule : rules) {
    std::vector<double> gaps;
    for (double h : {0.02, 0.01, 0.005}) {
      const LatticeConfig cfg = make_cfg(h, rule, 1.0);
      gaps.push_back(compare_to_continuum(cfg, 0.5, 1.0).l1_gap);
    }
    CHECK(gaps[0] > gaps[1]);
    CHECK(gaps[1] > gaps[2]);
  }
}

TEST_CASE("wall-exchange continuum reference") {
  const RobinSolution ref = robin_reference(1.0, 1.0, 0.5);
  CHECK(ref.err_estimate < 1e-3);
  CHECK(ref.origin_mass == doctest::Approx(0.094164).epsilon(2e-3));

  // conservation ledger: atom plus cell masses stay at exactly one
  double total = ref.origin_mass;
  for (double u : ref.u) total += ref.delta * u;
  CHECK(std::abs(total - 1.0) < 1e-9);

  SUBCASE("large exchange rate approaches the reflecting wall") {
    const RobinSolution fast = robin_reference(1000.0, 1.0, 0.5);
    double l1 = 0.0;
    for (std::size_t j = 0; j < fast.x.size(); ++j)
      l1 += fast.delta *
            std::abs(fast.u[j] - neumann_reference(fast.x[j], 1.0, 0.5));
    CHECK(l1 < 0.01);   // contract bound
    CHECK(l1 < 0.005);  // measured 0.0015
    CHECK(fast.origin_mass < 1e-3);
  }

  SUBCASE("zero exchange rate degenerates to the absorbing wall") {
    const RobinSolution none = robin_reference(0.0, 1.0, 0.5);
    double l1 = 0.0;
    for (std::size_t j = 0; j < none.x.size(); ++j)
      l1 += none.delta *
            std::abs(none.u[j] - dirichlet_reference(none.x[j], 1.0, 0.5));
    CHECK(l1 < 1e-3);  // measured 1.2e-4
    CHECK(std::abs(none.origin_mass - dirichlet_origin_mass(1.0, 0.5)) < 1e-3);
  }

  SUBCASE("atom mass is monotone in the exchange rate") {
    const double m0 = robin_reference(0.0, 1.0, 0.5).origin_mass;
    const double m1 = ref.origin_mass;
    const double m2 = robin_reference(1000.0, 1.0, 0.5).origin_mass;
    CHECK(m0 > m1);
    CHECK(m1 > m2);
  }
}

TEST_CASE("configuration guards") {
  CHECK_THROWS_AS(WallRule::nontrapping(0.0), ConfigError);
  CHECK_THROWS_AS(WallRule::nontrapping(1.5), ConfigError);
  CHECK_THROWS_AS(WallRule::partial(-1.0), ConfigError);
  CHECK_THROWS_AS(point_mass_init(-1.0, 0.1), ConfigError);
  CHECK_THROWS_AS(point_mass_init(1.0, 0.0), ConfigError);

  LatticeConfig cfg = make_cfg(0.01, WallRule::trapping(), 1.0);

  SUBCASE("nonpositive spacing") {
    cfg.h = 0.0;
    CHECK_THROWS_AS(validate(cfg), ConfigError);
  }
  SUBCASE("escape probability above one in partial mode") {
    cfg.rule = WallRule::partial(1000.0);  // lambda = mu h = 10
    CHECK_THROWS_AS(validate(cfg), ConfigError);
  }
  SUBCASE("empty, negative, or non-unit init") {
    cfg.init.clear();
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    cfg.init = {0.5, -0.5, 1.0};
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    cfg.init = {0.25, 0.25};
    CHECK_THROWS_AS(validate(cfg), ConfigError);
  }
  SUBCASE("time must be a whole number of steps") {
    CHECK_THROWS_AS(diffusive_limit(cfg, 0.5 + 0.3 * cfg.h * cfg.h),
                    ConfigError);
    CHECK_THROWS_AS(diffusive_limit(cfg, -0.5), ConfigError);
  }
  SUBCASE("reference guards") {
    CHECK_THROWS_AS(robin_reference(-1.0, 1.0, 0.5), ConfigError);
    CHECK_THROWS_AS(robin_reference(1.0, 1.0, -0.5), ConfigError);
    CHECK_THROWS_AS(robin_reference(1.0, 1.0, 0.5, 0.0), ConfigError);
  }
}

#include <doctest.h>

#include <cmath>

#include "kfp/errors.hpp"
#include "kfp/exponents.hpp"
#include "kfp/fluxes.hpp"

using namespace kfp;
using namespace kfp::fluxes;
using exponents::alpha_of_r;
using exponents::c_star_closed;
using exponents::critical_r;

namespace {
constexpr double kPi = 3.14159265358979323846;

double rel_gap(double got, double want) {
  return std::abs(got - want) / std::max(1e-300, std::abs(want));
}
}  // namespace

TEST_CASE("flux constants bundle") {
  const auto fc = flux_constants(0.1);
  CHECK(rel_gap(fc.mass_flux, std::pow(9.0, 2.0 / 3.0) * (std::log(0.1) + kPi / std::sqrt(3.0))) <
        1e-14);
  CHECK(fc.kappa == -fc.mass_flux);
  CHECK(fc.c_star < 0.0);
  CHECK(std::isnan(flux_constants(0.5).c_star));
  CHECK_THROWS_AS(flux_constants(0.0), DomainError);
}

TEST_CASE("moment of the slice profile converges to pi/sqrt(3)") {
  CHECK(zeta_lambda_moment(0.0) == 0.0);
  const double target = kPi / std::sqrt(3.0);
  CHECK(std::abs(zeta_lambda_moment(100.0) - target) < 1e-2);
  // Cauchy decrease of the truncation gap
  const double g50 = std::abs(zeta_lambda_moment(50.0) - zeta_lambda_moment(100.0));
  const double g100 = std::abs(zeta_lambda_moment(100.0) - zeta_lambda_moment(200.0));
  CHECK(g100 < g50);
  CHECK_THROWS_AS(zeta_lambda_moment(2e3), DomainError);
}

TEST_CASE("boundary flux of the mass-carrying profile: closed-form rate") {
  for (double r : {0.05, 0.10, 0.5}) {
    const double want = std::pow(9.0, 2.0 / 3.0) * (std::log(r) + kPi / std::sqrt(3.0));
    const double got = boundary_flux(-2.0 / 3.0, FluxBox{1.0, 1.0, r});
    CHECK(rel_gap(got, want) < 1e-3);
  }
  // frozen spot value at r = 0.10, delta = b = 1
  CHECK(rel_gap(boundary_flux(-2.0 / 3.0, FluxBox{1.0, 1.0, 0.10}), -2.114853) < 1e-3);
  // vanishes at the critical coefficient
  CHECK(std::abs(boundary_flux(-2.0 / 3.0, FluxBox{1.0, 1.0, critical_r()})) < 1e-3);
  CHECK_THROWS_AS(boundary_flux(-2.0 / 3.0, FluxBox{0.0, 1.0, 0.1}), DomainError);
}

TEST_CASE("boundary flux: sign follows the restitution coefficient") {
  for (double r : {0.03, 0.08, 0.13}) CHECK(boundary_flux(-2.0 / 3.0, FluxBox{1.0, 1.0, r}) < 0.0);
  for (double r : {0.2, 0.5, 0.9, 2.0}) CHECK(boundary_flux(-2.0 / 3.0, FluxBox{1.0, 1.0, r}) > 0.0);
}

TEST_CASE("boundary flux of the equilibrium-exponent profile vanishes") {
  const double r = 0.10;
  const auto fs = boundary_flux_detail(alpha_of_r(r), FluxBox{1.0, 1.0, r});
  CHECK(fs.scale > 0.0);
  CHECK(std::abs(fs.flux) < 1e-6 * fs.scale);
}

TEST_CASE("flux is independent of the box shape") {
  const double r = 0.1;
  SUBCASE("mass-carrying exponent: relative spread") {
    const auto chk = box_independence_check(-2.0 / 3.0, r);
    CHECK(chk.max_rel_spread < 1e-3);
    const double want = std::pow(9.0, 2.0 / 3.0) * (std::log(r) + kPi / std::sqrt(3.0));
    CHECK(rel_gap(chk.mean, want) < 1e-3);
  }
  SUBCASE("equilibrium exponent: all nine boxes vanish after normalization") {
    const auto chk = box_independence_check(alpha_of_r(r), r);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        CHECK(std::abs(chk.values[i][j]) < 1e-6 * chk.scales[i][j]);
  }
}

TEST_CASE("pairing constant by quadrature agrees with the closed form") {
  for (double r : {0.03, 0.05, 0.08, 0.10, 0.13, 0.15}) {
    const double q = c_star_quadrature(r, 200.0);
    CHECK(q < 0.0);
    CHECK(rel_gap(q, c_star_closed(r)) < 1e-3);
  }
  CHECK_THROWS_AS(c_star_quadrature(0.3, 200.0), DomainError);
  CHECK_THROWS_AS(c_star_quadrature(0.1, 10.0), DomainError);
}

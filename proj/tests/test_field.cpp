#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "isochrone/field.hpp"
#include "isochrone/models.hpp"

using namespace isochrone;
using std::numbers::pi;

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1.0);
  return v;
}

InitialProfile constant_profile(double f_val, double x_lo, double x_hi, int N_x) {
  InitialProfile p;
  p.Y0 = [f_val](double) { return (Vec(2) << 0.0, f_val).finished(); };
  p.Y0_prime = [](double) { return Vec::Zero(2).eval(); };
  p.x_lo = x_lo;
  p.x_hi = x_hi;
  p.N_x = N_x;
  return p;
}

}  // namespace

TEST_CASE("plasma d=1 with a constant profile stays smooth and ordered") {
  const SystemDef sys = models::plasma_radial(1);
  const InitialProfile profile = constant_profile(0.1, 0.5, 2.0, 12);
  IntegratorConfig cfg;
  auto snaps = reconstruct_field(sys, profile, linspace(5.0, 100.0, 20), cfg);
  for (const auto& s : snaps) {
    CHECK(s.ordered);
    for (const auto& c : s.chars) {
      REQUIRE(c.alive);
      CHECK(c.q > 0.0);
    }
  }
}

TEST_CASE("hopf with profile Y0(x) = x: every characteristic hits q = 0 at 3 pi/4") {
  SystemDef sys = models::hopf_potential();
  InitialProfile p;
  p.Y0 = [](double x) { return Vec::Constant(1, x).eval(); };
  p.Y0_prime = [](double) { return Vec::Constant(1, 1.0).eval(); };
  p.x_lo = 0.5;
  p.x_hi = 1.5;
  p.N_x = 8;
  IntegratorConfig cfg;
  // q(t) = cos t + sin t per seed: positive just before 3 pi/4, negative after
  auto snaps = reconstruct_field(sys, p, {3 * pi / 4 - 0.1, 3 * pi / 4 + 0.1}, cfg);
  for (const auto& c : snaps[0].chars) CHECK(c.q > 0.0);
  for (const auto& c : snaps[1].chars) CHECK(c.q < 0.0);
}

TEST_CASE("zero profile: characteristics stand still") {
  const SystemDef sys = models::plasma_radial(3);
  const InitialProfile p = constant_profile(0.0, 0.5, 2.0, 5);
  IntegratorConfig cfg;
  auto snaps = reconstruct_field(sys, p, {1.0, 10.0}, cfg);
  const auto seeds = p.seeds();
  for (const auto& s : snaps) {
    for (int i = 0; i < p.N_x; ++i) {
      CHECK(s.chars[i].X == Catch::Approx(seeds[i]).margin(1e-10));
      CHECK(s.chars[i].Y.cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("isochronous model: snapshots at multiples of T reproduce the profile") {
  const SystemDef sys = models::plasma_radial(1);
  InitialProfile p;
  p.Y0 = [](double x) { return (Vec(2) << 0.0, 0.1 * std::exp(-x * x)).finished(); };
  p.x_lo = -1.0;
  p.x_hi = 1.0;
  p.N_x = 9;
  IntegratorConfig cfg;
  std::vector<double> t_grid;
  for (int k = 1; k <= 5; ++k) t_grid.push_back(2.0 * pi * k);
  auto snaps = reconstruct_field(sys, p, t_grid, cfg);
  const auto seeds = p.seeds();
  for (const auto& s : snaps) {
    for (int i = 0; i < p.N_x; ++i) {
      INFO("t=" << s.t << " seed " << seeds[i]);
      CHECK(s.chars[i].X == Catch::Approx(seeds[i]).margin(1e-5));
      CHECK((s.chars[i].Y - p.Y0(seeds[i])).cwiseAbs().maxCoeff() < 1e-5);
    }
  }
}

TEST_CASE("hopf with linear profile: gap and q signals coincide at 3 pi/4") {
  SystemDef sys = models::hopf_potential();
  InitialProfile p;
  p.Y0 = [](double x) { return Vec::Constant(1, x).eval(); };
  p.Y0_prime = [](double) { return Vec::Constant(1, 1.0).eval(); };
  p.x_lo = 0.5;
  p.x_hi = 1.5;
  p.N_x = 8;
  IntegratorConfig cfg;
  CrossingReport rep = detect_crossing(sys, p, 4.0, cfg, 0.02);
  REQUIRE(rep.found);
  // X_i(t) = x_i (cos t + sin t): all characteristics collide at the zero
  CHECK(rep.t_cross == Catch::Approx(3 * pi / 4).margin(1e-6));
  REQUIRE(rep.t_q_zero);
  CHECK(rep.signals_agree);
  CHECK(std::abs(*rep.t_q_zero - rep.t_cross) < 0.05);
}

TEST_CASE("constant profile on plasma d=2: no crossing, no q zero") {
  const SystemDef sys = models::plasma_radial(2);
  const InitialProfile p = constant_profile(0.15, 0.5, 2.0, 8);
  IntegratorConfig cfg;
  CrossingReport rep = detect_crossing(sys, p, 30.0, cfg, 0.05);
  CHECK_FALSE(rep.found);
  CHECK_FALSE(rep.t_q_zero.has_value());
  CHECK(rep.signals_agree);
}

TEST_CASE("plasma d=1 Gaussian profile: no crossing over a long horizon") {
  const SystemDef sys = models::plasma_radial(1);
  InitialProfile p;
  p.Y0 = [](double x) { return (Vec(2) << 0.0, 0.2 * std::exp(-x * x)).finished(); };
  p.x_lo = -3.0;
  p.x_hi = 3.0;
  p.N_x = 16;
  IntegratorConfig cfg;
  cfg.rtol = 1e-9;
  CrossingReport rep = detect_crossing(sys, p, 50.0, cfg, 0.05);
  CHECK_FALSE(rep.found);
  CHECK(rep.signals_agree);
}

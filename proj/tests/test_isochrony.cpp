#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "isochrone/isochrony.hpp"
#include "isochrone/models.hpp"

using namespace isochrone;
using std::numbers::pi;

namespace {

IntegratorConfig cfg_default() {
  IntegratorConfig cfg;
  cfg.t_max = 40.0;
  return cfg;
}

}  // namespace

TEST_CASE("period map of plasma d=4 is flat at 2 pi") {
  const SystemDef sys = models::plasma_radial(4);
  PeriodMap pm = period_map(sys, Family::amplitude(1.0, 2), 0.05, 0.3, 6, cfg_default());
  REQUIRE(pm.entries.size() == 6);
  for (const auto& e : pm.entries) {
    CHECK_FALSE(e.no_return);
    CHECK(e.closed);
    CHECK(e.T == Catch::Approx(2.0 * pi).margin(1e-6));
  }
  CHECK(pm.spread() < 1e-6);
}

TEST_CASE("period map of plasma d=2 has visible spread") {
  const SystemDef sys = models::plasma_radial(2);
  PeriodMap pm = period_map(sys, Family::amplitude(1.0, 2), 0.05, 0.3, 6, cfg_default());
  CHECK(pm.spread() >= 1e-3);
}

TEST_CASE("family parameters are strictly increasing") {
  const SystemDef sys = models::plasma_radial(1);
  PeriodMap pm = period_map(sys, Family::amplitude(1.0, 2), 0.05, 0.3, 5, cfg_default());
  for (std::size_t i = 1; i < pm.entries.size(); ++i) {
    CHECK(pm.entries[i].h > pm.entries[i - 1].h);
  }
}

TEST_CASE("period_derivative: isochronous map has vanishing T'") {
  const SystemDef sys = models::plasma_radial(1);
  PeriodMap pm = period_map(sys, Family::amplitude(1.0, 2), 0.05, 0.3, 6, cfg_default());
  for (auto [h, dT] : period_derivative(pm)) {
    INFO("h=" << h);
    CHECK(std::abs(dT) <= 1e-5);
  }
}

TEST_CASE("period_derivative: relativistic period is strictly increasing") {
  const SystemDef sys = models::relativistic_plasma_const(1.0);
  // momentum-amplitude family: Y0 = (h, 0) at x0 = 0
  Family fam;
  fam.initial = [](double h) { return std::pair<double, Vec>{0.0, (Vec(2) << h, 0.0).finished()}; };
  fam.description = "P-amplitude";
  PeriodMap pm = period_map(sys, fam, 0.5, 1.5, 7, cfg_default(), 1e-4);
  auto deriv = period_derivative(pm);
  for (std::size_t i = 1; i + 1 < deriv.size(); ++i) {
    CHECK(deriv[i].second > 0.0);
  }
}

TEST_CASE("period_derivative: constant synthetic table gives exactly zero") {
  PeriodMap pm;
  for (int i = 0; i < 5; ++i) pm.entries.push_back({0.1 * (i + 1), 5.0, 0.0, true, false});
  for (auto [h, dT] : period_derivative(pm)) CHECK(dT == 0.0);
}

TEST_CASE("period_derivative needs at least three entries") {
  PeriodMap pm;
  pm.entries.push_back({0.1, 5.0, 0.0, true, false});
  pm.entries.push_back({0.2, 5.0, 0.0, true, false});
  CHECK_THROWS_AS(period_derivative(pm), InsufficientPoints);
}

TEST_CASE("monodromy of hopf (harmonic oscillator) is the identity") {
  const SystemDef sys = models::hopf_potential();
  MonodromyResult m = monodromy(sys, 0.5, Vec::Zero(1), cfg_default());
  CHECK(m.T == Catch::Approx(2.0 * pi).margin(1e-8));
  CHECK(m.dev_identity < 1e-8);
  REQUIRE(m.multipliers.size() == 2);
  for (const auto& mu : m.multipliers) {
    CHECK(std::abs(mu - std::complex<double>(1.0, 0.0)) < 1e-7);
  }
}

TEST_CASE("monodromy dichotomy: plasma d=1 identity, d=2 far from it") {
  Vec Y0(2);
  Y0 << 0.0, 0.2;
  MonodromyResult m1 = monodromy(models::plasma_radial(1), 1.0, Y0, cfg_default());
  CHECK(m1.dev_identity <= 1e-6);
  MonodromyResult m2 = monodromy(models::plasma_radial(2), 1.0, Y0, cfg_default());
  CHECK(m2.dev_identity >= 1e-2);
}

TEST_CASE("monodromy matrix acts linearly on variational initial data") {
  const SystemDef sys = models::plasma_radial(2);
  Vec Y0(2);
  Y0 << 0.0, 0.2;
  MonodromyResult m = monodromy(sys, 1.0, Y0, cfg_default());
  // integrate an arbitrary (q, y) vector directly and compare with M v
  Vec v(3);
  v << 0.3, -1.2, 0.7;
  Vec a0(6);
  a0 << 1.0, Y0[0], Y0[1], v[0], v[1], v[2];
  IntegratorConfig c = cfg_default();
  c.t_max = m.T;
  Trajectory traj = integrate(augment(sys), a0, c);
  const Vec direct = traj.eval(m.T).tail(3);
  CHECK((m.M * v - direct).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("classification: d=1 isochronous, d=3 non-isochronous") {
  IsochronyEvidence iso = classify_isochronous(models::plasma_radial(1), Family::amplitude(1.0, 2),
                                               0.05, 0.3, 6, cfg_default());
  CHECK(iso.verdict == Verdict::Isochronous);
  IsochronyEvidence non = classify_isochronous(models::plasma_radial(3), Family::amplitude(1.0, 2),
                                               0.05, 0.3, 6, cfg_default());
  CHECK(non.verdict == Verdict::NonIsochronous);
  // cross-module coherence: small monodromy deviation implies small spread
  CHECK(iso.max_dev_identity <= 1e-6);
  CHECK(iso.spread <= 1e-5);
}

TEST_CASE("classification agrees with the Lienard criterion across dimensions") {
  for (int d = 1; d <= 5; ++d) {
    const SabatiniVerdict sv = sabatini_verdict(models::plasma_lienard(d), 1.0, 50, 1e-8);
    const IsochronyEvidence ev = classify_isochronous(
        models::plasma_radial(d), Family::amplitude(1.0, 2), 0.05, 0.3, 4, cfg_default());
    INFO("d=" << d);
    if (sv == SabatiniVerdict::IsochronousCenter) {
      CHECK(ev.verdict == Verdict::Isochronous);
    } else {
      CHECK(ev.verdict == Verdict::NonIsochronous);
    }
  }
}

TEST_CASE("transformed oscillator classifies as isochronous") {
  models::Transform2 tr;
  tr.F1 = [](double z1, double z2) { return z1 + z2 * z2; };
  tr.F2 = [](double, double z2) { return z2; };
  const SystemDef sys = models::transformed_oscillator(tr);
  Family fam;
  fam.initial = [](double h) { return std::pair<double, Vec>{1.0, (Vec(2) << h, 0.0).finished()}; };
  fam.description = "Z1-amplitude";
  IsochronyEvidence ev = classify_isochronous(sys, fam, 0.05, 0.3, 4, cfg_default());
  CHECK(ev.verdict == Verdict::Isochronous);
}

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "isochrone/models.hpp"
#include "isochrone/variational.hpp"

using namespace isochrone;
using std::numbers::pi;

TEST_CASE("augmented hopf flow has the closed-form (q, y)") {
  const SystemDef sys = models::hopf_potential();
  const Field aug = augment(sys);
  const double y0 = 0.6;
  const Vec s0 = augmented_state(sys, 0.0, Vec::Zero(1), 1.0, Vec::Constant(1, y0));
  IntegratorConfig cfg;
  cfg.t_max = 2.0;
  Trajectory traj = integrate(aug, s0, cfg);
  for (double t = 0.2; t <= 2.0; t += 0.3) {
    const Vec u = traj.eval(t);
    CHECK(u[2] == Catch::Approx(std::cos(t) + y0 * std::sin(t)).margin(1e-9));   // q
    CHECK(u[3] == Catch::Approx(-std::sin(t) + y0 * std::cos(t)).margin(1e-9));  // y
  }
}

TEST_CASE("S_x = 0 and y0 = 0 keep y at zero and q positive") {
  const SystemDef sys = models::plasma_radial(1);
  Vec Y0(2);
  Y0 << 0.0, 0.2;
  const Vec s0 = augmented_state(sys, 1.0, Y0, 1.0, Vec::Zero(2));
  IntegratorConfig cfg;
  cfg.t_max = 30.0;
  Trajectory traj = integrate(augment(sys), s0, cfg);
  REQUIRE(traj.termination == Termination::ReachedTMax);
  for (const Vec& u : traj.ys) {
    CHECK(u[4] == Catch::Approx(0.0).margin(1e-9));
    CHECK(u[5] == Catch::Approx(0.0).margin(1e-9));
    CHECK(u[3] > 0.0);  // q = exp(int Q_x) stays positive
  }
}

TEST_CASE("zero initial data keeps q identically one") {
  const SystemDef sys = models::plasma_radial(3);
  const Vec s0 = augmented_state(sys, 1.0, Vec::Zero(2), 1.0, Vec::Zero(2));
  IntegratorConfig cfg;
  cfg.t_max = 10.0;
  Trajectory traj = integrate(augment(sys), s0, cfg);
  for (const Vec& u : traj.ys) CHECK(u[3] == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("detect_blowup on hopf matches the closed-form first zero of q") {
  const SystemDef sys = models::hopf_potential();
  IntegratorConfig cfg;
  const auto t_star = [](double y0) { return std::atan2(y0, 1.0) + pi / 2; };
  for (double y0 : {0.0, 1.0, -0.5}) {
    BlowupReport rep =
        detect_blowup(sys, 0.0, Vec::Zero(1), Vec::Constant(1, y0), cfg, 10.0);
    REQUIRE(rep.blown);
    REQUIRE(rep.t_star);
    CHECK(*rep.t_star == Catch::Approx(t_star(y0)).margin(1e-8));
    CHECK_FALSE(rep.state_blowup);
    CHECK(rep.q_min <= 0.0);
  }
}

TEST_CASE("plasma d=1 with constant initial profile never blows up") {
  const SystemDef sys = models::plasma_radial(1);
  Vec Y0(2);
  Y0 << 0.0, 0.2;
  BlowupReport rep = detect_blowup(sys, 1.0, Y0, Vec::Zero(2), IntegratorConfig{}, 100.0);
  CHECK_FALSE(rep.blown);
  CHECK_FALSE(rep.t_star.has_value());
  CHECK(rep.q_min > 0.0);
  CHECK(rep.q_min <= 1.0);
}

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1.0);
  return v;
}

Mat scalar(double v) { return Mat::Constant(1, 1, v); }

}  // namespace

TEST_CASE("scalar Riccati wdot = -w^2 integrates to 1/(1+t)") {
  // M12 = 1 gives -W M12 W = -w^2
  RiccatiSpec spec =
      RiccatiSpec::constant(scalar(0.0), scalar(1.0), scalar(0.0), scalar(0.0), scalar(1.0));
  const auto grid = linspace(0.1, 2.0, 20);
  RiccatiSolution direct = solve_riccati_direct(spec, grid, IntegratorConfig{});
  RiccatiSolution radon = radon_reconstruct(spec, grid, IntegratorConfig{});
  REQUIRE(direct.samples.size() == grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    CHECK(direct.samples[i].W(0, 0) == Catch::Approx(1.0 / (1.0 + t)).margin(1e-10));
    CHECK(radon.samples[i].W(0, 0) == Catch::Approx(1.0 / (1.0 + t)).margin(1e-10));
    CHECK(radon.samples[i].det_Q == Catch::Approx(1.0 + t).margin(1e-9));
    CHECK_FALSE(radon.samples[i].singular);
  }
}

TEST_CASE("scalar Riccati wdot = 1 + w^2: direct escape and det Q zero agree") {
  // M21 = 1, M12 = -1 gives 1 + w^2
  RiccatiSpec spec =
      RiccatiSpec::constant(scalar(0.0), scalar(-1.0), scalar(1.0), scalar(0.0), scalar(0.0));
  RiccatiSolution direct = solve_riccati_direct(spec, linspace(0.1, 2.0, 20), IntegratorConfig{});
  CHECK(direct.termination == Termination::StepUnderflow);
  CHECK(direct.samples.size() < 20);  // stopped before the escape at pi/2
  for (const auto& s : direct.samples) {
    CHECK(s.W(0, 0) == Catch::Approx(std::tan(s.t)).margin(1e-8));
  }

  // det Q = cos t: locate its first zero on a fine grid
  const auto grid = linspace(1e-3, 2.0, 20001);
  RiccatiSolution radon = radon_reconstruct(spec, grid, IntegratorConfig{});
  REQUIRE(radon.termination == Termination::ReachedTMax);
  double t_zero = 0.0;
  for (std::size_t i = 1; i < radon.samples.size(); ++i) {
    const double a = radon.samples[i - 1].det_Q, b = radon.samples[i].det_Q;
    if (a > 0.0 && b <= 0.0) {
      // linear interpolation of the bracketing samples
      t_zero = radon.samples[i - 1].t + a / (a - b) * (radon.samples[i].t - radon.samples[i - 1].t);
      break;
    }
  }
  CHECK(t_zero == Catch::Approx(pi / 2).margin(1e-8));
}

TEST_CASE("W0 = 0 with M21 = 0 stays at zero") {
  RiccatiSpec spec =
      RiccatiSpec::constant(scalar(0.3), scalar(-0.7), scalar(0.0), scalar(0.5), scalar(0.0));
  RiccatiSolution sol = solve_riccati_direct(spec, linspace(0.2, 3.0, 10), IntegratorConfig{});
  for (const auto& s : sol.samples) CHECK(std::abs(s.W(0, 0)) < 1e-12);
}

TEST_CASE("Radon equivalence holds for random constant 2x2 blocks") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto rand_mat = [&] {
    Mat m(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) m(i, j) = u(rng);
    return m;
  };
  const auto grid = linspace(0.05, 2.0, 40);
  for (int seed = 0; seed < 20; ++seed) {
    RiccatiSpec spec =
        RiccatiSpec::constant(rand_mat(), rand_mat(), rand_mat(), rand_mat(), rand_mat());
    RiccatiSolution direct = solve_riccati_direct(spec, grid, IntegratorConfig{});
    RiccatiSolution radon = radon_reconstruct(spec, grid, IntegratorConfig{});
    for (std::size_t i = 0; i < direct.samples.size(); ++i) {
      if (std::abs(radon.samples[i].det_Q) <= 0.1) continue;
      INFO("seed " << seed << " t=" << grid[i]);
      CHECK((direct.samples[i].W - radon.samples[i].W).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("q zero set equals det Q zero set for the hopf blocks") {
  // along any hopf trajectory the blocks are constant: M11=0, M12=1, M21=-1, M22=0
  const double y0 = 1.0;
  RiccatiSpec spec =
      RiccatiSpec::constant(scalar(0.0), scalar(1.0), scalar(-1.0), scalar(0.0), scalar(y0));
  const auto grid = linspace(1e-3, 3.0, 30001);
  RiccatiSolution radon = radon_reconstruct(spec, grid, IntegratorConfig{});
  double t_detq = 0.0;
  for (std::size_t i = 1; i < radon.samples.size(); ++i) {
    const double a = radon.samples[i - 1].det_Q, b = radon.samples[i].det_Q;
    if (a > 0.0 && b <= 0.0) {
      t_detq = radon.samples[i - 1].t + a / (a - b) * (radon.samples[i].t - radon.samples[i - 1].t);
      break;
    }
  }
  BlowupReport rep = detect_blowup(models::hopf_potential(), 0.0, Vec::Zero(1),
                                   Vec::Constant(1, y0), IntegratorConfig{}, 10.0);
  REQUIRE(rep.blown);
  CHECK(*rep.t_star == Catch::Approx(t_detq).margin(1e-8));
}

TEST_CASE("RiccatiSpec with mismatched W0 shape is rejected") {
  RiccatiSpec spec =
      RiccatiSpec::constant(scalar(0.0), scalar(1.0), scalar(0.0), scalar(0.0), Mat::Zero(2, 1));
  CHECK_THROWS_AS(solve_riccati_direct(spec, {1.0}, IntegratorConfig{}), InvalidSpec);
}

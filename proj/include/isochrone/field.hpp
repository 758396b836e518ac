#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "isochrone/core.hpp"
#include "isochrone/integrate.hpp"
#include "isochrone/parallel.hpp"
#include "isochrone/variational.hpp"

namespace isochrone {

/// Initial data Y(0, x) = Y0(x) on a spatial window, seeded at N_x
/// equispaced points.  The spatial derivative seeds the y-components of
/// the augmented system; differenced when not supplied.
struct InitialProfile {
  std::function<Vec(double)> Y0;
  std::optional<std::function<Vec(double)>> Y0_prime;
  double x_lo = -1.0;
  double x_hi = 1.0;
  int N_x = 32;

  Vec deriv(double x) const {
    if (Y0_prime) return (*Y0_prime)(x);
    const double h = 1e-6;
    return (Y0(x + h) - Y0(x - h)) / (2.0 * h);
  }

  std::vector<double> seeds() const {
    std::vector<double> xs(N_x);
    for (int i = 0; i < N_x; ++i) xs[i] = x_lo + (x_hi - x_lo) * i / (N_x - 1.0);
    return xs;
  }
};

struct CharRecord {
  double X = 0.0;
  Vec Y;
  Vec y;
  double q = 1.0;
  bool alive = true;  // false once this characteristic's integration ended early
};

struct FieldSnapshot {
  double t = 0.0;
  std::vector<CharRecord> chars;
  bool ordered = true;  // X_i strictly increasing in the seed index
};

struct CrossingReport {
  bool found = false;
  int i = -1, j = -1;
  double t_cross = 0.0;
  // corroborating q evidence: first time min_i q_i reaches zero
  std::optional<double> t_q_zero;
  bool signals_agree = true;
};

/// Method-of-characteristics reconstruction: integrates the augmented
/// system per seed and gathers scattered (X, Y, y, q) snapshots at t_grid.
/// Per-characteristic blow-up is recorded in the snapshot, not fatal.
inline std::vector<FieldSnapshot> reconstruct_field(const SystemDef& sys,
                                                    const InitialProfile& profile,
                                                    const std::vector<double>& t_grid,
                                                    const IntegratorConfig& cfg) {
  const auto xs = profile.seeds();
  const int N = profile.N_x;
  const int dim = sys.n + 1;
  const Field aug = augment(sys);

  // per characteristic: states at grid times (may stop early)
  std::vector<std::vector<Vec>> paths(N);
  parallel_for(N, [&](int i) {
    const double xi = xs[i];
    const Vec s0 = augmented_state(sys, xi, profile.Y0(xi), 1.0, profile.deriv(xi));
    paths[i] = sample_path(aug, s0, cfg, t_grid).first;
  });

  std::vector<FieldSnapshot> snaps(t_grid.size());
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    FieldSnapshot& snap = snaps[k];
    snap.t = t_grid[k];
    snap.chars.resize(N);
    double x_prev = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < N; ++i) {
      CharRecord& r = snap.chars[i];
      if (k >= paths[i].size()) {
        r.alive = false;
        continue;
      }
      const Vec& s = paths[i][k];
      r.X = s[0];
      r.Y = s.segment(1, sys.n);
      r.q = s[dim];
      r.y = s.tail(sys.n);
      if (r.X <= x_prev) snap.ordered = false;
      x_prev = r.X;
    }
  }
  return snaps;
}

/// Crossing detection: monitors adjacent-pair gaps
/// X_{i+1}(t) - X_i(t) on a sample grid, refines the first sign change by
/// local re-integration and bisection, and cross-checks against the first
/// zero of min_i q_i.  Disagreement between the two signals is reported.
inline CrossingReport detect_crossing(const SystemDef& sys, const InitialProfile& profile,
                                      double t_max, const IntegratorConfig& cfg,
                                      double dt = 0.05) {
  const auto xs = profile.seeds();
  const int N = profile.N_x;
  const int dim = sys.n + 1;
  const Field aug = augment(sys);

  std::vector<double> t_grid;
  for (double t = dt; t <= t_max + 1e-12; t += dt) t_grid.push_back(t);

  std::vector<std::vector<Vec>> paths(N);
  parallel_for(N, [&](int i) {
    const double xi = xs[i];
    const Vec s0 = augmented_state(sys, xi, profile.Y0(xi), 1.0, profile.deriv(xi));
    paths[i] = sample_path(aug, s0, cfg, t_grid).first;
  });

  CrossingReport rep;

  // first grid index where an adjacent gap is non-positive
  std::size_t k_cross = t_grid.size();
  int pair_i = -1;
  for (std::size_t k = 0; k < t_grid.size() && k_cross == t_grid.size(); ++k) {
    for (int i = 0; i + 1 < N; ++i) {
      if (k >= paths[i].size() || k >= paths[i + 1].size()) continue;
      if (paths[i + 1][k][0] - paths[i][k][0] <= 0.0) {
        k_cross = k;
        pair_i = i;
        break;
      }
    }
  }

  // first grid index where some q_i <= 0
  std::size_t k_q = t_grid.size();
  for (std::size_t k = 0; k < t_grid.size() && k_q == t_grid.size(); ++k) {
    for (int i = 0; i < N; ++i) {
      if (k >= paths[i].size()) continue;
      if (paths[i][k][dim] <= 0.0) {
        k_q = k;
        break;
      }
    }
  }
  if (k_q < t_grid.size()) rep.t_q_zero = t_grid[k_q];

  if (pair_i >= 0) {
    rep.found = true;
    rep.i = pair_i;
    rep.j = pair_i + 1;
    // refine inside the bracketing grid cell by re-integration from the
    // previous grid state of both characteristics
    const std::size_t k = k_cross;
    double ta = k == 0 ? 0.0 : t_grid[k - 1];
    double tb = t_grid[k];
    Vec sa = k == 0
                 ? augmented_state(sys, xs[pair_i], profile.Y0(xs[pair_i]), 1.0,
                                   profile.deriv(xs[pair_i]))
                 : paths[pair_i][k - 1];
    Vec sb = k == 0
                 ? augmented_state(sys, xs[pair_i + 1], profile.Y0(xs[pair_i + 1]), 1.0,
                                   profile.deriv(xs[pair_i + 1]))
                 : paths[pair_i + 1][k - 1];
    IntegratorConfig w = cfg;
    w.t_max = tb;
    Trajectory ti_ = integrate(aug, sa, w, ta);
    Trajectory tj_ = integrate(aug, sb, w, ta);
    const auto gap = [&](double t) { return tj_.eval(t)[0] - ti_.eval(t)[0]; };
    double a = ta, b = tb;
    if (gap(a) > 0.0) {
      for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        if (m == a || m == b) break;
        (gap(m) > 0.0 ? a : b) = m;
      }
    }
    rep.t_cross = 0.5 * (a + b);
  }

  // the two blow-up signals must agree within grid resolution
  const bool q_found = rep.t_q_zero.has_value();
  rep.signals_agree = (rep.found == q_found);
  return rep;
}

}  // namespace isochrone

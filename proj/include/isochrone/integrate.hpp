#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "isochrone/core.hpp"
#include "isochrone/errors.hpp"

namespace isochrone {

/// Autonomous-or-not vector field; writes the derivative into dy.
using Field = std::function<void(double t, const Vec& y, Vec& dy)>;

struct IntegratorConfig {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h_init = 0.0;   // 0 = choose automatically
  double h_min = 1e-14;  // underflow guard
  double t_max = 100.0;
  long max_steps = 2'000'000;
};

enum class Termination {
  ReachedTMax,
  EventFired,
  StepUnderflow,  // finite-time singularity of the integrated quantities
  DomainExit,
  MaxSteps,
};

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::ReachedTMax: return "reached_t_max";
    case Termination::EventFired: return "event_fired";
    case Termination::StepUnderflow: return "step_underflow";
    case Termination::DomainExit: return "domain_exit";
    case Termination::MaxSteps: return "max_steps";
  }
  return "?";
}

/// Dense-output trajectory of an adaptive Runge-Kutta run.  Samples sit at
/// step endpoints; each step carries the quartic interpolant coefficients.
class Trajectory {
 public:
  struct StepPoly {
    double t0, h;
    Vec y0, r2, r3, r4, r5;  // u(th) = y0 + th*(r2 + (1-th)*(r3 + th*(r4 + (1-th)*r5)))
  };

  std::vector<double> ts;
  std::vector<Vec> ys;
  std::vector<StepPoly> steps;
  Termination termination = Termination::ReachedTMax;

  double t_begin() const { return ts.front(); }
  double t_end() const { return ts.back(); }
  const Vec& final_state() const { return ys.back(); }

  Vec eval(double t) const {
    if (steps.empty()) return ys.front();
    if (t <= ts.front()) return ys.front();
    if (t >= ts.back()) return ys.back();
    // locate the step whose [t0, t0+h] contains t
    auto it = std::upper_bound(ts.begin(), ts.end(), t);
    std::size_t idx = static_cast<std::size_t>(it - ts.begin()) - 1;
    idx = std::min(idx, steps.size() - 1);
    const StepPoly& s = steps[idx];
    const double th = (t - s.t0) / s.h;
    return s.y0 + th * (s.r2 + (1.0 - th) * (s.r3 + th * (s.r4 + (1.0 - th) * s.r5)));
  }
};

namespace rk {

// Dormand-Prince 5(4) tableau with the standard quartic continuous extension.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

}  // namespace rk

namespace detail {

inline bool finite(const Vec& v) { return v.allFinite(); }

inline double initial_step(const Field& f, double t0, const Vec& y0, const Vec& f0,
                           const IntegratorConfig& cfg) {
  if (cfg.h_init > 0.0) return cfg.h_init;
  const double d0 = y0.norm(), d1 = f0.norm();
  double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  return std::min(h, std::max(1e-6, 0.05 * (cfg.t_max - t0)));
}

}  // namespace detail

/// Adaptive embedded Runge-Kutta 5(4) with dense output.  Terminates at
/// t_max, on step underflow (finite-time blow-up of the state), on domain
/// exit (the field throws DomainExit), or when max_steps is exhausted.
inline Trajectory integrate(const Field& field, const Vec& state0, const IntegratorConfig& cfg,
                            double t0 = 0.0) {
  using namespace rk;
  const Eigen::Index m = state0.size();
  Trajectory traj;
  traj.ts.push_back(t0);
  traj.ys.push_back(state0);
  if (cfg.t_max <= t0) {
    traj.termination = Termination::ReachedTMax;
    return traj;
  }

  Vec y = state0;
  double t = t0;
  Vec k1(m), k2(m), k3(m), k4(m), k5(m), k6(m), k7(m), ytmp(m), ynew(m), yerr(m);
  try {
    field(t, y, k1);
  } catch (const DomainExit&) {
    traj.termination = Termination::DomainExit;
    return traj;
  }
  double h = detail::initial_step(field, t, y, k1, cfg);

  long steps = 0;
  while (t < cfg.t_max) {
    if (++steps > cfg.max_steps) {
      traj.termination = Termination::MaxSteps;
      return traj;
    }
    h = std::min(h, cfg.t_max - t);
    if (h < cfg.h_min || t + h == t) {
      traj.termination = Termination::StepUnderflow;
      return traj;
    }
    bool rejected_by_domain = false;
    try {
      ytmp = y + h * (a21 * k1);
      field(t + c2 * h, ytmp, k2);
      ytmp = y + h * (a31 * k1 + a32 * k2);
      field(t + c3 * h, ytmp, k3);
      ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
      field(t + c4 * h, ytmp, k4);
      ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      field(t + c5 * h, ytmp, k5);
      ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      field(t + h, ytmp, k6);
      ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      field(t + h, ynew, k7);  // FSAL
    } catch (const DomainExit&) {
      rejected_by_domain = true;
    }
    if (rejected_by_domain || !detail::finite(ynew) || !detail::finite(k7)) {
      h *= 0.5;
      if (h < cfg.h_min) {
        traj.termination =
            rejected_by_domain ? Termination::DomainExit : Termination::StepUnderflow;
        return traj;
      }
      continue;
    }
    yerr = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double err = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double sc = cfg.atol + cfg.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      const double r = yerr[i] / sc;
      err += r * r;
    }
    err = std::sqrt(err / static_cast<double>(m));

    if (err <= 1.0 || h <= cfg.h_min * 1.0001) {
      // accept: attach dense coefficients
      Trajectory::StepPoly sp;
      sp.t0 = t;
      sp.h = h;
      sp.y0 = y;
      sp.r2 = ynew - y;
      sp.r3 = h * k1 - sp.r2;
      sp.r4 = sp.r2 - h * k7 - sp.r3;
      sp.r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      traj.steps.push_back(std::move(sp));
      t += h;
      y.swap(ynew);
      k1.swap(k7);
      traj.ts.push_back(t);
      traj.ys.push_back(y);
    }
    const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-16), -0.2), 0.2, 5.0);
    h *= fac;
  }
  traj.termination = Termination::ReachedTMax;
  return traj;
}

/// Streaming variant: integrates and returns the states interpolated at
/// t_grid only, without keeping per-step dense data (memory-bounded for
/// long horizons).  Grid points past the termination time are omitted.
inline std::pair<std::vector<Vec>, Termination> sample_path(const Field& field, const Vec& state0,
                                                            const IntegratorConfig& cfg,
                                                            const std::vector<double>& t_grid) {
  // Reuses the dense integrator in windows between grid points to bound memory.
  std::vector<Vec> out;
  out.reserve(t_grid.size());
  Vec y = state0;
  double t = 0.0;
  Termination term = Termination::ReachedTMax;
  for (double tg : t_grid) {
    if (tg <= t) {
      out.push_back(y);
      continue;
    }
    IntegratorConfig w = cfg;
    w.t_max = tg;
    Trajectory traj = integrate(field, y, w, t);
    if (traj.termination != Termination::ReachedTMax) {
      term = traj.termination;
      break;
    }
    y = traj.final_state();
    t = tg;
    out.push_back(y);
  }
  return {out, term};
}

enum class EventDirection { Plus, Minus, Any };

using EventFn = std::function<double(double t, const Vec& y)>;

namespace detail {

// Bisection on the dense output; the bracket has opposite signs at its ends.
inline double refine_root(const Trajectory& traj, const EventFn& g, double ta, double tb) {
  double ga = g(ta, traj.eval(ta));
  for (int it = 0; it < 200; ++it) {
    const double tm = 0.5 * (ta + tb);
    if (tm == ta || tm == tb) break;
    const double gm = g(tm, traj.eval(tm));
    if (gm == 0.0) return tm;
    if ((ga < 0) == (gm < 0)) {
      ta = tm;
      ga = gm;
    } else {
      tb = tm;
    }
  }
  return 0.5 * (ta + tb);
}

}  // namespace detail

/// First sign change of g along the trajectory matching `direction`,
/// refined on the dense output.  Roots at the very start are excluded.
/// Returns nullopt when g never changes sign.
inline std::optional<double> find_event(const Trajectory& traj, const EventFn& g,
                                        EventDirection direction, int subsamples = 8) {
  if (traj.steps.empty()) return std::nullopt;
  const double t_start = traj.t_begin();
  double t_prev = t_start;
  double g_prev = g(t_prev, traj.ys.front());
  bool armed = std::abs(g_prev) > 0.0;
  for (const auto& s : traj.steps) {
    for (int j = 1; j <= subsamples; ++j) {
      const double t = s.t0 + s.h * j / subsamples;
      const double gv = g(t, traj.eval(t));
      if (!armed) {
        if (gv != 0.0) {
          armed = true;
          t_prev = t;
          g_prev = gv;
        }
        continue;
      }
      const bool sign_change = (g_prev < 0 && gv >= 0) || (g_prev > 0 && gv <= 0);
      if (sign_change) {
        const bool upward = g_prev < 0;
        const bool ok = direction == EventDirection::Any ||
                        (direction == EventDirection::Plus && upward) ||
                        (direction == EventDirection::Minus && !upward);
        if (ok) return detail::refine_root(traj, g, t_prev, t);
        // wrong direction: fall through, keep scanning
      }
      t_prev = t;
      g_prev = gv;
    }
  }
  return std::nullopt;
}

struct PeriodResult {
  double T = 0.0;
  double return_error = 0.0;  // full-state distance to state0 at t=T
  int n_crossings_used = 0;
};

/// Poincare-return period measurement.  The section is the hyperplane
/// {component k = state0[k]} crossed in the same direction as at t=0, with
/// k the component of largest initial derivative magnitude.  Among the
/// section crossings within t_max, T is the one whose full state is
/// closest to state0; return_error is that distance, always reported.
inline PeriodResult measure_period(const Field& field, const Vec& state0,
                                   const IntegratorConfig& cfg) {
  Vec f0(state0.size());
  field(0.0, state0, f0);
  Eigen::Index k = 0;
  f0.cwiseAbs().maxCoeff(&k);
  if (f0.cwiseAbs().maxCoeff() == 0.0) {
    throw NoReturn("measure_period: initial state is an equilibrium");
  }
  const double section = state0[k];
  const EventDirection dir = f0[k] > 0 ? EventDirection::Plus : EventDirection::Minus;

  Trajectory traj = integrate(field, state0, cfg);
  const EventFn g = [&](double, const Vec& y) { return y[k] - section; };

  // collect all matching crossings, not just the first
  std::vector<std::pair<double, double>> crossings;  // (t, full-state distance)
  double t_prev = 0.0;
  double g_prev = 0.0;
  bool armed = false;
  const int sub = 8;
  for (const auto& s : traj.steps) {
    for (int j = 1; j <= sub; ++j) {
      const double t = s.t0 + s.h * j / sub;
      const double gv = g(t, traj.eval(t));
      if (!armed) {
        if (std::abs(gv) > 0.0) {
          armed = true;
          t_prev = t;
          g_prev = gv;
        }
        continue;
      }
      const bool upward = g_prev < 0 && gv >= 0;
      const bool downward = g_prev > 0 && gv <= 0;
      if ((dir == EventDirection::Plus && upward) || (dir == EventDirection::Minus && downward)) {
        const double tc = detail::refine_root(traj, g, t_prev, t);
        crossings.emplace_back(tc, (traj.eval(tc) - state0).norm());
      }
      t_prev = t;
      g_prev = gv;
    }
  }
  if (crossings.empty()) {
    throw NoReturn("measure_period: no section return within t_max");
  }
  // the fundamental period and its multiples return equally well up to
  // integration noise; take the earliest crossing within a factor of the
  // best so subharmonic aliasing cannot win a 1-ulp tie
  double d_min = std::numeric_limits<double>::infinity();
  for (const auto& [tc, dist] : crossings) d_min = std::min(d_min, dist);
  PeriodResult best;
  for (const auto& [tc, dist] : crossings) {
    if (dist <= 10.0 * d_min + 1e-14) {
      best.T = tc;
      best.return_error = dist;
      break;
    }
  }
  best.n_crossings_used = static_cast<int>(crossings.size());
  return best;
}

/// Characteristic system as a plain field of dimension n+1, state (x, Y).
inline Field char_field(const SystemDef& sys) {
  return [&sys](double, const Vec& s, Vec& ds) {
    const double x = s[0];
    const Vec Y = s.tail(sys.n);
    auto [dx, dY] = eval_rhs(sys, x, Y);
    ds.resize(sys.n + 1);
    ds[0] = dx;
    ds.tail(sys.n) = dY;
  };
}

}  // namespace isochrone

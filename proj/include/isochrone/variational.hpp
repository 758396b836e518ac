#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "isochrone/core.hpp"
#include "isochrone/integrate.hpp"

namespace isochrone {

/// Outcome of the gradient blow-up scan: t_star is the first zero of the
/// indicator q when it exists within the horizon.
struct BlowupReport {
  bool blown = false;
  std::optional<double> t_star;
  double q_min = 1.0;
  double horizon = 0.0;
  // StepUnderflow before any q-zero: the state itself escaped, which is a
  // different failure mode than the gradient catastrophe.
  bool state_blowup = false;
};

/// Field of dimension 2(n+1) with state (x, Y, q, y): the characteristic
/// equations coupled to their exact linearization (no frozen coefficients).
/// The SystemDef must outlive the returned field.
inline Field augment(const SystemDef& sys) {
  return [&sys](double, const Vec& s, Vec& ds) {
    const int n = sys.n;
    const double x = s[0];
    const Vec Y = s.segment(1, n);
    auto [dx, dY] = eval_rhs(sys, x, Y);
    const Mat M = eval_linearization(sys, x, Y);
    const Vec qy = s.segment(n + 1, n + 1);
    ds.resize(2 * (n + 1));
    ds[0] = dx;
    ds.segment(1, n) = dY;
    ds.segment(n + 1, n + 1) = M * qy;
  };
}

inline Vec augmented_state(const SystemDef& sys, double x0, const Vec& Y0, double q0,
                           const Vec& y0) {
  Vec s(2 * (sys.n + 1));
  s[0] = x0;
  s.segment(1, sys.n) = Y0;
  s[sys.n + 1] = q0;
  s.tail(sys.n) = y0;
  return s;
}

/// Integrates the augmented field and locates the first root of q.
inline BlowupReport detect_blowup(const SystemDef& sys, double x0, const Vec& Y0, const Vec& y0,
                                  IntegratorConfig cfg, double horizon) {
  const Field f = augment(sys);
  cfg.t_max = horizon;
  const Vec s0 = augmented_state(sys, x0, Y0, 1.0, y0);
  Trajectory traj = integrate(f, s0, cfg);

  BlowupReport rep;
  rep.horizon = horizon;
  const int qi = sys.n + 1;
  for (std::size_t i = 0; i < traj.ts.size(); ++i) {
    rep.q_min = std::min(rep.q_min, traj.ys[i][qi]);
  }
  auto t0 = find_event(
      traj, [qi](double, const Vec& y) { return y[qi]; }, EventDirection::Any);
  if (t0) {
    rep.blown = true;
    rep.t_star = *t0;
    // refine q_min around the detected zero
    rep.q_min = std::min(rep.q_min, 0.0);
  } else if (traj.termination == Termination::StepUnderflow) {
    rep.blown = true;
    rep.t_star = traj.t_end();
    rep.state_blowup = true;
  }
  return rep;
}

/// Time-dependent blocks of a rectangular matrix Riccati equation
///   Wdot = M21 + M22 W - W M11 - W M12 W,
/// with W of shape (m x k), M11 (k x k), M12 (k x m), M21 (m x k), M22 (m x m).
struct RiccatiSpec {
  int k = 1;
  int m = 1;
  std::function<Mat(double)> M11, M12, M21, M22;
  Mat W0;

  void validate() const {
    if (W0.rows() != m || W0.cols() != k) {
      throw InvalidSpec("RiccatiSpec: W0 must be m x k");
    }
  }

  Mat full(double t) const {
    Mat M(k + m, k + m);
    M.topLeftCorner(k, k) = M11(t);
    M.topRightCorner(k, m) = M12(t);
    M.bottomLeftCorner(m, k) = M21(t);
    M.bottomRightCorner(m, m) = M22(t);
    return M;
  }

  static RiccatiSpec constant(const Mat& m11, const Mat& m12, const Mat& m21, const Mat& m22,
                              const Mat& w0) {
    RiccatiSpec s;
    s.k = static_cast<int>(m11.rows());
    s.m = static_cast<int>(m22.rows());
    s.M11 = [m11](double) { return m11; };
    s.M12 = [m12](double) { return m12; };
    s.M21 = [m21](double) { return m21; };
    s.M22 = [m22](double) { return m22; };
    s.W0 = w0;
    return s;
  }
};

struct RiccatiSample {
  double t;
  Mat W;
  double det_Q = 1.0;       // only set by the linear reconstruction
  bool singular = false;    // |det Q| below threshold: W not reconstructible
};

struct RiccatiSolution {
  std::vector<RiccatiSample> samples;
  Termination termination = Termination::ReachedTMax;
};

/// Entrywise integration of the Riccati equation itself.  Finite-time
/// escape surfaces as StepUnderflow.
inline RiccatiSolution solve_riccati_direct(const RiccatiSpec& spec,
                                            const std::vector<double>& t_grid,
                                            const IntegratorConfig& cfg) {
  spec.validate();
  const int m = spec.m, k = spec.k;
  const Field f = [&spec, m, k](double t, const Vec& v, Vec& dv) {
    Mat W = Eigen::Map<const Mat>(v.data(), m, k);
    Mat dW = spec.M21(t) + spec.M22(t) * W - W * spec.M11(t) - W * spec.M12(t) * W;
    dv = Eigen::Map<Vec>(dW.data(), m * k);
  };
  Vec v0 = Eigen::Map<const Vec>(spec.W0.data(), m * k);
  auto [states, term] = sample_path(f, v0, cfg, t_grid);
  RiccatiSolution sol;
  sol.termination = term;
  for (std::size_t i = 0; i < states.size(); ++i) {
    RiccatiSample s;
    s.t = t_grid[i];
    s.W = Eigen::Map<const Mat>(states[i].data(), m, k);
    sol.samples.push_back(std::move(s));
  }
  return sol;
}

/// Radon-lemma route: integrates the linear companion system with initial
/// block (I; W0) and reconstructs W = P Q^{-1} together with det Q.  The
/// linear system cannot escape in finite time; samples where |det Q| drops
/// below `singular_tol` are flagged instead of erroring.
inline RiccatiSolution radon_reconstruct(const RiccatiSpec& spec, const std::vector<double>& t_grid,
                                         const IntegratorConfig& cfg,
                                         double singular_tol = 1e-12) {
  spec.validate();
  const int k = spec.k, m = spec.m, dim = k + m;
  const Field f = [&spec, dim, k](double t, const Vec& v, Vec& dv) {
    Mat Y = Eigen::Map<const Mat>(v.data(), dim, k);
    Mat dY = spec.full(t) * Y;
    dv = Eigen::Map<Vec>(dY.data(), dim * k);
  };
  Mat Y0(dim, k);
  Y0.topRows(k) = Mat::Identity(k, k);
  Y0.bottomRows(m) = spec.W0;
  Vec v0 = Eigen::Map<const Vec>(Y0.data(), dim * k);
  auto [states, term] = sample_path(f, v0, cfg, t_grid);
  RiccatiSolution sol;
  sol.termination = term;
  for (std::size_t i = 0; i < states.size(); ++i) {
    Mat Y = Eigen::Map<const Mat>(states[i].data(), dim, k);
    Mat Q = Y.topRows(k);
    Mat P = Y.bottomRows(m);
    RiccatiSample s;
    s.t = t_grid[i];
    s.det_Q = Q.determinant();
    s.singular = std::abs(s.det_Q) < singular_tol;
    s.W = s.singular ? Mat::Constant(m, k, std::numeric_limits<double>::quiet_NaN())
                     : Mat(P * Q.inverse());
    sol.samples.push_back(std::move(s));
  }
  return sol;
}

}  // namespace isochrone

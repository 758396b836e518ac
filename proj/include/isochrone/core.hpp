#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "isochrone/errors.hpp"

namespace isochrone {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Validity region: an open x-interval times a box for the Y components.
struct DomainBox {
  double x_lo = -1e6;
  double x_hi = 1e6;
  Vec y_lo;
  Vec y_hi;

  bool contains(double x, const Vec& Y) const {
    if (!(x > x_lo && x < x_hi)) return false;
    for (Eigen::Index i = 0; i < Y.size(); ++i) {
      if (i < y_lo.size() && !(Y[i] > y_lo[i])) return false;
      if (i < y_hi.size() && !(Y[i] < y_hi[i])) return false;
    }
    return true;
  }

  static DomainBox box(double x_lo, double x_hi, const Vec& y_lo, const Vec& y_hi) {
    DomainBox d;
    d.x_lo = x_lo;
    d.x_hi = x_hi;
    d.y_lo = y_lo;
    d.y_hi = y_hi;
    return d;
  }

  static DomainBox cube(int n, double x_half, double y_half) {
    DomainBox d;
    d.x_lo = -x_half;
    d.x_hi = x_half;
    d.y_lo = Vec::Constant(n, -y_half);
    d.y_hi = Vec::Constant(n, y_half);
    return d;
  }
};

using ScalarField2 = std::function<double(double, const Vec&)>;
using VecField2 = std::function<Vec(double, const Vec&)>;
using MatField2 = std::function<Mat(double, const Vec&)>;

/// A characteristic system  xdot = Q(x,Y),  Ydot = S(x,Y),  with optional
/// analytic partials and a mandatory validity box.  Immutable after
/// construction; all evaluation is pure.
struct SystemDef {
  int n = 0;
  ScalarField2 Q;
  VecField2 S;
  // Optional analytic partials; finite differences are used where absent.
  std::optional<ScalarField2> Q_x;
  std::optional<VecField2> Q_Y;   // gradient of Q in Y
  std::optional<VecField2> S_x;
  std::optional<MatField2> S_Y;   // (i,j) = d S_i / d Y_j
  DomainBox domain;
  std::string name;
  // hopf_potential deliberately violates S(x,0)=0; it carries this marker
  // instead of silently skipping the equilibrium check.
  bool zero_equilibrium = true;

  bool has_partials() const { return Q_x && Q_Y && S_x && S_Y; }
};

struct CharState {
  double t = 0.0;
  double x = 0.0;
  Vec Y;
};

/// CharState extended with the gradient indicator q and the spatial
/// derivative components y carried along the characteristic.
struct AugmentedState {
  CharState base;
  double q = 1.0;
  Vec y;
};

inline void require_in_domain(const SystemDef& sys, double x, const Vec& Y) {
  if (!sys.domain.contains(x, Y)) {
    throw DomainExit(sys.name + ": point outside domain at x=" + std::to_string(x));
  }
}

/// Right-hand side of the characteristic system.
inline std::pair<double, Vec> eval_rhs(const SystemDef& sys, double x, const Vec& Y) {
  require_in_domain(sys, x, Y);
  return {sys.Q(x, Y), sys.S(x, Y)};
}

namespace detail {

inline double fd_step(double value) { return std::max(1e-6, 1e-6 * std::abs(value)); }

// Central difference of a scalar function of one perturbed coordinate.
template <class F>
double central_diff(F&& f, double v) {
  const double h = fd_step(v);
  return (f(v + h) - f(v - h)) / (2.0 * h);
}

}  // namespace detail

/// The (n+1)x(n+1) coefficient matrix of the linearized flow,
///   [[Q_x, Q_Y1..Q_Yn], [S_x | S_Y]],
/// from analytic partials when supplied, otherwise central differences.
inline Mat eval_linearization(const SystemDef& sys, double x, const Vec& Y) {
  require_in_domain(sys, x, Y);
  const int n = sys.n;
  Mat M(n + 1, n + 1);
  if (sys.has_partials()) {
    M(0, 0) = (*sys.Q_x)(x, Y);
    Vec qy = (*sys.Q_Y)(x, Y);
    Vec sx = (*sys.S_x)(x, Y);
    Mat sy = (*sys.S_Y)(x, Y);
    M.block(0, 1, 1, n) = qy.transpose();
    M.block(1, 0, n, 1) = sx;
    M.block(1, 1, n, n) = sy;
    return M;
  }
  // Finite-difference stencil must stay inside the domain.
  const double hx = detail::fd_step(x);
  if (!sys.domain.contains(x + hx, Y) || !sys.domain.contains(x - hx, Y)) {
    throw DomainExit(sys.name + ": finite-difference stencil leaves domain in x");
  }
  M(0, 0) = (sys.Q(x + hx, Y) - sys.Q(x - hx, Y)) / (2.0 * hx);
  Vec s_plus = sys.S(x + hx, Y), s_minus = sys.S(x - hx, Y);
  M.block(1, 0, n, 1) = (s_plus - s_minus) / (2.0 * hx);
  for (int j = 0; j < n; ++j) {
    const double hy = detail::fd_step(Y[j]);
    Vec Yp = Y, Ym = Y;
    Yp[j] += hy;
    Ym[j] -= hy;
    if (!sys.domain.contains(x, Yp) || !sys.domain.contains(x, Ym)) {
      throw DomainExit(sys.name + ": finite-difference stencil leaves domain in Y");
    }
    M(0, j + 1) = (sys.Q(x, Yp) - sys.Q(x, Ym)) / (2.0 * hy);
    M.block(1, j + 1, n, 1) = (sys.S(x, Yp) - sys.S(x, Ym)) / (2.0 * hy);
  }
  return M;
}

/// Checks Q(x,0)=0 and S(x,0)=0 on a sample grid of the x-interval.
/// Returns the largest violation found.
inline double max_equilibrium_residual(const SystemDef& sys, int samples = 33) {
  const Vec zero = Vec::Zero(sys.n);
  // stay strictly inside the open interval
  const double lo = sys.domain.x_lo, hi = sys.domain.x_hi;
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double x = lo + (hi - lo) * (i + 1.0) / (samples + 1.0);
    if (!sys.domain.contains(x, zero)) continue;
    worst = std::max(worst, std::abs(sys.Q(x, zero)));
    worst = std::max(worst, sys.S(x, zero).cwiseAbs().maxCoeff());
  }
  return worst;
}

/// Compares analytic partials against central differences at one point.
/// Returns the largest relative mismatch (absolute where the scale is tiny).
inline double partials_mismatch(const SystemDef& sys, double x, const Vec& Y) {
  if (!sys.has_partials()) return 0.0;
  SystemDef fd = sys;
  fd.Q_x.reset();
  fd.Q_Y.reset();
  fd.S_x.reset();
  fd.S_Y.reset();
  const Mat a = eval_linearization(sys, x, Y);
  const Mat b = eval_linearization(fd, x, Y);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const double scale = std::max(1.0, std::max(std::abs(a(i, j)), std::abs(b(i, j))));
      worst = std::max(worst, std::abs(a(i, j) - b(i, j)) / scale);
    }
  return worst;
}

}  // namespace isochrone

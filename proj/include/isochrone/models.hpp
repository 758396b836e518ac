#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "isochrone/core.hpp"
#include "isochrone/criteria.hpp"
#include "isochrone/integrate.hpp"

namespace isochrone {
namespace models {

/// Radial cold-plasma characteristic system in dimension d:
///   xdot = x Y2,  Y1dot = Y2 - d Y1 Y2,  Y2dot = -Y1 - Y2^2.
/// Isochronous exactly in d = 1 and d = 4.
inline SystemDef plasma_radial(int d) {
  if (d < 1) throw InvalidSpec("plasma_radial: d must be >= 1");
  SystemDef sys;
  sys.n = 2;
  sys.name = "plasma_radial_d" + std::to_string(d);
  const double dd = d;
  sys.Q = [](double x, const Vec& Y) { return x * Y[1]; };
  sys.S = [dd](double, const Vec& Y) {
    Vec s(2);
    s[0] = Y[1] - dd * Y[0] * Y[1];
    s[1] = -Y[0] - Y[1] * Y[1];
    return s;
  };
  sys.Q_x = [](double, const Vec& Y) { return Y[1]; };
  sys.Q_Y = [](double x, const Vec&) {
    Vec g(2);
    g << 0.0, x;
    return g;
  };
  sys.S_x = [](double, const Vec&) { return Vec::Zero(2).eval(); };
  sys.S_Y = [dd](double, const Vec& Y) {
    Mat m(2, 2);
    m << -dd * Y[1], 1.0 - dd * Y[0], -1.0, -2.0 * Y[1];
    return m;
  };
  sys.domain = DomainBox::cube(2, 1e6, 10.0);
  return sys;
}

/// Plasma system with the velocity-dependent calibration force gamma |V|^2 / r
/// added to the momentum equation:  Y2dot = -Y1 - (1 - gamma) Y2^2.
/// The calibration makes any dimension isochronous at gamma = 1 - d or
/// gamma = 1 - d/4.
inline SystemDef plasma_calibrated(int d, double gamma) {
  if (d < 1) throw InvalidSpec("plasma_calibrated: d must be >= 1");
  SystemDef sys = plasma_radial(d);
  sys.name = "plasma_calibrated_d" + std::to_string(d);
  const double dd = d, beta = 1.0 - gamma;
  sys.S = [dd, beta](double, const Vec& Y) {
    Vec s(2);
    s[0] = Y[1] - dd * Y[0] * Y[1];
    s[1] = -Y[0] - beta * Y[1] * Y[1];
    return s;
  };
  sys.S_Y = [dd, beta](double, const Vec& Y) {
    Mat m(2, 2);
    m << -dd * Y[1], 1.0 - dd * Y[0], -1.0, -2.0 * beta * Y[1];
    return m;
  };
  return sys;
}

/// Lienard reduction of the (Y1, Y2) plasma subsystem:
///   z'' + (2 beta + d) z z' + z + d beta z^3 = 0,  beta = 1 - gamma.
inline LienardSpec plasma_lienard(int d, double gamma = 0.0) {
  const double dd = d, beta = 1.0 - gamma;
  LienardSpec spec;
  spec.f = [dd, beta](double z) { return (2.0 * beta + dd) * z; };
  spec.g = [dd, beta](double z) { return z + dd * beta * z * z * z; };
  spec.g_prime0 = 1.0;
  return spec;
}

/// Relativistic 1D plasma characteristics, Y = (P, E):
///   xdot = P / sqrt(1+P^2),  Pdot = -E,  Edot = c(x) P / sqrt(1+P^2).
/// Analytic partials are attached when c' is supplied.
inline SystemDef relativistic_plasma(RealFn c, std::optional<RealFn> c_prime = std::nullopt) {
  SystemDef sys;
  sys.n = 2;
  sys.name = "relativistic_plasma";
  auto V = [](double P) { return P / std::sqrt(1.0 + P * P); };
  auto Vp = [](double P) { return 1.0 / std::pow(1.0 + P * P, 1.5); };
  sys.Q = [V](double, const Vec& Y) { return V(Y[0]); };
  sys.S = [c, V](double x, const Vec& Y) {
    Vec s(2);
    s[0] = -Y[1];
    s[1] = c(x) * V(Y[0]);
    return s;
  };
  if (c_prime) {
    RealFn cp = *c_prime;
    sys.Q_x = [](double, const Vec&) { return 0.0; };
    sys.Q_Y = [Vp](double, const Vec& Y) {
      Vec g(2);
      g << Vp(Y[0]), 0.0;
      return g;
    };
    sys.S_x = [cp, V](double x, const Vec& Y) {
      Vec s(2);
      s << 0.0, cp(x) * V(Y[0]);
      return s;
    };
    sys.S_Y = [c, Vp](double x, const Vec& Y) {
      Mat m(2, 2);
      m << 0.0, -1.0, c(x) * Vp(Y[0]), 0.0;
      return m;
    };
  }
  sys.domain = DomainBox::cube(2, 50.0, 50.0);
  return sys;
}

inline SystemDef relativistic_plasma_const(double c0 = 1.0) {
  return relativistic_plasma([c0](double) { return c0; }, RealFn([](double) { return 0.0; }));
}

/// Lienard form of the constant-background relativistic momentum equation:
///   P'' + c0 P / sqrt(1+P^2) = 0.
inline LienardSpec relativistic_lienard(double c0 = 1.0) {
  LienardSpec spec;
  spec.f = [](double) { return 0.0; };
  spec.g = [c0](double P) { return c0 * P / std::sqrt(1.0 + P * P); };
  spec.g_prime0 = c0;
  spec.z_lo = -5.0;
  spec.z_hi = 5.0;
  return spec;
}

namespace detail {

/// Cumulative integral of f from x_ref, cached on a uniform grid and
/// evaluated by cubic Hermite interpolation with the exact derivative f at
/// the nodes (interpolation error O(h^4)).
class CumulativeIntegral {
 public:
  CumulativeIntegral(RealFn f, double x_ref, double lo, double hi, double offset, double h = 1e-2)
      : f_(std::move(f)), lo_(lo), h_(h) {
    const int n = static_cast<int>(std::ceil((hi - lo) / h)) + 1;
    h_ = (hi - lo) / (n - 1);
    vals_.resize(n);
    derivs_.resize(n);
    // integrate node-to-node, then shift so the value at x_ref is `offset`
    vals_[0] = 0.0;
    derivs_[0] = f_(lo);
    for (int i = 1; i < n; ++i) {
      const double a = lo + (i - 1) * h_, b = lo + i * h_;
      vals_[i] = vals_[i - 1] + quad::integrate(f_, a, b, 1e-14);
      derivs_[i] = f_(b);
    }
    const double at_ref = raw_eval(x_ref);
    shift_ = offset - at_ref;
  }

  double operator()(double x) const { return raw_eval(x) + shift_; }

  double lo() const { return lo_; }
  double hi() const { return lo_ + h_ * (vals_.size() - 1); }

 private:
  double raw_eval(double x) const {
    const int last = static_cast<int>(vals_.size()) - 1;
    const double top = lo_ + h_ * last;
    // endpoints are valid; only reject genuinely outside the cached window
    if (x < lo_ - 1e-9 || x > top + 1e-9) {
      throw DomainExit("CumulativeIntegral: x outside cached range");
    }
    x = std::clamp(x, lo_, top);
    int i = static_cast<int>((x - lo_) / h_);
    i = std::min(i, last - 1);
    const double t = (x - (lo_ + i * h_)) / h_;
    const double y0 = vals_[i], y1 = vals_[i + 1];
    const double m0 = derivs_[i] * h_, m1 = derivs_[i + 1] * h_;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * y1 +
           (t3 - t2) * m1;
  }

  RealFn f_;
  double lo_, h_, shift_ = 0.0;
  std::vector<double> vals_, derivs_;
};

}  // namespace detail

/// Scalar second-order reduction of the relativistic system:
///   xdd = -E(x) (1 - xd^2)^{3/2},  E(x) = int_{x0}^x c + E0,
/// with the auxiliary function Phi (Phi' = -E, Phi(x0) = sqrt(1+P0^2))
/// exposed so the identity 1 - xd^2 = 1/Phi^2 can be validated along
/// trajectories rather than assumed.
struct ReducedRelativistic {
  Field field;        // state (x, xd); throws DomainExit when |xd| >= 1
  RealFn E;
  RealFn Phi;
  double x0, P0, E0;
  Vec initial_state() const {
    Vec s(2);
    s << x0, P0 / std::sqrt(1.0 + P0 * P0);
    return s;
  }
};

inline ReducedRelativistic relativistic_reduced(RealFn c, double x0, double P0, double E0,
                                                double x_lo = -10.0, double x_hi = 10.0) {
  auto Ecache = std::make_shared<detail::CumulativeIntegral>(c, x0, x_lo, x_hi, E0);
  RealFn E = [Ecache](double x) { return (*Ecache)(x); };
  auto Phicache = std::make_shared<detail::CumulativeIntegral>(
      RealFn([E](double x) { return -E(x); }), x0, x_lo, x_hi, std::sqrt(1.0 + P0 * P0));
  RealFn Phi = [Phicache](double x) { return (*Phicache)(x); };

  ReducedRelativistic rr;
  rr.E = E;
  rr.Phi = Phi;
  rr.x0 = x0;
  rr.P0 = P0;
  rr.E0 = E0;
  rr.field = [E](double, const Vec& s, Vec& ds) {
    const double v = s[1];
    if (std::abs(v) >= 1.0) throw DomainExit("relativistic_reduced: |xdot| >= 1");
    ds.resize(2);
    ds[0] = v;
    ds[1] = -E(s[0]) * std::pow(1.0 - v * v, 1.5);
  };
  return rr;
}

/// Hopf equation with potential:  xdot = Y,  Ydot = -x.  An isochronous
/// center whose gradient nevertheless always blows up; it violates
/// S(x,0)=0 on purpose and carries the zero_equilibrium=false marker.
inline SystemDef hopf_potential() {
  SystemDef sys;
  sys.n = 1;
  sys.name = "hopf_potential";
  sys.Q = [](double, const Vec& Y) { return Y[0]; };
  sys.S = [](double x, const Vec&) { return Vec::Constant(1, -x).eval(); };
  sys.Q_x = [](double, const Vec&) { return 0.0; };
  sys.Q_Y = [](double, const Vec&) { return Vec::Constant(1, 1.0).eval(); };
  sys.S_x = [](double, const Vec&) { return Vec::Constant(1, -1.0).eval(); };
  sys.S_Y = [](double, const Vec&) { return Mat::Zero(1, 1).eval(); };
  sys.domain = DomainBox::cube(1, 1e6, 1e6);
  sys.zero_equilibrium = false;
  return sys;
}

/// Smooth invertible change of variables applied to the linear oscillator.
struct Transform2 {
  std::function<double(double, double)> F1, F2;
  // optional analytic partials (F_i)_j; central differences otherwise
  std::optional<std::function<double(double, double)>> d11, d12, d21, d22;
};

namespace detail {

inline double pd(const std::function<double(double, double)>& f, double a, double b, int arg) {
  const double h = isochrone::detail::fd_step(arg == 1 ? a : b);
  if (arg == 1) return (f(a + h, b) - f(a - h, b)) / (2.0 * h);
  return (f(a, b + h) - f(a, b - h)) / (2.0 * h);
}

}  // namespace detail

/// Pushes the harmonic oscillator through X = F(Z):
///   Z1dot = Delta1 / Delta,  Z2dot = Delta2 / Delta,
/// with the Jacobian determinant Delta and its two replacements Delta1,
/// Delta2.  Every valid transform yields an isochronous center of period
/// 2 pi.  The passive equation xdot = Z1 x embeds the plane system as a
/// characteristic system with Q(x,0)=0.
inline SystemDef transformed_oscillator(const Transform2& tr) {
  if (std::abs(tr.F1(0.0, 0.0)) > 1e-12 || std::abs(tr.F2(0.0, 0.0)) > 1e-12) {
    throw InvalidSpec("transformed_oscillator: F must vanish at the origin");
  }
  auto j11 = [tr](double a, double b) { return tr.d11 ? (*tr.d11)(a, b) : detail::pd(tr.F1, a, b, 1); };
  auto j12 = [tr](double a, double b) { return tr.d12 ? (*tr.d12)(a, b) : detail::pd(tr.F1, a, b, 2); };
  auto j21 = [tr](double a, double b) { return tr.d21 ? (*tr.d21)(a, b) : detail::pd(tr.F2, a, b, 1); };
  auto j22 = [tr](double a, double b) { return tr.d22 ? (*tr.d22)(a, b) : detail::pd(tr.F2, a, b, 2); };

  auto rhs = [tr, j11, j12, j21, j22](double z1, double z2) {
    const double a11 = j11(z1, z2), a12 = j12(z1, z2), a21 = j21(z1, z2), a22 = j22(z1, z2);
    const double delta = a11 * a22 - a12 * a21;
    if (std::abs(delta) < 1e-10) {
      throw SingularTransformation("transformed_oscillator: |Delta| < 1e-10");
    }
    const double f1 = tr.F1(z1, z2), f2 = tr.F2(z1, z2);
    const double delta1 = f2 * a22 + f1 * a12;   // Det [[F2, a12], [-F1, a22]]
    const double delta2 = -a11 * f1 - a21 * f2;  // Det [[a11, F2], [a21, -F1]]
    return std::pair<double, double>{delta1 / delta, delta2 / delta};
  };
  // sanity probes: invertibility at and near the origin
  rhs(0.0, 0.0);
  rhs(1e-3, 1e-3);

  SystemDef sys;
  sys.n = 2;
  sys.name = "transformed_oscillator";
  // Passive equation xdot = x * Z1dot, so log x moves with Z1 and the full
  // characteristic state is periodic whenever the plane system is.
  sys.Q = [rhs](double x, const Vec& Y) { return x * rhs(Y[0], Y[1]).first; };
  sys.S = [rhs](double, const Vec& Y) {
    auto [s1, s2] = rhs(Y[0], Y[1]);
    Vec s(2);
    s << s1, s2;
    return s;
  };
  // partials left to finite differences (S has none in closed form anyway)
  sys.domain = DomainBox::cube(2, 1e6, 10.0);
  return sys;
}

inline SystemDef transformed_identity() {
  Transform2 tr;
  tr.F1 = [](double z1, double) { return z1; };
  tr.F2 = [](double, double z2) { return z2; };
  tr.d11 = [](double, double) { return 1.0; };
  tr.d12 = [](double, double) { return 0.0; };
  tr.d21 = [](double, double) { return 0.0; };
  tr.d22 = [](double, double) { return 1.0; };
  return transformed_oscillator(tr);
}

/// Plain harmonic oscillator field, for oracles and the CLI catalogue.
inline Field harmonic_oscillator() {
  return [](double, const Vec& y, Vec& dy) {
    dy.resize(2);
    dy[0] = y[1];
    dy[1] = -y[0];
  };
}

/// xdd = -g(x) as a first-order field with state (x, xd).
inline Field second_order_field(RealFn g) {
  return [g = std::move(g)](double, const Vec& y, Vec& dy) {
    dy.resize(2);
    dy[0] = y[1];
    dy[1] = -g(y[0]);
  };
}

/// zdd + f(z) zd + g(z) = 0 with state (z, zd).
inline Field lienard_field(const LienardSpec& spec) {
  return [f = spec.f, g = spec.g](double, const Vec& y, Vec& dy) {
    dy.resize(2);
    dy[0] = y[1];
    dy[1] = -g(y[0]) - f(y[0]) * y[1];
  };
}

}  // namespace models
}  // namespace isochrone

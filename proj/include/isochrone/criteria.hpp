#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "isochrone/errors.hpp"
#include "isochrone/integrate.hpp"

namespace isochrone {

using RealFn = std::function<double(double)>;

namespace quad {

namespace detail {
inline double simpson(const RealFn& f, double a, double fa, double b, double fb, double m,
                      double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adapt(const RealFn& f, double a, double fa, double b, double fb, double m, double fm,
                    double whole, double tol, int depth) {
  if (depth > 60) throw QuadratureFailure("adaptive Simpson: recursion limit");
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(f, a, fa, m, fm, lm, flm);
  const double right = simpson(f, m, fm, b, fb, rm, frm);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adapt(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth + 1) +
         adapt(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth + 1);
}
}  // namespace detail

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
inline double integrate(const RealFn& f, double a, double b, double tol = 1e-12) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = detail::simpson(f, a, fa, b, fb, m, fm);
  return detail::adapt(f, a, fa, b, fb, m, fm, whole, tol, 0);
}

}  // namespace quad

/// Lienard equation  zdd + f(z) zd + g(z) = 0  with the hypotheses of the
/// isochronous-center criterion: f(0)=g(0)=0, g'(0)>0.
struct LienardSpec {
  RealFn f;
  RealFn g;
  std::optional<double> g_prime0;  // differenced when absent
  double z_lo = -1.0;
  double z_hi = 1.0;

  double gp0() const {
    if (g_prime0) return *g_prime0;
    const double h = 1e-6;
    return (g(h) - g(-h)) / (2.0 * h);
  }

  void validate() const {
    if (std::abs(f(0.0)) > 1e-10) throw InvalidSpec("LienardSpec: f(0) != 0");
    if (std::abs(g(0.0)) > 1e-10) throw InvalidSpec("LienardSpec: g(0) != 0");
    if (!(gp0() > 0.0)) throw InvalidSpec("LienardSpec: g'(0) must be positive");
  }
};

/// tau(z) = (int_0^z s f(s) ds)^2 - z^3 (g(z) - g'(0) z).
/// The center is isochronous exactly when tau vanishes identically.
inline double sabatini_tau(const LienardSpec& spec, double z, double quad_tol = 1e-12) {
  const double I = quad::integrate([&spec](double s) { return s * spec.f(s); }, 0.0, z, quad_tol);
  return I * I - z * z * z * (spec.g(z) - spec.gp0() * z);
}

enum class SabatiniVerdict { IsochronousCenter, NotIsochronous, HypothesesViolated };

inline const char* to_string(SabatiniVerdict v) {
  switch (v) {
    case SabatiniVerdict::IsochronousCenter: return "isochronous_center";
    case SabatiniVerdict::NotIsochronous: return "not_isochronous";
    case SabatiniVerdict::HypothesesViolated: return "hypotheses_violated";
  }
  return "?";
}

/// Checks oddness of f and g on a symmetric grid, then tests max |tau|
/// against tol scaled by z^6 (tau's natural growth for analytic f, g).
inline SabatiniVerdict sabatini_verdict(const LienardSpec& spec, double z_max, int samples,
                                        double tol) {
  spec.validate();
  for (int i = 1; i <= samples; ++i) {
    const double z = z_max * i / samples;
    const double scale = std::max(1.0, std::max(std::abs(spec.f(z)), std::abs(spec.g(z))));
    if (std::abs(spec.f(z) + spec.f(-z)) > tol * scale) return SabatiniVerdict::HypothesesViolated;
    if (std::abs(spec.g(z) + spec.g(-z)) > tol * scale) return SabatiniVerdict::HypothesesViolated;
  }
  double worst = 0.0;
  for (int i = 1; i <= samples; ++i) {
    const double z = z_max * i / samples;
    worst = std::max(worst, std::abs(sabatini_tau(spec, z)) / std::pow(z, 6));
  }
  return worst <= tol ? SabatiniVerdict::IsochronousCenter : SabatiniVerdict::NotIsochronous;
}

/// An involution H on an interval J around 0: H(H(x)) = x, H(0)=0, H'(0)=-1.
struct InvolutionSpec {
  RealFn H;
  std::optional<RealFn> H_prime;  // central-differenced when absent
  double J_lo = -1.0;
  double J_hi = 1.0;
  double omega = 1.0;

  double Hp(double x) const {
    if (H_prime) return (*H_prime)(x);
    const double h = 1e-6;
    return (H(x + h) - H(x - h)) / (2.0 * h);
  }

  /// Grid validation of the involution identities; throws InvalidSpec.
  void validate(int grid = 100, double tol = 1e-8) const {
    if (!(omega > 0.0)) throw InvalidSpec("InvolutionSpec: omega must be positive");
    if (std::abs(H(0.0)) > tol) throw InvalidSpec("InvolutionSpec: H(0) != 0");
    if (std::abs(Hp(0.0) + 1.0) > tol) throw InvalidSpec("InvolutionSpec: H'(0) != -1");
    for (int i = 0; i < grid; ++i) {
      const double x = J_lo + (J_hi - J_lo) * (i + 0.5) / grid;
      const double hx = H(x);
      if (hx <= J_lo || hx >= J_hi) continue;  // image outside J: identity untestable there
      if (std::abs(H(hx) - x) > tol * std::max(1.0, std::abs(x))) {
        throw InvalidSpec("InvolutionSpec: H(H(x)) != x at x=" + std::to_string(x));
      }
    }
  }
};

/// Builds the isochronous potential V(x) = (omega^2/8) (x - H(x))^2 and its
/// gradient g = V'.  Every orbit of  xdd = -g(x)  inside J then has period
/// 2 pi / omega, and g'(0) = omega^2.
inline std::pair<RealFn, RealFn> build_involution_potential(const InvolutionSpec& spec) {
  spec.validate();
  const double w2 = spec.omega * spec.omega;
  const InvolutionSpec s = spec;  // capture by value: pure closures
  RealFn V = [s, w2](double x) {
    const double d = x - s.H(x);
    return w2 / 8.0 * d * d;
  };
  RealFn g = [s, w2](double x) { return w2 / 4.0 * (x - s.H(x)) * (1.0 - s.Hp(x)); };
  return {std::move(V), std::move(g)};
}

/// The candidate background density forced by the odd-nonlinearity
/// isochronicity requirement (positive branch):
///   c(x) = K (M - 2K (x-x0)^2) / (M + K (x-x0)^2)^{5/2}.
/// Its numerator changes sign, which is the whole obstruction.
inline double doping_profile_candidate(double K, double M, double x0, double x) {
  const double u = (x - x0) * (x - x0);
  return K * (M - 2.0 * K * u) / std::pow(M + K * u, 2.5);
}

namespace detail {
// a has profile >= 0, b has profile < 0; returns the sign-change point.
inline double bisect_sign_change(const RealFn& profile, double a, double b) {
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    if (m == a || m == b) break;
    (profile(m) >= 0.0 ? a : b) = m;
  }
  return 0.5 * (a + b);
}
}  // namespace detail

/// Scans [lo, hi] for a negativity witness.  Returns the sign-change point
/// adjacent to the first negative sample (refined by bisection), or
/// nullopt when the profile stays nonnegative.  An interval that is
/// negative throughout yields lo itself.
inline std::optional<double> check_positivity_fails(const RealFn& profile, double lo, double hi,
                                                    int samples = 1000) {
  const double dx = (hi - lo) / samples;
  if (profile(lo) < 0.0) {
    // already negative at the left end: refine forward to the boundary
    for (int i = 1; i <= samples; ++i) {
      const double x = lo + dx * i;
      if (profile(x) >= 0.0) return detail::bisect_sign_change(profile, x, x - dx);
    }
    return lo;
  }
  double x_prev = lo;
  for (int i = 1; i <= samples; ++i) {
    const double x = lo + dx * i;
    if (profile(x) < 0.0) return detail::bisect_sign_change(profile, x_prev, x);
    x_prev = x;
  }
  return std::nullopt;
}

}  // namespace isochrone

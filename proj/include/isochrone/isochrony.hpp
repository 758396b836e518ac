#pragma once

#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "isochrone/core.hpp"
#include "isochrone/integrate.hpp"
#include "isochrone/parallel.hpp"
#include "isochrone/variational.hpp"

namespace isochrone {

/// Maps a family parameter h to an initial characteristic state (x0, Y0).
struct Family {
  std::function<std::pair<double, Vec>(double h)> initial;
  std::string description;

  /// The common amplitude family Y0 = (0, ..., h) at fixed x0.
  static Family amplitude(double x0, int n, const std::string& what = "") {
    Family fam;
    fam.initial = [x0, n](double h) {
      Vec Y0 = Vec::Zero(n);
      Y0[n - 1] = h;
      return std::pair<double, Vec>{x0, Y0};
    };
    fam.description = what.empty() ? "Y0 = (0..0, h), x0 fixed" : what;
    return fam;
  }
};

struct PeriodEntry {
  double h = 0.0;
  double T = 0.0;
  double return_error = 0.0;
  bool closed = true;     // return_error within the closure tolerance
  bool no_return = false; // no section return found at all
};

struct PeriodMap {
  std::vector<PeriodEntry> entries;
  std::string family_description;

  double spread() const {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& e : entries) {
      if (e.no_return) continue;
      lo = std::min(lo, e.T);
      hi = std::max(hi, e.T);
    }
    return hi >= lo ? hi - lo : 0.0;
  }
};

/// Measures the period at N equally spaced family parameters.  Entries
/// whose return error exceeds `closure_tol` are flagged, never dropped.
inline PeriodMap period_map(const SystemDef& sys, const Family& family, double h_lo, double h_hi,
                            int N, const IntegratorConfig& cfg, double closure_tol = 1e-6) {
  PeriodMap pm;
  pm.family_description = family.description;
  pm.entries.resize(N);
  parallel_for(N, [&](int i) {
    const double h = N == 1 ? h_lo : h_lo + (h_hi - h_lo) * i / (N - 1.0);
    auto [x0, Y0] = family.initial(h);
    PeriodEntry e;
    e.h = h;
    Vec s0(sys.n + 1);
    s0[0] = x0;
    s0.tail(sys.n) = Y0;
    try {
      PeriodResult pr = measure_period(char_field(sys), s0, cfg);
      e.T = pr.T;
      e.return_error = pr.return_error;
      e.closed = pr.return_error <= closure_tol;
    } catch (const NoReturn&) {
      e.no_return = true;
      e.closed = false;
    }
    pm.entries[i] = e;
  });
  return pm;
}

/// Central finite differences of T(h) on the sampled table; one-sided at
/// the endpoints.  Needs at least 3 entries.
inline std::vector<std::pair<double, double>> period_derivative(const PeriodMap& pm) {
  const auto& e = pm.entries;
  if (e.size() < 3) throw InsufficientPoints("period_derivative: need >= 3 entries");
  std::vector<std::pair<double, double>> out(e.size());
  const std::size_t n = e.size();
  out[0] = {e[0].h, (e[1].T - e[0].T) / (e[1].h - e[0].h)};
  for (std::size_t i = 1; i + 1 < n; ++i) {
    out[i] = {e[i].h, (e[i + 1].T - e[i - 1].T) / (e[i + 1].h - e[i - 1].h)};
  }
  out[n - 1] = {e[n - 1].h, (e[n - 1].T - e[n - 2].T) / (e[n - 1].h - e[n - 2].h)};
  return out;
}

struct MonodromyResult {
  double T = 0.0;
  Mat M;  // (n+1) x (n+1) fundamental matrix of the (q, y) block at t = T
  std::vector<std::complex<double>> multipliers;
  double dev_identity = 0.0;  // max-norm of M - I
};

/// Fundamental matrix of the linearized (q, y) block over one measured
/// period, assembled column-by-column from the canonical basis vectors,
/// with its Floquet multipliers.
inline MonodromyResult monodromy(const SystemDef& sys, double x0, const Vec& Y0,
                                 const IntegratorConfig& cfg) {
  Vec s0(sys.n + 1);
  s0[0] = x0;
  s0.tail(sys.n) = Y0;
  PeriodResult pr = measure_period(char_field(sys), s0, cfg);

  const int dim = sys.n + 1;
  MonodromyResult res;
  res.T = pr.T;
  res.M = Mat::Zero(dim, dim);
  const Field aug = augment(sys);
  IntegratorConfig c = cfg;
  c.t_max = pr.T;
  std::vector<Vec> cols(dim);
  parallel_for(dim, [&](int j) {
    Vec a0(2 * dim);
    a0[0] = x0;
    a0.segment(1, sys.n) = Y0;
    a0.segment(dim, dim) = Vec::Unit(dim, j);
    Trajectory traj = integrate(aug, a0, c);
    cols[j] = traj.eval(pr.T).segment(dim, dim);
  });
  for (int j = 0; j < dim; ++j) res.M.col(j) = cols[j];

  Eigen::EigenSolver<Mat> es(res.M);
  for (int i = 0; i < dim; ++i) res.multipliers.push_back(es.eigenvalues()[i]);
  res.dev_identity = (res.M - Mat::Identity(dim, dim)).cwiseAbs().maxCoeff();
  return res;
}

enum class Verdict { Isochronous, NonIsochronous, Inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Isochronous: return "isochronous";
    case Verdict::NonIsochronous: return "non_isochronous";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct IsochronyEvidence {
  Verdict verdict = Verdict::Inconclusive;
  PeriodMap period_map;
  std::vector<MonodromyResult> monodromies;  // at three sampled h
  double spread = 0.0;
  double max_dev_identity = 0.0;
  double max_multiplier_modulus = 0.0;
};

/// Numerical isochronicity verdict: period spread over the family plus
/// monodromy deviation at three sampled parameters.  The inconclusive
/// band between tol and 100 tol prevents overclaiming either way.
inline IsochronyEvidence classify_isochronous(const SystemDef& sys, const Family& family,
                                              double h_lo, double h_hi, int N,
                                              const IntegratorConfig& cfg,
                                              double tol_iso = 1e-6) {
  IsochronyEvidence ev;
  ev.period_map = period_map(sys, family, h_lo, h_hi, N, cfg, 100.0 * tol_iso);
  ev.spread = ev.period_map.spread();

  const double probes[3] = {h_lo, 0.5 * (h_lo + h_hi), h_hi};
  for (double h : probes) {
    auto [x0, Y0] = family.initial(h);
    ev.monodromies.push_back(monodromy(sys, x0, Y0, cfg));
  }
  for (const auto& m : ev.monodromies) {
    ev.max_dev_identity = std::max(ev.max_dev_identity, m.dev_identity);
    for (const auto& mu : m.multipliers) {
      ev.max_multiplier_modulus = std::max(ev.max_multiplier_modulus, std::abs(mu));
    }
  }

  if (ev.spread <= tol_iso && ev.max_dev_identity <= 10.0 * tol_iso) {
    ev.verdict = Verdict::Isochronous;
  } else if (ev.spread >= 100.0 * tol_iso ||
             ev.max_multiplier_modulus > 1.0 + 100.0 * tol_iso) {
    ev.verdict = Verdict::NonIsochronous;
  } else {
    ev.verdict = Verdict::Inconclusive;
  }
  return ev;
}

}  // namespace isochrone

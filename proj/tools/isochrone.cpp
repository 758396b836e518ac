// isochrone: characteristic-system analysis front end.
//
// One analysis per invocation; results go to --out files (.json / .csv /
// .svg by extension) plus a one-line summary on stdout.  Exit codes:
//   0  analysis completed (verdicts live in the output)
//   1  usage error
//   2  numerical or I/O failure
//   3  invalid model parameters

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "isochrone/isochrone.hpp"

using namespace isochrone;
using io::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelOpts {
  std::string kind = "plasma";
  int d = 1;
  double gamma = 0.0;
  double c0 = 1.0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--model", kind, "model kind: plasma | calibrated | relativistic | hopf")
        ->capture_default_str();
    cmd->add_option("--d", d, "spatial dimension parameter")->capture_default_str();
    cmd->add_option("--gamma", gamma, "calibration exponent (calibrated only)")
        ->capture_default_str();
    cmd->add_option("--c0", c0, "constant background density (relativistic only)")
        ->capture_default_str();
  }

  SystemDef system() const {
    if (kind == "plasma") return models::plasma_radial(d);
    if (kind == "calibrated") return models::plasma_calibrated(d, gamma);
    if (kind == "relativistic") return models::relativistic_plasma_const(c0);
    if (kind == "hopf") return models::hopf_potential();
    throw InvalidSpec("unknown model kind: " + kind);
  }

  json echo() const {
    json j;
    j["kind"] = kind;
    if (kind == "plasma" || kind == "calibrated") j["d"] = d;
    if (kind == "calibrated") j["gamma"] = gamma;
    if (kind == "relativistic") j["c0"] = c0;
    return j;
  }
};

struct Range {
  double lo = 0.0, hi = 0.0;
  int n = 0;
};

Range parse_range(const std::string& s) {
  Range r;
  char colon1 = 0, colon2 = 0;
  std::istringstream is(s);
  if (!(is >> r.lo >> colon1 >> r.hi >> colon2 >> r.n) || colon1 != ':' || colon2 != ':' ||
      r.n < 1) {
    throw UsageError("expected lo:hi:N, got '" + s + "'");
  }
  return r;
}

std::vector<double> grid(const Range& r) {
  std::vector<double> v(r.n);
  for (int i = 0; i < r.n; ++i) v[i] = r.n == 1 ? r.lo : r.lo + (r.hi - r.lo) * i / (r.n - 1.0);
  return v;
}

Vec to_vec(const std::vector<double>& v) {
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i];
  return out;
}

std::string extension(const std::string& path) {
  const auto dot = path.rfind('.');
  return dot == std::string::npos ? "" : path.substr(dot);
}

/// Writes every requested output, choosing the representation by extension.
void emit(const json& result, const std::optional<std::string>& svg,
          const std::vector<std::string>& outs) {
  for (const auto& path : outs) {
    const std::string ext = extension(path);
    if (ext == ".json") {
      io::write_file(path, result.dump(2) + "\n");
    } else if (ext == ".csv") {
      io::write_file(path, io::csv_from_result(result));
    } else if (ext == ".svg") {
      if (!svg) throw UsageError("no SVG view for analysis " + result.at("analysis").get<std::string>());
      io::write_file(path, *svg);
    } else {
      throw UsageError("unknown output extension: " + path);
    }
  }
}

struct ProfileOpts {
  std::string shape = "gaussian";
  double amp = 0.2;
  double x_lo = -3.0, x_hi = 3.0;
  int N_x = 32;

  void attach(CLI::App* cmd) {
    cmd->add_option("--profile", shape, "initial profile: gaussian | constant")
        ->capture_default_str();
    cmd->add_option("--amp", amp, "profile amplitude")->capture_default_str();
    cmd->add_option("--xlo", x_lo, "window left edge")->capture_default_str();
    cmd->add_option("--xhi", x_hi, "window right edge")->capture_default_str();
    cmd->add_option("--nx", N_x, "number of seeded characteristics")->capture_default_str();
  }

  InitialProfile build(int n) const {
    InitialProfile p;
    p.x_lo = x_lo;
    p.x_hi = x_hi;
    p.N_x = N_x;
    const double a = amp;
    if (shape == "gaussian") {
      p.Y0 = [a, n](double x) {
        Vec v = Vec::Zero(n);
        v[n - 1] = a * std::exp(-x * x);
        return v;
      };
    } else if (shape == "constant") {
      p.Y0 = [a, n](double) {
        Vec v = Vec::Zero(n);
        v[n - 1] = a;
        return v;
      };
      p.Y0_prime = [n](double) { return Vec::Zero(n).eval(); };
    } else {
      throw UsageError("unknown profile shape: " + shape);
    }
    return p;
  }
};

int run(int argc, char** argv) {
  CLI::App app{"characteristic-system simulation and isochronicity analysis"};
  app.require_subcommand(1);
  app.set_config("--config", "", "flat key=value config file with [section] headers");

  ModelOpts model;
  IntegratorConfig cfg;
  std::vector<std::string> outs;
  double rtol = cfg.rtol, atol = cfg.atol;

  const auto common = [&](CLI::App* cmd) {
    cmd->set_help_flag("--help", "print this help");  // frees -h / --h
    model.attach(cmd);
    cmd->add_option("--rtol", rtol, "relative tolerance")->capture_default_str();
    cmd->add_option("--atol", atol, "absolute tolerance")->capture_default_str();
    cmd->add_option("--out", outs, "output file (.json / .csv / .svg); repeatable");
  };

  // --- simulate ---
  auto* sim = app.add_subcommand("simulate", "integrate one characteristic");
  double sim_x0 = 1.0, sim_tmax = 20.0;
  std::vector<double> sim_Y0{0.0, 0.2};
  int sim_stride = 1;
  common(sim);
  sim->add_option("--x0", sim_x0, "initial x")->capture_default_str();
  sim->add_option("--Y0", sim_Y0, "initial Y components")->delimiter(',');
  sim->add_option("--t-max", sim_tmax, "integration horizon")->capture_default_str();
  sim->add_option("--stride", sim_stride, "sample stride in output")->capture_default_str();

  // --- period-map ---
  auto* pmc = app.add_subcommand("period-map", "period vs amplitude over a family");
  double pm_x0 = 1.0;
  std::string pm_h = "0.05:0.3:6";
  common(pmc);
  pmc->add_option("--x0", pm_x0, "family base point")->capture_default_str();
  pmc->add_option("--h", pm_h, "amplitude range lo:hi:N")->capture_default_str();

  // --- monodromy ---
  auto* mon = app.add_subcommand("monodromy", "Floquet monodromy on one orbit");
  double mon_x0 = 1.0;
  std::vector<double> mon_Y0{0.0, 0.2};
  common(mon);
  mon->add_option("--x0", mon_x0, "initial x")->capture_default_str();
  mon->add_option("--Y0", mon_Y0, "initial Y components")->delimiter(',');

  // --- blowup ---
  auto* blo = app.add_subcommand("blowup", "gradient blow-up scan via the q indicator");
  double blo_x0 = 1.0, blo_horizon = 10.0;
  std::vector<double> blo_Y0, blo_y0;
  common(blo);
  blo->add_option("--x0", blo_x0, "initial x")->capture_default_str();
  blo->add_option("--Y0", blo_Y0, "initial Y components (default zeros)")->delimiter(',');
  blo->add_option("--y0", blo_y0, "initial gradient data y (default zeros)")->delimiter(',');
  blo->add_option("--horizon", blo_horizon, "scan horizon")->capture_default_str();

  // --- sabatini ---
  auto* sab = app.add_subcommand("sabatini", "Lienard isochronicity indicator");
  double sab_z = 1.0, sab_tol = 1e-8;
  int sab_samples = 50;
  common(sab);
  sab->add_option("--z", sab_z, "evaluation amplitude")->capture_default_str();
  sab->add_option("--samples", sab_samples, "verdict grid size")->capture_default_str();
  sab->add_option("--tol", sab_tol, "verdict tolerance")->capture_default_str();

  // --- involution ---
  auto* inv = app.add_subcommand("involution", "isochronous potential from an involution");
  double inv_b = 0.0, inv_omega = 1.0;
  std::vector<double> inv_amps{0.2, 0.5, 0.8};
  common(inv);
  inv->add_option("--b", inv_b, "Moebius coefficient of H(x) = -x/(1+bx)")->capture_default_str();
  inv->add_option("--omega", inv_omega, "angular frequency")->capture_default_str();
  inv->add_option("--amps", inv_amps, "amplitudes to test")->delimiter(',');

  // --- field ---
  auto* fld = app.add_subcommand("field", "characteristic fan reconstruction");
  ProfileOpts fld_profile;
  std::string fld_t = "0.5:10:20";
  common(fld);
  fld_profile.attach(fld);
  fld->add_option("--t", fld_t, "snapshot grid lo:hi:N")->capture_default_str();

  // --- crossing ---
  auto* cro = app.add_subcommand("crossing", "characteristic crossing detection");
  ProfileOpts cro_profile;
  double cro_tmax = 100.0, cro_dt = 0.05;
  common(cro);
  cro_profile.attach(cro);
  cro->add_option("--t-max", cro_tmax, "scan horizon")->capture_default_str();
  cro->add_option("--dt", cro_dt, "scan grid spacing")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // usage error, whatever the parser's own code
  }
  cfg.rtol = rtol;
  cfg.atol = atol;

  json result;
  std::optional<std::string> svg;
  std::string summary;

  if (*sim) {
    const SystemDef sys = model.system();
    cfg.t_max = sim_tmax;
    Vec s0(sys.n + 1);
    s0[0] = sim_x0;
    s0.tail(sys.n) = to_vec(sim_Y0);
    Trajectory traj = integrate(char_field(sys), s0, cfg);
    result = io::result_envelope("simulate", model.echo());
    result["result"] = io::trajectory_to_json(traj, sim_stride);
    std::vector<io::Series> series(sys.n + 1);
    for (int k = 0; k <= sys.n; ++k) {
      series[k].name = k == 0 ? "x" : "Y" + std::to_string(k);
      for (std::size_t i = 0; i < traj.ts.size(); ++i) {
        series[k].points.emplace_back(traj.ts[i], traj.ys[i][k]);
      }
    }
    svg = io::svg_plot(series, sys.name, "t", "state");
    summary = "simulate: " + std::string(to_string(traj.termination)) + " at t=" +
              io::format_double(traj.t_end());
  } else if (*pmc) {
    const SystemDef sys = model.system();
    const Range r = parse_range(pm_h);
    cfg.t_max = 100.0;
    PeriodMap pm = period_map(sys, Family::amplitude(pm_x0, sys.n), r.lo, r.hi, r.n, cfg);
    result = io::result_envelope("period-map", model.echo());
    result["result"] = io::to_json(pm);
    io::Series s;
    s.name = "T(h)";
    for (const auto& e : pm.entries) {
      if (!e.no_return) s.points.emplace_back(e.h, e.T);
    }
    svg = io::svg_plot({s}, sys.name + " period map", "h", "T");
    summary = "period-map: " + std::to_string(pm.entries.size()) +
              " points, spread=" + io::format_double(pm.spread());
  } else if (*mon) {
    const SystemDef sys = model.system();
    cfg.t_max = 100.0;
    MonodromyResult m = monodromy(sys, mon_x0, to_vec(mon_Y0), cfg);
    result = io::result_envelope("monodromy", model.echo());
    result["result"] = io::to_json(m);
    summary = "monodromy: T=" + io::format_double(m.T) +
              " dev_identity=" + io::format_double(m.dev_identity);
  } else if (*blo) {
    const SystemDef sys = model.system();
    Vec Y0 = blo_Y0.empty() ? Vec::Zero(sys.n).eval() : to_vec(blo_Y0);
    Vec y0 = blo_y0.empty() ? Vec::Zero(sys.n).eval() : to_vec(blo_y0);
    if (Y0.size() != sys.n || y0.size() != sys.n) {
      throw UsageError("Y0 / y0 must have " + std::to_string(sys.n) + " components");
    }
    BlowupReport rep = detect_blowup(sys, blo_x0, Y0, y0, cfg, blo_horizon);
    result = io::result_envelope("blowup", model.echo());
    result["result"] = io::to_json(rep);
    summary = rep.blown ? "blowup: t_star=" + io::format_double(*rep.t_star)
                        : "blowup: none within horizon " + io::format_double(blo_horizon);
  } else if (*sab) {
    LienardSpec spec;
    if (model.kind == "plasma") {
      spec = models::plasma_lienard(model.d);
    } else if (model.kind == "calibrated") {
      spec = models::plasma_lienard(model.d, model.gamma);
    } else if (model.kind == "relativistic") {
      spec = models::relativistic_lienard(model.c0);
    } else {
      throw UsageError("sabatini needs a Lienard-reducible model");
    }
    const double tau = sabatini_tau(spec, sab_z);
    const SabatiniVerdict v = sabatini_verdict(spec, sab_z, sab_samples, sab_tol);
    result = io::result_envelope("sabatini", model.echo());
    result["result"] = {{"z", sab_z}, {"tau", tau}, {"verdict", to_string(v)}};
    summary = "sabatini: tau(" + io::format_double(sab_z) + ")=" + io::format_double(tau) +
              " verdict=" + to_string(v);
  } else if (*inv) {
    InvolutionSpec spec;
    const double b = inv_b;
    spec.H = [b](double x) { return -x / (1.0 + b * x); };
    spec.omega = inv_omega;
    const double reach = b > 0.0 ? 0.5 / b : 1e6;
    spec.J_lo = -std::min(2.0, reach);
    spec.J_hi = std::min(2.0, reach);
    auto [V, g] = build_involution_potential(spec);
    (void)V;
    const Field f = models::second_order_field(g);
    json periods = json::array();
    double worst = 0.0;
    for (double a : inv_amps) {
      Vec s0(2);
      s0 << a, 0.0;
      cfg.t_max = 10.0 * 2.0 * std::numbers::pi / inv_omega;
      PeriodResult pr = measure_period(f, s0, cfg);
      periods.push_back({{"amplitude", a}, {"T", pr.T}, {"return_error", pr.return_error}});
      worst = std::max(worst, std::abs(pr.T - 2.0 * std::numbers::pi / inv_omega));
    }
    result = io::result_envelope("involution", {{"kind", "involution"}, {"b", inv_b},
                                                {"omega", inv_omega}});
    result["result"] = {{"omega", inv_omega}, {"periods", periods}};
    summary = "involution: max |T - 2 pi/omega| = " + io::format_double(worst);
  } else if (*fld) {
    const SystemDef sys = model.system();
    const InitialProfile p = fld_profile.build(sys.n);
    auto snaps = reconstruct_field(sys, p, grid(parse_range(fld_t)), cfg);
    result = io::result_envelope("field", model.echo());
    result["result"] = {{"snapshots", io::to_json(snaps)}};
    std::vector<io::Series> fan(p.N_x);
    for (int i = 0; i < p.N_x; ++i) {
      fan[i].name = "X" + std::to_string(i);
      for (const auto& s : snaps) {
        if (s.chars[i].alive) fan[i].points.emplace_back(s.t, s.chars[i].X);
      }
    }
    svg = io::svg_plot(fan, sys.name + " characteristic fan", "t", "X");
    bool ordered = true;
    for (const auto& s : snaps) ordered = ordered && s.ordered;
    summary = std::string("field: ") + std::to_string(snaps.size()) + " snapshots, " +
              (ordered ? "ordered" : "crossing detected");
  } else if (*cro) {
    const SystemDef sys = model.system();
    const InitialProfile p = cro_profile.build(sys.n);
    CrossingReport rep = detect_crossing(sys, p, cro_tmax, cfg, cro_dt);
    result = io::result_envelope("crossing", model.echo());
    result["result"] = io::to_json(rep);
    summary = rep.found ? "crossing: t_cross=" + io::format_double(rep.t_cross)
                        : "crossing: none within horizon " + io::format_double(cro_tmax);
  }

  emit(result, svg, outs);
  std::cout << summary << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const InvalidSpec& e) {
    std::cerr << "invalid model: " << e.what() << "\n";
    return 3;
  } catch (const SingularTransformation& e) {
    std::cerr << "invalid model: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

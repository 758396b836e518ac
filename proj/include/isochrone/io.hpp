#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "isochrone/field.hpp"
#include "isochrone/isochrony.hpp"
#include "isochrone/variational.hpp"

namespace isochrone {
namespace io {

using nlohmann::json;

/// 17 significant digits: enough to round-trip any double bit-exactly.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline json result_envelope(const std::string& analysis, json model_echo) {
  json j;
  j["schema_version"] = "1";
  j["analysis"] = analysis;
  j["model"] = std::move(model_echo);
  return j;
}

inline json to_json(const PeriodMap& pm) {
  json j;
  j["family"] = pm.family_description;
  j["spread"] = pm.spread();
  j["entries"] = json::array();
  for (const auto& e : pm.entries) {
    j["entries"].push_back({{"h", e.h},
                            {"T", e.T},
                            {"return_error", e.return_error},
                            {"closed", e.closed},
                            {"no_return", e.no_return}});
  }
  return j;
}

inline json to_json(const BlowupReport& r) {
  json j;
  j["blown"] = r.blown;
  j["t_star"] = r.t_star ? json(*r.t_star) : json(nullptr);
  j["q_min"] = r.q_min;
  j["horizon"] = r.horizon;
  j["state_blowup"] = r.state_blowup;
  return j;
}

inline json to_json(const MonodromyResult& m) {
  json j;
  j["T"] = m.T;
  j["dev_identity"] = m.dev_identity;
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.M.cols(); ++k) row.push_back(m.M(i, k));
    rows.push_back(row);
  }
  j["M"] = rows;
  json mult = json::array();
  for (const auto& mu : m.multipliers) mult.push_back({{"re", mu.real()}, {"im", mu.imag()}});
  j["multipliers"] = mult;
  return j;
}

inline json to_json(const IsochronyEvidence& ev) {
  json j;
  j["verdict"] = to_string(ev.verdict);
  j["spread"] = ev.spread;
  j["max_dev_identity"] = ev.max_dev_identity;
  j["max_multiplier_modulus"] = ev.max_multiplier_modulus;
  j["period_map"] = to_json(ev.period_map);
  j["monodromies"] = json::array();
  for (const auto& m : ev.monodromies) j["monodromies"].push_back(to_json(m));
  return j;
}

inline json to_json(const CrossingReport& r) {
  json j;
  j["found"] = r.found;
  j["i"] = r.i;
  j["j"] = r.j;
  j["t_cross"] = r.found ? json(r.t_cross) : json(nullptr);
  j["t_q_zero"] = r.t_q_zero ? json(*r.t_q_zero) : json(nullptr);
  j["signals_agree"] = r.signals_agree;
  return j;
}

inline json to_json(const std::vector<FieldSnapshot>& snaps) {
  json arr = json::array();
  for (const auto& s : snaps) {
    json js;
    js["t"] = s.t;
    js["ordered"] = s.ordered;
    json chars = json::array();
    for (const auto& c : s.chars) {
      json jc;
      jc["alive"] = c.alive;
      if (c.alive) {
        jc["X"] = c.X;
        jc["q"] = c.q;
        jc["Y"] = std::vector<double>(c.Y.data(), c.Y.data() + c.Y.size());
        jc["y"] = std::vector<double>(c.y.data(), c.y.data() + c.y.size());
      }
      chars.push_back(jc);
    }
    js["chars"] = chars;
    arr.push_back(js);
  }
  return arr;
}

inline json trajectory_to_json(const Trajectory& traj, int stride = 1) {
  json j;
  j["termination"] = to_string(traj.termination);
  json samples = json::array();
  for (std::size_t i = 0; i < traj.ts.size(); i += stride) {
    json row = json::array();
    row.push_back(traj.ts[i]);
    for (Eigen::Index k = 0; k < traj.ys[i].size(); ++k) row.push_back(traj.ys[i][k]);
    samples.push_back(row);
  }
  // keep the final state even when the stride skips it
  if (!traj.ts.empty() && (traj.ts.size() - 1) % stride != 0) {
    json row = json::array();
    row.push_back(traj.ts.back());
    for (Eigen::Index k = 0; k < traj.ys.back().size(); ++k) row.push_back(traj.ys.back()[k]);
    samples.push_back(row);
  }
  j["samples"] = samples;
  return j;
}

// ---- CSV regeneration from the JSON result (single source of truth) ----

namespace detail {
inline std::string num(const json& v) {
  if (v.is_null()) return "";
  return format_double(v.get<double>());
}
}  // namespace detail

/// Renders the canonical CSV view of a JSON result.  The CLI writes CSV
/// through this same function, so JSON -> CSV regeneration is identical
/// by construction.
inline std::string csv_from_result(const json& j) {
  const std::string analysis = j.at("analysis").get<std::string>();
  std::ostringstream os;
  if (analysis == "period-map") {
    os << "h,T,return_error\n";
    for (const auto& e : j.at("result").at("entries")) {
      os << detail::num(e.at("h")) << ',' << detail::num(e.at("T")) << ','
         << detail::num(e.at("return_error")) << '\n';
    }
  } else if (analysis == "simulate") {
    const auto& samples = j.at("result").at("samples");
    std::size_t width = samples.empty() ? 0 : samples.front().size();
    os << "t";
    for (std::size_t k = 1; k < width; ++k) os << ",s" << k;
    os << '\n';
    for (const auto& row : samples) {
      for (std::size_t k = 0; k < row.size(); ++k) {
        if (k) os << ',';
        os << detail::num(row.at(k));
      }
      os << '\n';
    }
  } else if (analysis == "blowup") {
    const auto& r = j.at("result");
    os << "blown,t_star,q_min,horizon\n";
    os << (r.at("blown").get<bool>() ? 1 : 0) << ',' << detail::num(r.at("t_star")) << ','
       << detail::num(r.at("q_min")) << ',' << detail::num(r.at("horizon")) << '\n';
  } else if (analysis == "monodromy") {
    const auto& r = j.at("result");
    os << "multiplier_re,multiplier_im\n";
    for (const auto& mu : r.at("multipliers")) {
      os << detail::num(mu.at("re")) << ',' << detail::num(mu.at("im")) << '\n';
    }
  } else if (analysis == "sabatini") {
    const auto& r = j.at("result");
    os << "z,tau,verdict\n";
    os << detail::num(r.at("z")) << ',' << detail::num(r.at("tau")) << ','
       << r.at("verdict").get<std::string>() << '\n';
  } else if (analysis == "involution") {
    os << "amplitude,T,return_error\n";
    for (const auto& e : j.at("result").at("periods")) {
      os << detail::num(e.at("amplitude")) << ',' << detail::num(e.at("T")) << ','
         << detail::num(e.at("return_error")) << '\n';
    }
  } else if (analysis == "field") {
    os << "t,i,X,q\n";
    for (const auto& snap : j.at("result").at("snapshots")) {
      int i = 0;
      for (const auto& c : snap.at("chars")) {
        if (c.at("alive").get<bool>()) {
          os << detail::num(snap.at("t")) << ',' << i << ',' << detail::num(c.at("X")) << ','
             << detail::num(c.at("q")) << '\n';
        }
        ++i;
      }
    }
  } else if (analysis == "crossing") {
    const auto& r = j.at("result");
    os << "found,i,j,t_cross,t_q_zero\n";
    os << (r.at("found").get<bool>() ? 1 : 0) << ',' << r.at("i").get<int>() << ','
       << r.at("j").get<int>() << ',' << detail::num(r.at("t_cross")) << ','
       << detail::num(r.at("t_q_zero")) << '\n';
  } else {
    throw std::runtime_error("csv_from_result: unknown analysis " + analysis);
  }
  return os.str();
}

// ---- minimal SVG polyline plots, no external assets ----

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

inline std::string svg_plot(const std::vector<Series>& series, const std::string& title,
                            const std::string& xlabel, const std::string& ylabel) {
  const int W = 720, H = 480, ml = 70, mr = 20, mt = 40, mb = 50;
  double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
  for (const auto& s : series) {
    for (auto [x, y] : s.points) {
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  }
  if (x_hi <= x_lo) x_hi = x_lo + 1.0;
  if (y_hi <= y_lo) y_hi = y_lo + 1.0;
  const auto px = [&](double x) { return ml + (x - x_lo) / (x_hi - x_lo) * (W - ml - mr); };
  const auto py = [&](double y) { return H - mb - (y - y_lo) / (y_hi - y_lo) * (H - mt - mb); };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\""
     << H - mb << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
     << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title
     << "</text>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
     << xlabel << "</text>\n";
  os << "<text x=\"16\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
     << H / 2 << ")\">" << ylabel << "</text>\n";
  // axis extent labels
  os << "<text x=\"" << ml << "\" y=\"" << H - mb + 16 << "\" font-size=\"10\">"
     << format_double(x_lo) << "</text>\n";
  os << "<text x=\"" << W - mr << "\" y=\"" << H - mb + 16
     << "\" text-anchor=\"end\" font-size=\"10\">" << format_double(x_hi) << "</text>\n";
  os << "<text x=\"" << ml - 4 << "\" y=\"" << H - mb << "\" text-anchor=\"end\" font-size=\"10\">"
     << format_double(y_lo) << "</text>\n";
  os << "<text x=\"" << ml - 4 << "\" y=\"" << mt + 4
     << "\" text-anchor=\"end\" font-size=\"10\">" << format_double(y_hi) << "</text>\n";
  int ci = 0;
  for (const auto& s : series) {
    os << "<polyline fill=\"none\" stroke=\"" << palette[ci % 8] << "\" stroke-width=\"1.2\" points=\"";
    for (auto [x, y] : s.points) os << px(x) << ',' << py(y) << ' ';
    os << "\"/>\n";
    ++ci;
  }
  os << "</svg>\n";
  return os.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace io
}  // namespace isochrone

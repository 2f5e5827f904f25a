#pragma once

// Curve records, CSV/JSON/SVG writers and the CSV reader.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "capsurf/chebyshev.hpp"
#include "capsurf/continuation.hpp"
#include "capsurf/error.hpp"
#include "capsurf/layout.hpp"
#include "capsurf/problem.hpp"

namespace capsurf::io {

struct CurveRecord {
  int subdomain = 0;
  double tau = 0.0;
  double s = 0.0;
  double r = 0.0;
  double u = 0.0;
  double psi = 0.0;
};

/// One record per grid node; s accumulates across subdomains from 0.
/// Interface points appear once on each side.
inline std::vector<CurveRecord> curve_records(const SolutionVector& v) {
  std::vector<CurveRecord> out;
  double s0 = 0.0;
  const auto subs = unpack(v);
  for (std::size_t k = 0; k < subs.size(); ++k) {
    const auto& sd = subs[k];
    const Vector tau = cheb::chebpts(sd.n).points;
    for (int j = 0; j < sd.n; ++j) {
      out.push_back({static_cast<int>(k), tau[j], s0 + sd.ell * (tau[j] + 1.0), sd.R[j], sd.U[j],
                     sd.Psi[j]});
    }
    s0 += 2.0 * sd.ell;
  }
  return out;
}

inline void write_curve_csv(const std::vector<CurveRecord>& curve, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open " + path + " for writing");
  f << "subdomain,tau,s,r,u,psi\n";
  f << std::setprecision(17);
  for (const auto& c : curve) {
    f << c.subdomain << ',' << c.tau << ',' << c.s << ',' << c.r << ',' << c.u << ',' << c.psi
      << '\n';
  }
  if (!f) throw Error("write failed: " + path);
}

inline std::vector<CurveRecord> read_curve_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open " + path);
  std::string line;
  std::getline(f, line);
  if (line != "subdomain,tau,s,r,u,psi") throw Error("unexpected CSV header in " + path);
  std::vector<CurveRecord> out;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream is(line);
    CurveRecord c;
    if (!(is >> c.subdomain >> c.tau >> c.s >> c.r >> c.u >> c.psi)) {
      throw Error("malformed CSV row in " + path);
    }
    out.push_back(c);
  }
  return out;
}

/// Rebuild the computational vector from curve records; each subdomain's l is
/// half its arc-length span.
inline SolutionVector solution_from_curve(const std::vector<CurveRecord>& curve) {
  std::vector<SubdomainState> subs;
  std::size_t i = 0;
  while (i < curve.size()) {
    const int k = curve[i].subdomain;
    std::size_t j = i;
    while (j < curve.size() && curve[j].subdomain == k) ++j;
    SubdomainState sd;
    sd.n = static_cast<int>(j - i);
    sd.R.resize(sd.n);
    sd.U.resize(sd.n);
    sd.Psi.resize(sd.n);
    for (std::size_t q = i; q < j; ++q) {
      const auto idx = static_cast<Eigen::Index>(q - i);
      sd.R[idx] = curve[q].r;
      sd.U[idx] = curve[q].u;
      sd.Psi[idx] = curve[q].psi;
    }
    sd.ell = 0.5 * (curve[j - 1].s - curve[i].s);
    subs.push_back(std::move(sd));
    i = j;
  }
  return pack(subs);
}

inline nlohmann::json finite_or_null(double x) {
  return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

inline nlohmann::json report_json(const SolveReport& rep, const ProblemSpec& spec) {
  nlohmann::json j;
  j["converged"] = rep.converged;
  j["status"] = rep.converged ? "converged" : "dnc";
  j["problem"] = std::string(to_string(spec.kind));
  j["a"] = spec.a;
  j["b"] = spec.b;
  j["psia"] = spec.psi_a;
  j["psib"] = spec.psi_b;
  j["kappa"] = spec.kappa;
  j["method"] = std::string(to_string(rep.method));
  j["delta"] = rep.delta;
  j["n_v"] = rep.n_v;
  j["n_N"] = rep.n_N;
  j["res_newton"] = finite_or_null(rep.res_newton);
  j["res_bvp"] = finite_or_null(rep.res_bvp);
  j["per_domain_n"] = rep.per_domain_n;
  j["refinements"] = rep.refinements;
  j["continuation_steps"] = rep.continuation_steps;
  j["completed_steps"] = rep.completed_steps;
  j["failed_step"] = rep.failed_step;
  j["message"] = rep.message;
  j["tol_newton"] = spec.tol_newton;
  j["tol_bvp"] = spec.tol_bvp;
  j["wall_time"] = rep.wall_time;
  return j;
}

inline void write_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open " + path + " for writing");
  f << j.dump(2) << '\n';
  if (!f) throw Error("write failed: " + path);
}

/// Static SVG of the generating curve: densely interpolated polyline per
/// subdomain, dots at the grid nodes, vertical lines at the radii of interest,
/// and for P1 the reflection across the axis. Axes use equal scaling.
inline void emit_plot(const std::vector<CurveRecord>& curve, const ProblemSpec& spec,
                      const std::string& path) {
  if (curve.empty()) throw Error("emit_plot: empty curve");

  std::vector<std::vector<std::pair<double, double>>> lines;
  {
    const SolutionVector v = solution_from_curve(curve);
    for (const auto& sd : unpack(v)) {
      std::vector<std::pair<double, double>> pts;
      constexpr int kSamples = 240;
      for (int i = 0; i <= kSamples; ++i) {
        const double t = -std::cos(std::numbers::pi * i / kSamples);
        pts.emplace_back(cheb::interpolate(sd.R, t), cheb::interpolate(sd.U, t));
      }
      lines.push_back(std::move(pts));
    }
  }
  std::vector<double> markers;
  if (spec.kind == ProblemKind::P1) {
    markers = {-spec.b, spec.b};
  } else {
    markers = {spec.a, spec.b};
  }
  const bool reflect = spec.kind == ProblemKind::P1;

  double rmin = std::numeric_limits<double>::infinity(), rmax = -rmin;
  double umin = rmin, umax = -rmin;
  for (const auto& l : lines) {
    for (auto [r, u] : l) {
      rmin = std::min({rmin, r, reflect ? -r : r});
      rmax = std::max({rmax, r, reflect ? -r : r});
      umin = std::min(umin, u);
      umax = std::max(umax, u);
    }
  }
  for (double m : markers) {
    rmin = std::min(rmin, m);
    rmax = std::max(rmax, m);
  }
  const double pad = 0.05 * std::max({rmax - rmin, umax - umin, 1e-6});
  rmin -= pad;
  rmax += pad;
  umin -= pad;
  umax += pad;
  const double width = 800.0;
  const double scale = width / (rmax - rmin);
  const double height = std::max(50.0, scale * (umax - umin));
  auto X = [&](double r) { return (r - rmin) * scale; };
  auto Y = [&](double u) { return height - (u - umin) * scale; };

  std::ofstream f(path);
  if (!f) throw Error("cannot open " + path + " for writing");
  f << std::setprecision(6);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" viewBox=\"0 0 " << width << ' ' << height << "\" data-axis-scaling=\"equal\">\n";
  f << "<!-- generating curve; r in [" << rmin << ", " << rmax << "], u in [" << umin << ", "
    << umax << "]; axis scaling: equal -->\n";
  f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (double m : markers) {
    f << "<line class=\"radius-marker\" x1=\"" << X(m) << "\" y1=\"0\" x2=\"" << X(m)
      << "\" y2=\"" << height << "\" stroke=\"gray\" stroke-width=\"1\"/>\n";
  }
  auto polyline = [&](const std::vector<std::pair<double, double>>& pts, double sign,
                      const char* cls, const char* extra) {
    f << "<polyline class=\"" << cls << "\" fill=\"none\" stroke=\"navy\" stroke-width=\"1.5\" "
      << extra << " points=\"";
    for (auto [r, u] : pts) f << X(sign * r) << ',' << Y(u) << ' ';
    f << "\"/>\n";
  };
  for (const auto& l : lines) {
    polyline(l, 1.0, "curve", "");
    if (reflect) polyline(l, -1.0, "reflection", "stroke-dasharray=\"4 3\" opacity=\"0.6\"");
  }
  for (const auto& c : curve) {
    f << "<circle class=\"node\" cx=\"" << X(c.r) << "\" cy=\"" << Y(c.u)
      << "\" r=\"1.8\" fill=\"crimson\"/>\n";
  }
  f << "</svg>\n";
  if (!f) throw Error("write failed: " + path);
}

}  // namespace capsurf::io

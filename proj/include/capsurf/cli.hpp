#pragma once

// Command-line front end. Exit codes: 0 converged, 1 usage error, 2 dnc.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "capsurf/auto_method.hpp"
#include "capsurf/continuation.hpp"
#include "capsurf/output.hpp"
#include "capsurf/problem.hpp"

namespace capsurf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitDnc = 2;

class UsageError : public Error {
 public:
  using Error::Error;
};

struct RunConfig {
  ProblemSpec spec;
  bool has_a = false;
  bool has_b = false;
  std::string out_curve;
  std::string out_report;
  std::string out_plot;
  int verbosity = 0;
};

inline double pi_fraction(const std::vector<double>& pq) {
  if (pq.size() != 2 || pq[1] == 0.0) throw UsageError("pi fraction needs two numbers p q, q != 0");
  return pq[0] / pq[1] * std::numbers::pi;
}

/// Apply a JSON object of RunConfig fields onto `cfg`.
inline void apply_json(RunConfig& cfg, const nlohmann::json& j) {
  if (!j.is_object()) throw UsageError("configuration must be a JSON object");
  try {
    for (const auto& [key, val] : j.items()) {
      if (key == "problem") {
        const auto p = val.get<std::string>();
        if (p != "p1" && p != "p2") throw UsageError("problem must be p1 or p2");
        cfg.spec.kind = p == "p1" ? ProblemKind::P1 : ProblemKind::P2;
      } else if (key == "a") {
        cfg.spec.a = val.get<double>();
        cfg.has_a = true;
      } else if (key == "b") {
        cfg.spec.b = val.get<double>();
        cfg.has_b = true;
      } else if (key == "psia") {
        cfg.spec.psi_a = val.get<double>();
      } else if (key == "psib") {
        cfg.spec.psi_b = val.get<double>();
      } else if (key == "psia_pi_frac") {
        cfg.spec.psi_a = pi_fraction(val.get<std::vector<double>>());
      } else if (key == "psib_pi_frac") {
        cfg.spec.psi_b = pi_fraction(val.get<std::vector<double>>());
      } else if (key == "kappa") {
        cfg.spec.kappa = val.get<double>();
      } else if (key == "method") {
        const auto m = parse_method(val.get<std::string>());
        if (!m) throw UsageError("unknown method " + val.get<std::string>());
        cfg.spec.method = *m;
      } else if (key == "delta") {
        cfg.spec.delta = val.get<double>();
      } else if (key == "n0") {
        cfg.spec.n0 = val.get<int>();
      } else if (key == "tol_newton") {
        cfg.spec.tol_newton = val.get<double>();
      } else if (key == "tol_bvp") {
        cfg.spec.tol_bvp = val.get<double>();
      } else if (key == "max_iter") {
        cfg.spec.max_newton_iter = val.get<int>();
      } else if (key == "n_max") {
        cfg.spec.n_max = val.get<int>();
      } else if (key == "out_curve") {
        cfg.out_curve = val.get<std::string>();
      } else if (key == "out_report") {
        cfg.out_report = val.get<std::string>();
      } else if (key == "out_plot") {
        cfg.out_plot = val.get<std::string>();
      } else if (key == "verbosity") {
        cfg.verbosity = val.get<int>();
      } else {
        throw UsageError("unknown configuration key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("bad configuration value: ") + e.what());
  }
}

inline nlohmann::json load_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot open " + path);
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("invalid JSON in " + path + ": " + e.what());
  }
}

/// Resolve and validate; throws UsageError on any inconsistency.
inline ProblemSpec checked_spec(const RunConfig& cfg) {
  if (!cfg.has_b) throw UsageError("--b is required");
  if (cfg.spec.kind == ProblemKind::P2 && !cfg.has_a) throw UsageError("--a is required for p2");
  ProblemSpec spec = resolve_method(cfg.spec);
  try {
    validate(spec);
  } catch (const InvalidSpec& e) {
    throw UsageError(e.what());
  }
  return spec;
}

/// Solve one configuration and write the requested artifacts.
inline int run_case(const RunConfig& cfg, std::ostream& log, SolveReport* report_out = nullptr,
                    ProblemSpec* spec_out = nullptr) {
  const ProblemSpec spec = checked_spec(cfg);
  RunResult res = run(spec);
  const SolveReport& rep = res.report;
  if (report_out) *report_out = rep;
  if (spec_out) *spec_out = res.spec;

  if (!cfg.out_report.empty()) io::write_json(io::report_json(rep, res.spec), cfg.out_report);
  if (res.solution.n_v() > 0) {
    const auto curve = io::curve_records(res.solution);
    if (!cfg.out_curve.empty()) io::write_curve_csv(curve, cfg.out_curve);
    if (!cfg.out_plot.empty()) io::emit_plot(curve, res.spec, cfg.out_plot);
  }
  if (cfg.verbosity > 0 || !rep.converged) {
    log << (rep.converged ? "converged" : "dnc") << ": method=" << to_string(rep.method)
        << " n_v=" << rep.n_v << " n_N=" << rep.n_N << " res_newton=" << rep.res_newton
        << " res_bvp=" << rep.res_bvp;
    if (!rep.converged) log << " step=" << rep.failed_step << " (" << rep.message << ")";
    log << '\n';
  }
  return rep.converged ? kExitOk : kExitDnc;
}

/// Cases of a sweep file: {"out_dir": ..., "base": {...}, "cases": [{...}]} or
/// {"base": {...}, "vary": {"key": [v1, v2, ...], ...}} (cartesian product).
inline std::vector<nlohmann::json> sweep_cases(const nlohmann::json& sweep) {
  const nlohmann::json base = sweep.value("base", nlohmann::json::object());
  std::vector<nlohmann::json> out;
  if (sweep.contains("cases")) {
    for (const auto& c : sweep.at("cases")) {
      nlohmann::json merged = base;
      merged.update(c);
      out.push_back(merged);
    }
    return out;
  }
  out.push_back(base);
  if (sweep.contains("vary")) {
    for (const auto& [key, values] : sweep.at("vary").items()) {
      if (!values.is_array() || values.empty()) {
        throw UsageError("sweep list for '" + key + "' must be a non-empty array");
      }
      std::vector<nlohmann::json> next;
      for (const auto& partial : out) {
        for (const auto& v : values) {
          nlohmann::json c = partial;
          c[key] = v;
          next.push_back(c);
        }
      }
      out = std::move(next);
    }
  }
  return out;
}

inline int run_sweep(const RunConfig& defaults, const std::string& sweep_path, std::ostream& log) {
  const nlohmann::json sweep = load_json(sweep_path);
  if (!sweep.is_object()) throw UsageError("sweep file must hold a JSON object");
  const std::filesystem::path dir = sweep.value("out_dir", std::string("sweep_out"));
  const auto cases = sweep_cases(sweep);
  if (cases.empty()) throw UsageError("sweep has no cases");

  std::vector<RunConfig> configs;
  for (const auto& c : cases) {
    RunConfig cfg = defaults;
    apply_json(cfg, c);
    checked_spec(cfg);
    configs.push_back(cfg);
  }
  std::filesystem::create_directories(dir);
  std::ofstream summary(dir / "summary.csv");
  if (!summary) throw Error("cannot write " + (dir / "summary.csv").string());
  summary << "a,b,psia,psib,method,n_v,n_N,delta,converged\n" << std::setprecision(17);
  bool all_ok = true;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    RunConfig cfg = configs[i];
    std::ostringstream stem;
    stem << "case_" << std::setw(3) << std::setfill('0') << i;
    cfg.out_report = (dir / (stem.str() + ".json")).string();
    cfg.out_curve = (dir / (stem.str() + ".csv")).string();
    if (!configs[i].out_plot.empty()) cfg.out_plot = (dir / (stem.str() + ".svg")).string();
    SolveReport rep;
    ProblemSpec spec;
    const int code = run_case(cfg, log, &rep, &spec);
    all_ok = all_ok && code == kExitOk;
    summary << spec.a << ',' << spec.b << ',' << spec.psi_a << ',' << spec.psi_b << ','
            << to_string(rep.method) << ',' << rep.n_v << ',' << rep.n_N << ',' << rep.delta
            << ',' << (rep.converged ? "true" : "false") << '\n';
  }
  return all_ok ? kExitOk : kExitDnc;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Spectral solver for bounded radially symmetric capillary surfaces"};
  std::string problem, method, config_path, sweep_path;
  double a = 0, b = 0, psia = 0, psib = 0, kappa = 1, delta = 0, tol_newton = 0, tol_bvp = 0;
  std::vector<double> psia_frac, psib_frac;
  int n0 = 0, max_iter = 0, n_max = 0, verbosity = 0;
  RunConfig cfg;

  app.add_option("--config", config_path, "JSON configuration file (flags override)");
  app.add_option("--problem", problem, "p1 (disk) or p2 (annulus)")
      ->check(CLI::IsMember({"p1", "p2"}));
  app.add_option("--a", a, "inner radius (p2)");
  app.add_option("--b", b, "outer radius");
  app.add_option("--psia", psia, "inclination at r = a, radians");
  app.add_option("--psib", psib, "inclination at r = b, radians");
  app.add_option("--psia-pi-frac", psia_frac, "psi_a = (p/q) pi")->expected(2);
  app.add_option("--psib-pi-frac", psib_frac, "psi_b = (p/q) pi")->expected(2);
  app.add_option("--kappa", kappa, "capillary constant (default 1)");
  app.add_option("--method", method, "base|p1-3z|3rz|2rz|a2rz|auto")
      ->check(CLI::IsMember({"base", "p1-3z", "3rz", "2rz", "a2rz", "auto"}));
  app.add_option("--delta", delta, "subdomain offset for multi-scale methods");
  app.add_option("--n0", n0, "initial points per subdomain (default 15)");
  app.add_option("--tol-newton", tol_newton, "Newton step tolerance (default 1e-13)");
  app.add_option("--tol-bvp", tol_bvp, "residual tolerance (default 1e-12)");
  app.add_option("--max-iter", max_iter, "Newton iterations per run (default 300)");
  app.add_option("--n-max", n_max, "largest grid per subdomain (default 2048)");
  app.add_option("--out-curve", cfg.out_curve, "curve CSV path");
  app.add_option("--out-report", cfg.out_report, "report JSON path");
  app.add_option("--out-plot", cfg.out_plot, "SVG plot path");
  app.add_option("--sweep", sweep_path, "JSON sweep specification");
  app.add_flag("-v,--verbose", verbosity, "print a summary line");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (!config_path.empty()) {
      const std::string curve = cfg.out_curve, report = cfg.out_report, plot = cfg.out_plot;
      apply_json(cfg, load_json(config_path));
      if (!curve.empty()) cfg.out_curve = curve;
      if (!report.empty()) cfg.out_report = report;
      if (!plot.empty()) cfg.out_plot = plot;
    }
    if (app.count("--problem")) cfg.spec.kind = problem == "p1" ? ProblemKind::P1 : ProblemKind::P2;
    if (app.count("--a")) {
      cfg.spec.a = a;
      cfg.has_a = true;
    }
    if (app.count("--b")) {
      cfg.spec.b = b;
      cfg.has_b = true;
    }
    if (app.count("--psia")) cfg.spec.psi_a = psia;
    if (app.count("--psib")) cfg.spec.psi_b = psib;
    if (app.count("--psia-pi-frac")) cfg.spec.psi_a = pi_fraction(psia_frac);
    if (app.count("--psib-pi-frac")) cfg.spec.psi_b = pi_fraction(psib_frac);
    if (app.count("--kappa")) cfg.spec.kappa = kappa;
    if (app.count("--method")) cfg.spec.method = *parse_method(method);
    if (app.count("--delta")) cfg.spec.delta = delta;
    if (app.count("--n0")) cfg.spec.n0 = n0;
    if (app.count("--tol-newton")) cfg.spec.tol_newton = tol_newton;
    if (app.count("--tol-bvp")) cfg.spec.tol_bvp = tol_bvp;
    if (app.count("--max-iter")) cfg.spec.max_newton_iter = max_iter;
    if (app.count("--n-max")) cfg.spec.n_max = n_max;
    cfg.verbosity = std::max(cfg.verbosity, verbosity);

    if (!sweep_path.empty()) return run_sweep(cfg, sweep_path, out);
    return run_case(cfg, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace capsurf::cli

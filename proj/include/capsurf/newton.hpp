#pragma once

// Newton iteration on a collocation system, resolution checks and grid
// refinement.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "capsurf/chebyshev.hpp"
#include "capsurf/error.hpp"
#include "capsurf/layout.hpp"
#include "capsurf/system.hpp"

namespace capsurf {

struct NewtonSettings {
  double tol_newton = 1e-13;
  double tol_bvp = 1e-12;
  int max_iter = 300;
  double refine_factor = 1.4;
  double aggressive_factor = 2.0;
  int n_max = 2048;
  /// Tail-coefficient ratio of Psi at or below which a subdomain is resolved.
  double resolved_tail = 1e-11;
  /// Tail ratio above which the Psi interpolant counts as oscillatory.
  double oscillatory_tail = 1e-2;
  int max_halvings = 10;
  /// Reciprocal condition estimate below which L(v) is treated as singular.
  double min_rcond = 1e-15;
};

enum class NewtonStatus { Converged, MaxIterations, Singular, Diverged };

inline const char* to_string(NewtonStatus s) {
  switch (s) {
    case NewtonStatus::Converged: return "converged";
    case NewtonStatus::MaxIterations: return "max-iterations";
    case NewtonStatus::Singular: return "singular";
    case NewtonStatus::Diverged: return "diverged";
  }
  return "?";
}

struct NewtonResult {
  SolutionVector v;
  NewtonStatus status = NewtonStatus::MaxIterations;
  int iterations = 0;
  double res_newton = std::numeric_limits<double>::infinity();
  double res_bvp = std::numeric_limits<double>::infinity();
  /// ||dv||/||v|| per iteration.
  std::vector<double> history;
  int rejected_steps = 0;
};

/// Physical admissibility: positive bounded arc-lengths and the radius sign
/// pattern each subdomain requires.
inline bool admissible(const CollocationSystem& sys, const SolutionVector& v) {
  if (!v.data.allFinite()) return false;
  for (int k = 0; k < sys.count(); ++k) {
    const double ell = v.ell(k);
    if (!(ell > 0.0) || ell > sys.ell_max) return false;
    const auto R = v.segment(k, Field::R);
    switch (sys.subdomains[static_cast<std::size_t>(k)].sign) {
      case RadiusSign::Positive:
        if (!(R.minCoeff() > 0.0)) return false;
        break;
      case RadiusSign::Negative:
        if (!(R.maxCoeff() < 0.0)) return false;
        break;
      case RadiusSign::Any:
        break;
    }
  }
  return true;
}

inline double relative_residual(const CollocationSystem& sys, const SolutionVector& v) {
  return residual(sys, v).norm() / v.data.norm();
}

/// Newton's method v <- v - L(v)^{-1} N(v) with dense partially pivoted LU.
/// Steps that leave the admissible set are halved up to max_halvings times.
///
/// `Problem` provides
///   ResidualAssembly assemble(const SolutionVector&) const  (may throw NonFinite)
///   bool admissible(const SolutionVector&) const
template <class Problem>
NewtonResult newton_iterate(const Problem& problem, SolutionVector v0,
                            const NewtonSettings& settings) {
  NewtonResult out;
  out.v = std::move(v0);
  if (!problem.admissible(out.v)) {
    out.status = NewtonStatus::Diverged;
    return out;
  }
  auto rel_residual = [&](const SolutionVector& v) {
    return problem.assemble(v).residual.norm() / v.data.norm();
  };
  for (int it = 0; it < settings.max_iter; ++it) {
    ResidualAssembly a;
    try {
      a = problem.assemble(out.v);
    } catch (const NonFinite&) {
      out.status = NewtonStatus::Diverged;
      return out;
    }
    const Eigen::PartialPivLU<Matrix> lu(a.jacobian);
    if (!(lu.rcond() > settings.min_rcond)) {
      out.status = NewtonStatus::Singular;
      return out;
    }
    const Vector dv = lu.solve(a.residual);
    if (!dv.allFinite()) {
      out.status = NewtonStatus::Singular;
      return out;
    }
    ++out.iterations;

    double step = 1.0;
    SolutionVector trial{out.v.layout, out.v.data - dv};
    int halvings = 0;
    while (!problem.admissible(trial) && halvings < settings.max_halvings) {
      step *= 0.5;
      ++halvings;
      trial.data = out.v.data - step * dv;
    }
    if (!problem.admissible(trial)) {
      out.status = NewtonStatus::Diverged;
      return out;
    }
    if (halvings > 0) ++out.rejected_steps;
    out.v = std::move(trial);
    out.res_newton = step * dv.norm() / out.v.data.norm();
    out.history.push_back(out.res_newton);
    if (step == 1.0 && out.res_newton <= settings.tol_newton) {
      try {
        out.res_bvp = rel_residual(out.v);
      } catch (const NonFinite&) {
        out.status = NewtonStatus::Diverged;
        return out;
      }
      out.status = NewtonStatus::Converged;
      return out;
    }
  }
  try {
    out.res_bvp = rel_residual(out.v);
  } catch (const NonFinite&) {
    out.status = NewtonStatus::Diverged;
    return out;
  }
  out.status = NewtonStatus::MaxIterations;
  return out;
}

namespace detail {

struct SystemProblem {
  const CollocationSystem& sys;
  [[nodiscard]] ResidualAssembly assemble(const SolutionVector& v) const {
    return capsurf::assemble(sys, v);
  }
  [[nodiscard]] bool admissible(const SolutionVector& v) const { return capsurf::admissible(sys, v); }
};

}  // namespace detail

inline NewtonResult newton_solve(const CollocationSystem& sys, SolutionVector v0,
                                 const NewtonSettings& settings) {
  return newton_iterate(detail::SystemProblem{sys}, std::move(v0), settings);
}

enum class Resolution { Resolved, Underresolved, Oscillatory };

inline const char* to_string(Resolution r) {
  switch (r) {
    case Resolution::Resolved: return "resolved";
    case Resolution::Underresolved: return "underresolved";
    case Resolution::Oscillatory: return "oscillatory";
  }
  return "?";
}

struct ResolutionVerdict {
  Resolution verdict = Resolution::Underresolved;
  double residual = 0.0;
  double tail = 0.0;
};

inline Resolution classify(double subdomain_residual, double tail, const NewtonSettings& s) {
  if (tail > s.oscillatory_tail) return Resolution::Oscillatory;
  if (subdomain_residual <= s.tol_bvp && tail <= s.resolved_tail) return Resolution::Resolved;
  return Resolution::Underresolved;
}

/// Per-subdomain verdict from the subdomain's ODE residual rows (relative to
/// ||v||) and the Chebyshev tail of Psi.
inline std::vector<ResolutionVerdict> check_resolution(const CollocationSystem& sys,
                                                       const SolutionVector& v,
                                                       const NewtonSettings& settings) {
  const ResidualAssembly a = assemble(sys, v, false);
  const double vnorm = v.data.norm();
  std::vector<ResolutionVerdict> out;
  for (int k = 0; k < sys.count(); ++k) {
    ResolutionVerdict r;
    r.residual = subdomain_residual(a, k).norm() / vnorm;
    r.tail = cheb::tail_ratio(v.segment(k, Field::Psi));
    r.verdict = classify(r.residual, r.tail, settings);
    out.push_back(r);
  }
  return out;
}

inline bool all_resolved(const std::vector<ResolutionVerdict>& verdicts) {
  for (const auto& v : verdicts) {
    if (v.verdict != Resolution::Resolved) return false;
  }
  return true;
}

/// Grid size after one refinement step.
inline int grown_size(int n, double factor, bool odd_grid) {
  int grown = static_cast<int>(std::ceil(factor * n - 1e-9));
  grown = std::max(grown, n + 1);
  if (odd_grid && grown % 2 == 0) ++grown;
  return grown;
}

/// Resample every field of subdomain k onto a grid of size n_new.
inline SolutionVector resize_subdomains(const SolutionVector& v, const std::vector<int>& sizes) {
  auto subs = unpack(v);
  for (std::size_t k = 0; k < subs.size(); ++k) {
    auto& s = subs[k];
    const int n_new = sizes[k];
    if (n_new == s.n) continue;
    s.R = cheb::resample(s.R, n_new);
    s.U = cheb::resample(s.U, n_new);
    s.Psi = cheb::resample(s.Psi, n_new);
    s.n = n_new;
  }
  return pack(subs);
}

/// Grow the grids of the unresolved subdomains and resample; arc-lengths are
/// kept. Returns nullopt when a grid would exceed n_max.
inline std::optional<SolutionVector> refine(const CollocationSystem& sys, const SolutionVector& v,
                                            const std::vector<Resolution>& verdicts,
                                            const NewtonSettings& settings) {
  std::vector<int> sizes = v.layout.sizes;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    const bool odd = sys.subdomains[k].odd_grid;
    switch (verdicts[k]) {
      case Resolution::Resolved:
        break;
      case Resolution::Underresolved:
        sizes[k] = grown_size(sizes[k], settings.refine_factor, odd);
        break;
      case Resolution::Oscillatory:
        sizes[k] = grown_size(sizes[k], settings.aggressive_factor, odd);
        break;
    }
    if (sizes[k] > settings.n_max) return std::nullopt;
  }
  return resize_subdomains(v, sizes);
}

}  // namespace capsurf

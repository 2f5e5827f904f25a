#pragma once

// Initial guesses, angle continuation and the adaptive solve loop.

#include <chrono>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "capsurf/auto_method.hpp"
#include "capsurf/capillary.hpp"
#include "capsurf/chebyshev.hpp"
#include "capsurf/layout.hpp"
#include "capsurf/multiscale.hpp"
#include "capsurf/newton.hpp"
#include "capsurf/problem.hpp"

namespace capsurf {

inline constexpr double kHalfPi = std::numbers::pi / 2;

struct ContinuationStep {
  double psi_a = 0.0;
  double psi_b = 0.0;
  Method method = Method::Base;
};

struct ContinuationPlan {
  std::vector<ContinuationStep> steps;

  [[nodiscard]] bool active() const { return steps.size() > 1; }
};

/// Linearly spaced magnitudes pi/2 .. |target| with the sign of target, or
/// the constant target when |target| <= pi/2.
inline std::vector<double> angle_path(double target, int count) {
  std::vector<double> out(static_cast<std::size_t>(count), target);
  if (std::abs(target) <= kHalfPi) return out;
  const double sign = target < 0.0 ? -1.0 : 1.0;
  const double mag = std::abs(target);
  for (int i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] = sign * (kHalfPi + (mag - kHalfPi) * i / (count - 1));
  }
  out.back() = target;
  return out;
}

/// `spec.method` must be resolved.
inline ContinuationPlan plan_continuation(const ProblemSpec& spec) {
  const bool p2 = spec.kind == ProblemKind::P2;
  const bool needs = std::abs(spec.psi_b) > kHalfPi || (p2 && std::abs(spec.psi_a) > kHalfPi);
  ContinuationPlan plan;
  if (!needs) {
    plan.steps.push_back({p2 ? spec.psi_a : 0.0, spec.psi_b, spec.method});
    return plan;
  }
  const int count =
      spec.method == Method::A2RZ ? spec.a2rz_continuation_steps : spec.continuation_steps;
  const auto pb = angle_path(spec.psi_b, count);
  const auto pa = p2 ? angle_path(spec.psi_a, count) : std::vector<double>(pb.size(), 0.0);
  for (int i = 0; i < count; ++i) {
    Method m = spec.method;
    if (spec.method == Method::A2RZ && i + 1 < count) m = Method::TwoRZ;
    plan.steps.push_back({pa[static_cast<std::size_t>(i)], pb[static_cast<std::size_t>(i)], m});
  }
  return plan;
}

inline ProblemSpec with_angles(ProblemSpec spec, const ContinuationStep& step) {
  spec.psi_a = step.psi_a;
  spec.psi_b = step.psi_b;
  return spec;
}

// ---------------------------------------------------------------------------
// Initial guesses

/// Curve piece with a prescribed inclination profile: R and U follow by
/// integrating cos/sin of Psi, with l chosen so R runs from r_start to r_end.
/// The height is anchored to `u_anchor` at the left (anchor_right = false) or
/// right end.
inline SubdomainState curve_from_angles(const Vector& psi, double r_start, double r_end,
                                        double u_anchor, bool anchor_right) {
  const auto n = static_cast<int>(psi.size());
  const Vector C = cheb::cumsum(psi.array().cos().matrix());
  const Vector S = cheb::cumsum(psi.array().sin().matrix());
  if (!(std::abs(C[n - 1]) > 1e-12)) {
    throw SeedFailure("inclination profile has no net radial extent");
  }
  SubdomainState s;
  s.n = n;
  s.Psi = psi;
  s.ell = (r_end - r_start) / C[n - 1];
  s.R = (r_start + s.ell * C.array()).matrix();
  s.U = s.ell * S;
  const double shift = u_anchor - (anchor_right ? s.U[n - 1] : s.U[0]);
  s.U.array() += shift;
  s.R[0] = r_start;
  s.R[n - 1] = r_end;
  return s;
}

/// Piece with Psi linear in tau from psi_left to psi_right: a circular arc.
inline SubdomainState arc_piece(int n, double psi_left, double psi_right, double r_start,
                                double r_end, double u_anchor, bool anchor_right) {
  const Vector tau = cheb::chebpts(n).points;
  const Vector psi = (psi_left + 0.5 * (psi_right - psi_left) * (tau.array() + 1.0)).matrix();
  return curve_from_angles(psi, r_start, r_end, u_anchor, anchor_right);
}

/// Base-layout guess at the spec's (working) angles.
///
/// P1: circular arc Psi = psi_b * tau through r = -b .. b, shifted so that
/// kappa * u(b) = 2 sin(psi_b) / b.
/// P2: Psi = psi_a ((1-tau)/2)^2 + psi_b ((1+tau)/2)^2, shifted so the
/// r-weighted mean height matches the vertical force balance
/// kappa * mean(u) (b^2 - a^2)/2 = b sin(psi_b) - a sin(psi_a).
inline SolutionVector initial_guess_base(const ProblemSpec& spec, int n) {
  if (spec.kind == ProblemKind::P1) {
    if (n % 2 == 0) ++n;
    const double u_b = 2.0 * std::sin(spec.psi_b) / (spec.kappa * spec.b);
    return pack({arc_piece(n, -spec.psi_b, spec.psi_b, -spec.b, spec.b, u_b, true)});
  }
  const Vector tau = cheb::chebpts(n).points;
  const Vector wl = (0.5 * (1.0 - tau.array())).square().matrix();
  const Vector wr = (0.5 * (1.0 + tau.array())).square().matrix();
  const Vector psi = spec.psi_a * wl + spec.psi_b * wr;
  SubdomainState s = curve_from_angles(psi, spec.a, spec.b, 0.0, false);
  // r-weighted mean of the unshifted height, by quadrature in tau.
  const Vector w = cheb::cumsum((s.R.array() * s.U.array() * s.ell * psi.array().cos()).matrix());
  const double area = 0.5 * (spec.b * spec.b - spec.a * spec.a);
  const double mean_u = w[n - 1] / area;
  const double target =
      (spec.b * std::sin(spec.psi_b) - spec.a * std::sin(spec.psi_a)) / (spec.kappa * area);
  s.U.array() += target - mean_u;
  return pack({s});
}

/// Parameter interval [lo, hi] of `src` resampled onto a fresh n-point grid.
inline SubdomainState subinterval(const SubdomainState& src, double lo, double hi, int n) {
  const Vector t = cheb::chebpts(n).points;
  const Vector mapped = (lo + 0.5 * (hi - lo) * (t.array() + 1.0)).matrix();
  const Matrix P = cheb::interp_matrix(src.n, mapped);
  SubdomainState s;
  s.n = n;
  s.R = P * src.R;
  s.U = P * src.U;
  s.Psi = P * src.Psi;
  s.ell = src.ell * 0.5 * (hi - lo);
  return s;
}

/// First tau in [-1, 1] where the interpolant of `f` crosses `level`,
/// refined by bisection to `tol`. nullopt when there is no crossing.
inline std::optional<double> first_crossing(const Vector& f, double level, double tol = 1e-14) {
  const auto n = static_cast<int>(f.size());
  const int samples = std::max(400, 20 * n);
  auto g = [&](double t) { return cheb::interpolate(f, t) - level; };
  double t_prev = -1.0;
  double g_prev = g(t_prev);
  if (g_prev == 0.0) return t_prev;
  for (int i = 1; i <= samples; ++i) {
    // Cosine spacing clusters samples near the ends like the grid does.
    const double t = -std::cos(std::numbers::pi * i / samples);
    const double gt = g(t);
    if (gt == 0.0) return t;
    if ((gt > 0.0) != (g_prev > 0.0)) {
      double lo = t_prev;
      double hi = t;
      double glo = g_prev;
      while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if (gm == 0.0) return mid;
        if ((gm > 0.0) == (glo > 0.0)) {
          lo = mid;
          glo = gm;
        } else {
          hi = mid;
        }
      }
      return 0.5 * (lo + hi);
    }
    t_prev = t;
    g_prev = gt;
  }
  return std::nullopt;
}

/// Split a single-domain state at the first parameter where `field` reaches
/// `level`; the two pieces get grid sizes n_left and n_right.
inline std::pair<SubdomainState, SubdomainState> split_at(const SubdomainState& s, Field field,
                                                         double level, int n_left, int n_right) {
  const auto t = first_crossing(s.field(field), level);
  if (!t || *t <= -1.0 || *t >= 1.0) {
    throw SeedFailure("split: the curve never reaches the marker value");
  }
  SubdomainState left = subinterval(s, -1.0, *t, n_left);
  SubdomainState right = subinterval(s, *t, 1.0, n_right);
  left.field(field)[n_left - 1] = level;
  right.field(field)[0] = level;
  return {left, right};
}

/// Three-zone guesses: circular arcs on the outer zones, horizontal at the
/// markers, and a zero-height line in the middle. Only P1ThreeZone and 3RZ.
inline SolutionVector initial_guess_three_zone(const ProblemSpec& spec, Method variant, int n1,
                                               int n2, int n3) {
  double r0, r1, r2, r3, psi_left;
  if (variant == Method::P1ThreeZone) {
    r0 = -spec.b;
    r1 = spec.delta - spec.b;
    r2 = spec.b - spec.delta;
    r3 = spec.b;
    psi_left = -spec.psi_b;
    if (n2 % 2 == 0) ++n2;
  } else {
    r0 = spec.a;
    r1 = spec.a + spec.delta;
    r2 = spec.b - spec.delta;
    r3 = spec.b;
    psi_left = spec.psi_a;
  }
  SubdomainState left = arc_piece(n1, psi_left, 0.0, r0, r1, 0.0, true);
  SubdomainState mid = arc_piece(n2, 0.0, 0.0, r1, r2, 0.0, false);
  SubdomainState right = arc_piece(n3, 0.0, spec.psi_b, r2, r3, 0.0, false);
  return pack({left, mid, right});
}

// ---------------------------------------------------------------------------
// Run

struct SolveReport {
  bool converged = false;
  Method method = Method::Base;
  double delta = 0.0;
  int n_v = 0;
  int n_N = 0;
  double res_newton = std::numeric_limits<double>::infinity();
  double res_bvp = std::numeric_limits<double>::infinity();
  std::vector<int> per_domain_n;
  int refinements = 0;
  int continuation_steps = 0;
  int completed_steps = 0;
  /// Index of the failing continuation step, -1 when none failed.
  int failed_step = -1;
  std::string message;
  double wall_time = 0.0;
};

struct RunResult {
  SolutionVector solution;
  SolveReport report;
  ProblemSpec spec;  // resolved spec
  CollocationSystem system;
};

struct AdaptiveOutcome {
  SolutionVector v;
  bool ok = false;
  int iterations = 0;
  int refinements = 0;
  double res_newton = std::numeric_limits<double>::infinity();
  double res_bvp = std::numeric_limits<double>::infinity();
  std::string message;
};

inline NewtonSettings settings_for(const ProblemSpec& spec) {
  NewtonSettings s;
  s.tol_newton = spec.tol_newton;
  s.tol_bvp = spec.tol_bvp;
  s.max_iter = spec.max_newton_iter;
  s.n_max = spec.n_max;
  return s;
}

/// Newton + resolution check + refinement until every subdomain is resolved.
inline AdaptiveOutcome solve_adaptive(const CollocationSystem& sys, SolutionVector v,
                                      const NewtonSettings& settings) {
  AdaptiveOutcome out;
  for (;;) {
    NewtonResult r = newton_solve(sys, v, settings);
    out.iterations += r.iterations;
    out.res_newton = r.res_newton;
    out.res_bvp = r.res_bvp;
    std::vector<Resolution> verdicts(static_cast<std::size_t>(sys.count()),
                                     Resolution::Underresolved);
    switch (r.status) {
      case NewtonStatus::Diverged:
        out.v = std::move(r.v);
        out.message = "newton diverged";
        return out;
      case NewtonStatus::Converged: {
        const auto checks = check_resolution(sys, r.v, settings);
        if (all_resolved(checks) && r.res_bvp <= settings.tol_bvp) {
          out.v = std::move(r.v);
          out.ok = true;
          return out;
        }
        for (std::size_t k = 0; k < checks.size(); ++k) verdicts[k] = checks[k].verdict;
        break;
      }
      case NewtonStatus::MaxIterations:
      case NewtonStatus::Singular:
        break;
    }
    auto refined = refine(sys, r.v, verdicts, settings);
    if (!refined) {
      out.v = std::move(r.v);
      out.message = "resolution exhausted";
      return out;
    }
    ++out.refinements;
    v = std::move(*refined);
  }
}

/// Seed for the 2RZ layout: a base solve at the given angles split at
/// r = a + delta. Throws SeedFailure when the base solve fails.
inline SolutionVector seed_two_zone(const ProblemSpec& spec, const NewtonSettings& settings,
                                    int* iterations = nullptr) {
  ProblemSpec base = spec;
  base.method = Method::Base;
  const CollocationSystem sys = make_base_system(base);
  const AdaptiveOutcome pre = solve_adaptive(sys, initial_guess_base(base, spec.n0), settings);
  if (iterations) *iterations += pre.iterations;
  if (!pre.ok) throw SeedFailure("base pre-solve for the two-zone seed failed: " + pre.message);
  const SubdomainState whole = unpack(pre.v).front();
  auto [inner, outer] = split_at(whole, Field::R, spec.a + spec.delta, spec.n0, spec.n0);
  return pack({inner, outer});
}

/// Split Omega_1 of a 2RZ state at Psi = psi_bar into Omega_alpha, Omega_beta.
inline SolutionVector split_for_a2rz(const SolutionVector& two_zone, double psi_bar) {
  const auto subs = unpack(two_zone);
  if (subs.size() != 2) throw LayoutMismatch("A2RZ handoff expects a 2RZ layout");
  const int n1 = subs[0].n;
  auto [alpha, beta] = split_at(subs[0], Field::Psi, psi_bar, n1, n1);
  return pack({alpha, beta, subs[1]});
}

inline SolutionVector first_seed(const ProblemSpec& spec, Method variant,
                                 const NewtonSettings& settings, int* iterations) {
  switch (variant) {
    case Method::Base:
    case Method::Auto:
      return initial_guess_base(spec, spec.n0);
    case Method::P1ThreeZone:
    case Method::ThreeRZ:
      return initial_guess_three_zone(spec, variant, spec.n0, spec.n0, spec.n0);
    case Method::TwoRZ:
      return seed_two_zone(spec, settings, iterations);
    case Method::A2RZ:
      break;
  }
  throw SeedFailure("A2RZ is seeded from a converged 2RZ solution");
}

/// Full solve of `spec` following the continuation plan.
inline RunResult run(ProblemSpec input) {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult res;
  res.spec = resolve_method(std::move(input));
  const ProblemSpec& spec = res.spec;
  validate(spec);
  const NewtonSettings settings = settings_for(spec);
  const ContinuationPlan plan = plan_continuation(spec);

  SolveReport& rep = res.report;
  rep.method = spec.method;
  rep.delta = spec.delta;
  rep.continuation_steps = static_cast<int>(plan.steps.size());

  std::optional<SolutionVector> current;
  Method current_method = Method::Base;
  bool failed = false;
  for (std::size_t i = 0; i < plan.steps.size() && !failed; ++i) {
    const ContinuationStep& step = plan.steps[i];
    const ProblemSpec step_spec = with_angles(spec, step);
    const CollocationSystem sys = make_system(step_spec, step.method);
    SolutionVector seed;
    try {
      if (!current) {
        if (step.method == Method::A2RZ) {
          // No 2RZ predecessor: solve 2RZ at these angles first.
          const CollocationSystem two = make_2rz_system(step_spec);
          const AdaptiveOutcome pre =
              solve_adaptive(two, seed_two_zone(step_spec, settings, &rep.n_N), settings);
          rep.n_N += pre.iterations;
          rep.refinements += pre.refinements;
          if (!pre.ok) throw SeedFailure("2RZ pre-solve for A2RZ failed: " + pre.message);
          seed = split_for_a2rz(pre.v, angle_marker(step_spec.psi_a));
        } else {
          seed = first_seed(step_spec, step.method, settings, &rep.n_N);
        }
      } else if (current_method == Method::TwoRZ && step.method == Method::A2RZ) {
        seed = split_for_a2rz(*current, angle_marker(step_spec.psi_a));
      } else {
        seed = *current;
      }
    } catch (const Error& e) {
      rep.failed_step = static_cast<int>(i);
      rep.message = e.what();
      failed = true;
      break;
    }

    AdaptiveOutcome out = solve_adaptive(sys, std::move(seed), settings);
    rep.n_N += out.iterations;
    rep.refinements += out.refinements;
    rep.res_newton = out.res_newton;
    rep.res_bvp = out.res_bvp;
    current = std::move(out.v);
    current_method = step.method;
    res.system = sys;
    if (!out.ok) {
      rep.failed_step = static_cast<int>(i);
      rep.message = out.message;
      failed = true;
    } else {
      ++rep.completed_steps;
    }
  }

  if (current) {
    res.solution = *current;
    rep.n_v = current->n_v();
    rep.per_domain_n = current->layout.sizes;
  }
  rep.converged = !failed && rep.res_newton <= spec.tol_newton && rep.res_bvp <= spec.tol_bvp;
  if (failed && rep.message.empty()) rep.message = "did not converge";
  rep.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace capsurf

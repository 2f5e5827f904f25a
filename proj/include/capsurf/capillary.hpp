#pragma once

// Single-domain ("base") systems for P1 and P2.

#include <numbers>

#include "capsurf/problem.hpp"
#include "capsurf/system.hpp"

namespace capsurf {

/// Subdomains whose radius can fall below this use the multiplied Psi row.
inline constexpr double kMultipliedFormRadius = 1.0;

/// Arc-length safeguard scale: 100 times the radial extent of the problem.
inline double ell_bound(const ProblemSpec& spec) {
  const double extent = spec.kind == ProblemKind::P1 ? 2.0 * spec.b : spec.b - spec.a;
  return 100.0 * extent;
}

inline ConstraintRow endpoint_row(int sub, Field f, Side side, double rhs, std::string label) {
  return {{{sub, f, side, 1.0}}, rhs, std::move(label)};
}

inline ConstraintRow matching_row(int left_sub, int right_sub, Field f, std::string label) {
  return {{{left_sub, f, Side::Right, 1.0}, {right_sub, f, Side::Left, -1.0}}, 0.0,
          std::move(label)};
}

inline CollocationSystem make_base_system(const ProblemSpec& spec) {
  CollocationSystem sys;
  sys.kappa = spec.kappa;
  sys.ell_max = ell_bound(spec);
  if (spec.kind == ProblemKind::P1) {
    const PsiForm form = spec.b < kMultipliedFormRadius ? PsiForm::Multiplied : PsiForm::Standard;
    sys.subdomains = {{form, RadiusSign::Any, true}};
    sys.constraints = {
        endpoint_row(0, Field::R, Side::Left, -spec.b, "R(-1) + b"),
        endpoint_row(0, Field::R, Side::Right, spec.b, "R(1) - b"),
        endpoint_row(0, Field::Psi, Side::Left, -spec.psi_b, "Psi(-1) + psi_b"),
        endpoint_row(0, Field::Psi, Side::Right, spec.psi_b, "Psi(1) - psi_b"),
    };
  } else {
    const PsiForm form = spec.a < kMultipliedFormRadius ? PsiForm::Multiplied : PsiForm::Standard;
    sys.subdomains = {{form, RadiusSign::Positive, false}};
    sys.constraints = {
        endpoint_row(0, Field::R, Side::Left, spec.a, "R(-1) - a"),
        endpoint_row(0, Field::R, Side::Right, spec.b, "R(1) - b"),
        endpoint_row(0, Field::Psi, Side::Left, spec.psi_a, "Psi(-1) - psi_a"),
        endpoint_row(0, Field::Psi, Side::Right, spec.psi_b, "Psi(1) - psi_b"),
    };
  }
  return sys;
}

/// Base system with the Psi-row form forced, for both P1 and P2.
inline CollocationSystem make_base_system(const ProblemSpec& spec, PsiForm form) {
  CollocationSystem sys = make_base_system(spec);
  sys.subdomains[0].form = form;
  return sys;
}

inline Vector residual_base(const ProblemSpec& spec, const SolutionVector& v) {
  return assemble(make_base_system(spec), v, false).residual;
}

inline Matrix jacobian_base(const ProblemSpec& spec, const SolutionVector& v) {
  return assemble(make_base_system(spec), v, true).jacobian;
}

}  // namespace capsurf

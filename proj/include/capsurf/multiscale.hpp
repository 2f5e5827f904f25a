#pragma once

// Domain-decomposed systems: P1 three-zone, 3RZ, 2RZ and the angle-marked
// A2RZ split. Subdomains are ordered left to right along the curve.

#include <numbers>
#include <vector>

#include "capsurf/capillary.hpp"
#include "capsurf/problem.hpp"
#include "capsurf/system.hpp"

namespace capsurf {

/// Where the artificial subdomain boundaries sit.
struct DecompositionPlan {
  Method variant = Method::Base;
  std::vector<double> radius_markers;
  /// Inclination marking the Omega_alpha / Omega_beta boundary (A2RZ only).
  double psi_bar = 0.0;
  int subdomains = 1;
};

/// psi_bar is -pi/2 for a downward inner contact angle and +pi/2 otherwise.
inline double angle_marker(double psi_a) {
  return psi_a < 0.0 ? -std::numbers::pi / 2 : std::numbers::pi / 2;
}

inline DecompositionPlan plan_decomposition(const ProblemSpec& spec, Method variant) {
  DecompositionPlan plan;
  plan.variant = variant;
  switch (variant) {
    case Method::Base:
    case Method::Auto:
      plan.variant = Method::Base;
      break;
    case Method::P1ThreeZone:
      plan.radius_markers = {spec.delta - spec.b, spec.b - spec.delta};
      plan.subdomains = 3;
      break;
    case Method::ThreeRZ:
      plan.radius_markers = {spec.a + spec.delta, spec.b - spec.delta};
      plan.subdomains = 3;
      break;
    case Method::TwoRZ:
      plan.radius_markers = {spec.a + spec.delta};
      plan.subdomains = 2;
      break;
    case Method::A2RZ:
      plan.radius_markers = {spec.a + spec.delta};
      plan.psi_bar = angle_marker(spec.psi_a);
      plan.subdomains = 3;
      break;
  }
  return plan;
}

inline CollocationSystem make_p1_3z_system(const ProblemSpec& spec) {
  const double b = spec.b;
  const double d = spec.delta;
  CollocationSystem sys;
  sys.kappa = spec.kappa;
  sys.ell_max = ell_bound(spec);
  sys.subdomains = {{PsiForm::Standard, RadiusSign::Negative, false},
                    {PsiForm::Standard, RadiusSign::Any, true},
                    {PsiForm::Standard, RadiusSign::Positive, false}};
  sys.constraints = {
      endpoint_row(0, Field::R, Side::Left, -b, "R1(-1) + b"),
      endpoint_row(0, Field::R, Side::Right, d - b, "R1(1) + b - delta"),
      endpoint_row(0, Field::Psi, Side::Left, -spec.psi_b, "Psi1(-1) + psi_b"),
      matching_row(0, 1, Field::Psi, "Psi1(1) - Psi2(-1)"),
      endpoint_row(1, Field::R, Side::Left, d - b, "R2(-1) + b - delta"),
      matching_row(0, 1, Field::U, "U1(1) - U2(-1)"),
      endpoint_row(1, Field::R, Side::Right, b - d, "R2(1) - b + delta"),
      matching_row(1, 2, Field::Psi, "Psi2(1) - Psi3(-1)"),
      endpoint_row(2, Field::R, Side::Left, b - d, "R3(-1) - b + delta"),
      matching_row(1, 2, Field::U, "U2(1) - U3(-1)"),
      endpoint_row(2, Field::R, Side::Right, b, "R3(1) - b"),
      endpoint_row(2, Field::Psi, Side::Right, spec.psi_b, "Psi3(1) - psi_b"),
  };
  return sys;
}

inline CollocationSystem make_3rz_system(const ProblemSpec& spec) {
  const double a = spec.a;
  const double b = spec.b;
  const double d = spec.delta;
  CollocationSystem sys;
  sys.kappa = spec.kappa;
  sys.ell_max = ell_bound(spec);
  const PsiForm inner = a < kMultipliedFormRadius ? PsiForm::Multiplied : PsiForm::Standard;
  sys.subdomains = {{inner, RadiusSign::Positive, false},
                    {PsiForm::Standard, RadiusSign::Positive, false},
                    {PsiForm::Standard, RadiusSign::Positive, false}};
  sys.constraints = {
      endpoint_row(0, Field::R, Side::Left, a, "R1(-1) - a"),
      endpoint_row(0, Field::R, Side::Right, a + d, "R1(1) - (a + delta)"),
      endpoint_row(0, Field::Psi, Side::Left, spec.psi_a, "Psi1(-1) - psi_a"),
      matching_row(0, 1, Field::Psi, "Psi1(1) - Psi2(-1)"),
      endpoint_row(1, Field::R, Side::Left, a + d, "R2(-1) - (a + delta)"),
      matching_row(0, 1, Field::U, "U1(1) - U2(-1)"),
      endpoint_row(1, Field::R, Side::Right, b - d, "R2(1) - b + delta"),
      matching_row(1, 2, Field::Psi, "Psi2(1) - Psi3(-1)"),
      endpoint_row(2, Field::R, Side::Left, b - d, "R3(-1) - b + delta"),
      matching_row(1, 2, Field::U, "U2(1) - U3(-1)"),
      endpoint_row(2, Field::R, Side::Right, b, "R3(1) - b"),
      endpoint_row(2, Field::Psi, Side::Right, spec.psi_b, "Psi3(1) - psi_b"),
  };
  return sys;
}

inline CollocationSystem make_2rz_system(const ProblemSpec& spec) {
  const double a = spec.a;
  const double d = spec.delta;
  CollocationSystem sys;
  sys.kappa = spec.kappa;
  sys.ell_max = ell_bound(spec);
  sys.subdomains = {{PsiForm::Multiplied, RadiusSign::Positive, false},
                    {PsiForm::Standard, RadiusSign::Positive, false}};
  sys.constraints = {
      endpoint_row(0, Field::R, Side::Left, a, "R1(-1) - a"),
      endpoint_row(0, Field::R, Side::Right, a + d, "R1(1) - (a + delta)"),
      endpoint_row(0, Field::Psi, Side::Left, spec.psi_a, "Psi1(-1) - psi_a"),
      matching_row(0, 1, Field::Psi, "Psi1(1) - Psi2(-1)"),
      matching_row(0, 1, Field::U, "U1(1) - U2(-1)"),
      endpoint_row(1, Field::R, Side::Left, a + d, "R2(-1) - (a + delta)"),
      endpoint_row(1, Field::R, Side::Right, spec.b, "R2(1) - b"),
      endpoint_row(1, Field::Psi, Side::Right, spec.psi_b, "Psi2(1) - psi_b"),
  };
  return sys;
}

inline CollocationSystem make_a2rz_system(const ProblemSpec& spec) {
  const double a = spec.a;
  const double d = spec.delta;
  const double psi_bar = angle_marker(spec.psi_a);
  CollocationSystem sys;
  sys.kappa = spec.kappa;
  sys.ell_max = ell_bound(spec);
  sys.subdomains = {{PsiForm::Multiplied, RadiusSign::Positive, false},
                    {PsiForm::Multiplied, RadiusSign::Positive, false},
                    {PsiForm::Standard, RadiusSign::Positive, false}};
  sys.constraints = {
      endpoint_row(0, Field::R, Side::Left, a, "Ra(-1) - a"),
      matching_row(0, 1, Field::R, "Ra(1) - Rb(-1)"),
      endpoint_row(0, Field::Psi, Side::Left, spec.psi_a, "Psia(-1) - psi_a"),
      endpoint_row(0, Field::Psi, Side::Right, psi_bar, "Psia(1) - psi_bar"),
      matching_row(0, 1, Field::U, "Ua(1) - Ub(-1)"),
      endpoint_row(1, Field::R, Side::Right, a + d, "Rb(1) - (a + delta)"),
      endpoint_row(1, Field::Psi, Side::Left, psi_bar, "Psib(-1) - psi_bar"),
      matching_row(1, 2, Field::Psi, "Psib(1) - Psi2(-1)"),
      endpoint_row(2, Field::R, Side::Left, a + d, "R2(-1) - (a + delta)"),
      matching_row(1, 2, Field::U, "Ub(1) - U2(-1)"),
      endpoint_row(2, Field::R, Side::Right, spec.b, "R2(1) - b"),
      endpoint_row(2, Field::Psi, Side::Right, spec.psi_b, "Psi2(1) - psi_b"),
  };
  return sys;
}

/// System for any resolved method.
inline CollocationSystem make_system(const ProblemSpec& spec, Method variant) {
  switch (variant) {
    case Method::P1ThreeZone: return make_p1_3z_system(spec);
    case Method::ThreeRZ: return make_3rz_system(spec);
    case Method::TwoRZ: return make_2rz_system(spec);
    case Method::A2RZ: return make_a2rz_system(spec);
    case Method::Base:
    case Method::Auto: break;
  }
  return make_base_system(spec);
}

inline Vector residual_p1_3z(const ProblemSpec& s, const SolutionVector& v) {
  return assemble(make_p1_3z_system(s), v, false).residual;
}
inline Matrix jacobian_p1_3z(const ProblemSpec& s, const SolutionVector& v) {
  return assemble(make_p1_3z_system(s), v).jacobian;
}
inline Vector residual_3rz(const ProblemSpec& s, const SolutionVector& v) {
  return assemble(make_3rz_system(s), v, false).residual;
}
inline Matrix jacobian_3rz(const ProblemSpec& s, const SolutionVector& v) {
  return assemble(make_3rz_system(s), v).jacobian;
}
inline Vector residual_2rz(const ProblemSpec& s, const SolutionVector& v) {
  return assemble(make_2rz_system(s), v, false).residual;
}
inline Matrix jacobian_2rz(const ProblemSpec& s, const SolutionVector& v) {
  return assemble(make_2rz_system(s), v).jacobian;
}
inline Vector residual_a2rz(const ProblemSpec& s, const SolutionVector& v) {
  return assemble(make_a2rz_system(s), v, false).residual;
}
inline Matrix jacobian_a2rz(const ProblemSpec& s, const SolutionVector& v) {
  return assemble(make_a2rz_system(s), v).jacobian;
}

}  // namespace capsurf

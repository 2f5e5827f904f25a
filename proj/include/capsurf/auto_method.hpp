#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include "capsurf/problem.hpp"

namespace capsurf {

struct MethodChoice {
  Method method = Method::Base;
  double delta = 0.0;
};

/// Regime heuristic: large sessile drops get the three-zone split, wide
/// annuli 3RZ, small inner radii 2RZ, and near-reversed small inner contact
/// the angle-marked A2RZ.
inline MethodChoice auto_method(const ProblemSpec& spec) {
  constexpr double pi = std::numbers::pi;
  if (spec.kind == ProblemKind::P1) {
    if (spec.b <= 10.0 || std::abs(spec.psi_b) <= pi / 2) return {Method::Base, 0.0};
    return {Method::P1ThreeZone, std::max(2.0, spec.b / 8.0)};
  }
  const double width = spec.b - spec.a;
  if (width >= 15.0) return {Method::ThreeRZ, std::max(3.0, width / 15.0)};
  if (spec.a < 0.1 && std::abs(spec.psi_a) > 15.0 * pi / 16.0) return {Method::A2RZ, 0.2};
  if (spec.a < 1.0) return {Method::TwoRZ, 0.2};
  return {Method::Base, 0.0};
}

/// Copy of `spec` with Auto replaced by the heuristic choice. An explicit
/// positive delta on the input is kept.
inline ProblemSpec resolve_method(ProblemSpec spec) {
  if (spec.method != Method::Auto) return spec;
  const MethodChoice c = auto_method(spec);
  spec.method = c.method;
  if (!(spec.delta > 0.0)) spec.delta = c.delta;
  return spec;
}

}  // namespace capsurf

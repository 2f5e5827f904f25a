#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

#include "capsurf/error.hpp"

namespace capsurf {

enum class ProblemKind { P1, P2 };

enum class Method { Base, P1ThreeZone, ThreeRZ, TwoRZ, A2RZ, Auto };

inline std::string_view to_string(ProblemKind k) { return k == ProblemKind::P1 ? "p1" : "p2"; }

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::Base: return "base";
    case Method::P1ThreeZone: return "p1-3z";
    case Method::ThreeRZ: return "3rz";
    case Method::TwoRZ: return "2rz";
    case Method::A2RZ: return "a2rz";
    case Method::Auto: return "auto";
  }
  return "?";
}

inline std::optional<Method> parse_method(std::string_view s) {
  if (s == "base") return Method::Base;
  if (s == "p1-3z") return Method::P1ThreeZone;
  if (s == "3rz") return Method::ThreeRZ;
  if (s == "2rz") return Method::TwoRZ;
  if (s == "a2rz") return Method::A2RZ;
  if (s == "auto") return Method::Auto;
  return std::nullopt;
}

/// Full definition of a bounded capillary problem and its solver controls.
///
/// P1: disk-type interface, section curve from r = -b to r = b with
///     inclination -psi_b and psi_b at the ends.
/// P2: annular interface from r = a to r = b with inclinations psi_a, psi_b.
struct ProblemSpec {
  ProblemKind kind = ProblemKind::P1;
  double a = 0.0;
  double b = 1.0;
  double psi_a = 0.0;
  double psi_b = 0.0;
  double kappa = 1.0;
  Method method = Method::Base;
  double delta = 0.0;
  double tol_newton = 1e-13;
  double tol_bvp = 1e-12;
  int n0 = 15;
  int max_newton_iter = 300;
  /// Largest grid any subdomain may be refined to.
  int n_max = 2048;
  int continuation_steps = 10;
  int a2rz_continuation_steps = 21;
};

inline bool is_multiscale(Method m) {
  return m == Method::P1ThreeZone || m == Method::ThreeRZ || m == Method::TwoRZ ||
         m == Method::A2RZ;
}

/// Throws InvalidSpec when the spec violates its invariants. `method` must be
/// resolved (not Auto).
inline void validate(const ProblemSpec& s) {
  auto fail = [](const std::string& msg) { throw InvalidSpec(msg); };
  constexpr double pi = std::numbers::pi;
  if (!(s.b > 0.0) || !std::isfinite(s.b)) fail("b must be positive");
  if (!(s.kappa > 0.0) || !std::isfinite(s.kappa)) fail("kappa must be positive");
  if (!(s.tol_newton > 0.0) || !(s.tol_bvp > 0.0)) fail("tolerances must be positive");
  if (s.n0 < 4) fail("n0 must be at least 4");
  if (s.max_newton_iter < 1) fail("max_newton_iter must be positive");
  if (s.n_max < s.n0) fail("n_max must be at least n0");
  if (s.continuation_steps < 2 || s.a2rz_continuation_steps < 2) {
    fail("continuation needs at least 2 steps");
  }
  if (std::abs(s.psi_b) > pi + 1e-12) fail("psi_b must lie in [-pi, pi]");
  if (s.kind == ProblemKind::P2) {
    if (!(s.a > 0.0 && s.a < s.b)) fail("P2 requires 0 < a < b");
    if (std::abs(s.psi_a) > pi + 1e-12) fail("psi_a must lie in [-pi, pi]");
  }
  switch (s.method) {
    case Method::Base:
      break;
    case Method::P1ThreeZone:
      if (s.kind != ProblemKind::P1) fail("p1-3z applies to P1 only");
      if (!(s.delta > 0.0 && s.delta < s.b)) fail("p1-3z requires 0 < delta < b");
      break;
    case Method::ThreeRZ:
      if (s.kind != ProblemKind::P2) fail("3rz applies to P2 only");
      if (!(s.delta > 0.0 && s.delta < 0.5 * (s.b - s.a))) {
        fail("3rz requires 0 < delta < (b - a)/2");
      }
      break;
    case Method::TwoRZ:
    case Method::A2RZ:
      if (s.kind != ProblemKind::P2) fail("2rz/a2rz apply to P2 only");
      if (!(s.delta > 0.0 && s.delta < s.b - s.a)) fail("2rz/a2rz require 0 < delta < b - a");
      break;
    case Method::Auto:
      fail("method must be resolved before validation");
  }
}

}  // namespace capsurf

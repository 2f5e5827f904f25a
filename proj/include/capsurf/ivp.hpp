#pragma once

// Independent adaptive Dormand-Prince 5(4) integrator for the arc-length
// system
//   dr/ds = cos(psi),  du/ds = sin(psi),  dpsi/ds = kappa u - sin(psi)/r,
// used only to cross-check converged collocation solutions.

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "capsurf/chebyshev.hpp"
#include "capsurf/error.hpp"
#include "capsurf/layout.hpp"
#include "capsurf/system.hpp"

namespace capsurf::ivp {

struct IvpState {
  double r = 0.0;
  double u = 0.0;
  double psi = 0.0;
  double s = 0.0;
};

struct IvpOptions {
  double rtol = 1e-12;
  double atol = 1e-12;
  /// Abort when |r| drops below this.
  double r_min = 1e-12;
  int max_steps = 1'000'000;
};

struct Trajectory {
  IvpState end;
  std::vector<IvpState> samples;  // accepted steps, start included
  int steps = 0;
  int rejected = 0;
};

namespace detail {

using State3 = std::array<double, 3>;

inline State3 rhs(const State3& y, double kappa) {
  const double c = std::cos(y[2]);
  const double s = std::sin(y[2]);
  return {c, s, kappa * y[1] - s / y[0]};
}

inline State3 axpy(const State3& y, double h, std::initializer_list<std::pair<double, const State3*>> terms) {
  State3 out = y;
  for (const auto& [coef, k] : terms) {
    for (int i = 0; i < 3; ++i) out[static_cast<std::size_t>(i)] += h * coef * (*k)[static_cast<std::size_t>(i)];
  }
  return out;
}

}  // namespace detail

/// Integrate from state0 (at arc-length state0.s) to arc-length s_end, in
/// either direction.
inline Trajectory integrate(const IvpState& state0, double s_end, double kappa,
                            const IvpOptions& opt = {}) {
  using detail::State3;
  Trajectory tr;
  tr.samples.push_back(state0);
  State3 y{state0.r, state0.u, state0.psi};
  double s = state0.s;
  const double span = s_end - s;
  if (span == 0.0) {
    tr.end = state0;
    return tr;
  }
  const double dir = span > 0.0 ? 1.0 : -1.0;
  if (std::abs(y[0]) < opt.r_min) throw IntegrationError("ivp: start point too close to r = 0");

  // Dormand-Prince tableau.
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                   b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  (void)c2; (void)c3; (void)c4; (void)c5;  // autonomous system

  double h = dir * std::min(std::abs(span), 1e-3);
  double err_prev = 1e-4;
  State3 k1 = detail::rhs(y, kappa);
  while (dir * (s_end - s) > 0.0) {
    if (tr.steps + tr.rejected > opt.max_steps) throw IntegrationError("ivp: too many steps");
    const double remaining = s_end - s;
    if (std::abs(remaining) <= 4e-16 * std::max(1.0, std::abs(s_end))) break;
    if (dir * (s + h - s_end) > 0.0) h = remaining;
    if (std::abs(h) < 1e-15 * std::max(1.0, std::abs(s))) {
      throw IntegrationError("ivp: step size underflow");
    }
    const State3 k2 = detail::rhs(detail::axpy(y, h, {{a21, &k1}}), kappa);
    const State3 k3 = detail::rhs(detail::axpy(y, h, {{a31, &k1}, {a32, &k2}}), kappa);
    const State3 k4 = detail::rhs(detail::axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}), kappa);
    const State3 k5 =
        detail::rhs(detail::axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}), kappa);
    const State3 k6 = detail::rhs(
        detail::axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}), kappa);
    const State3 y5 =
        detail::axpy(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    const State3 k7 = detail::rhs(y5, kappa);

    double err = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      const double e =
          h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
      err = std::max(err, std::abs(e) / sc);
    }
    bool finite = std::isfinite(err);
    for (double x : y5) finite = finite && std::isfinite(x);

    if (finite && err <= 1.0) {
      s += h;
      y = y5;
      k1 = k7;  // first-same-as-last
      ++tr.steps;
      tr.samples.push_back({y[0], y[1], y[2], s});
      if (std::abs(y[0]) < opt.r_min || std::signbit(y[0]) != std::signbit(state0.r)) {
        throw IntegrationError("ivp: trajectory reached r = 0");
      }
      // PI control.
      const double e = std::max(err, 1e-10);
      double fac = 0.9 * std::pow(e, -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
      fac = std::clamp(fac, 0.2, 5.0);
      h *= fac;
      err_prev = e;
    } else {
      ++tr.rejected;
      const double fac = finite ? std::max(0.2, 0.9 * std::pow(err, -1.0 / 5.0)) : 0.1;
      h *= fac;
    }
  }
  tr.end = {y[0], y[1], y[2], s_end};
  return tr;
}

struct VerifyOptions {
  /// Longest arc-length integrated in one shot. Perturbations of the flat
  /// state grow like exp(sqrt(kappa) s), so long runs are split into segments
  /// restarted from the collocation solution.
  double max_segment = 2.0;
  /// Parameter half-width excluded around tau = 0 on grids that straddle r = 0.
  double axis_gap = 0.02;
  IvpOptions ivp;
};

struct VerifyResult {
  double max_mismatch = 0.0;
  double max_constraint = 0.0;
  int segments = 0;

  [[nodiscard]] double worst() const { return std::max(max_mismatch, max_constraint); }
};

/// Integrate each subdomain of a converged solution over its arc-length
/// (segmented, see VerifyOptions) and compare against the collocation states
/// at segment ends; also reports the largest boundary/matching residual.
inline VerifyResult verify(const SolutionVector& v, const CollocationSystem& sys,
                           const VerifyOptions& opt = {}) {
  VerifyResult out;
  const auto subs = unpack(v);
  for (std::size_t k = 0; k < subs.size(); ++k) {
    const SubdomainState& sd = subs[k];
    const double ell = sd.ell;
    auto state_at = [&](double tau) {
      return IvpState{cheb::interpolate(sd.R, tau), cheb::interpolate(sd.U, tau),
                      cheb::interpolate(sd.Psi, tau), ell * tau};
    };
    std::vector<std::pair<double, double>> ranges;
    if (sys.subdomains[k].odd_grid) {
      ranges = {{-1.0, -opt.axis_gap}, {opt.axis_gap, 1.0}};
    } else {
      ranges = {{-1.0, 1.0}};
    }
    for (const auto& [lo, hi] : ranges) {
      const double length = ell * (hi - lo);
      const int pieces = std::max(1, static_cast<int>(std::ceil(length / opt.max_segment)));
      for (int p = 0; p < pieces; ++p) {
        const double t0 = lo + (hi - lo) * p / pieces;
        const double t1 = (p + 1 == pieces) ? hi : lo + (hi - lo) * (p + 1) / pieces;
        IvpState start = p == 0 && t0 == -1.0
                             ? IvpState{sd.R[0], sd.U[0], sd.Psi[0], -ell}
                             : state_at(t0);
        const IvpState target = t1 == 1.0
                                    ? IvpState{sd.R[sd.n - 1], sd.U[sd.n - 1], sd.Psi[sd.n - 1], ell}
                                    : state_at(t1);
        const Trajectory tr = integrate(start, ell * t1, sys.kappa, opt.ivp);
        const double mismatch = std::max({std::abs(tr.end.r - target.r),
                                          std::abs(tr.end.u - target.u),
                                          std::abs(tr.end.psi - target.psi)});
        out.max_mismatch = std::max(out.max_mismatch, mismatch);
        ++out.segments;
      }
    }
  }
  const ResidualAssembly a = assemble(sys, v, false);
  for (std::size_t i = 0; i < a.row_map.size(); ++i) {
    if (a.row_map[i].kind == RowKind::Constraint) {
      out.max_constraint =
          std::max(out.max_constraint, std::abs(a.residual[static_cast<Eigen::Index>(i)]));
    }
  }
  return out;
}

}  // namespace capsurf::ivp

#pragma once

// Generic rectangular-collocation assembly for the rescaled arc-length system
//
//   R' - l cos(Psi)                      = 0
//   U' - l sin(Psi)                      = 0
//   Psi' + l sin(Psi)/R - kappa l U      = 0   (standard form)
//   R Psi' + l sin(Psi) - kappa l R U    = 0   (multiplied form)
//
// on any number of subdomains, each with its own grid and arc-length scale,
// closed by linear endpoint constraints (boundary and matching rows).
// Unknowns live on chebpts(n); ODE rows are collocated on chebpts(n-1), with
// the fields down-sampled first and nonlinear terms applied pointwise.

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "capsurf/chebyshev.hpp"
#include "capsurf/error.hpp"
#include "capsurf/layout.hpp"

namespace capsurf {

enum class PsiForm { Standard, Multiplied };

/// Sign the radius must keep on a subdomain's grid.
enum class RadiusSign { Any, Positive, Negative };

enum class Side { Left = -1, Right = 1 };

struct SubdomainRule {
  PsiForm form = PsiForm::Standard;
  RadiusSign sign = RadiusSign::Any;
  /// Grid straddles r = 0 at tau = 0: n must stay odd so the (n-1)-point
  /// collocation grid never contains tau = 0.
  bool odd_grid = false;
};

struct EndpointTerm {
  int sub = 0;
  Field field = Field::R;
  Side side = Side::Left;
  double coeff = 1.0;
};

/// Row sum(coeff * field(side)) - rhs.
struct ConstraintRow {
  std::vector<EndpointTerm> terms;
  double rhs = 0.0;
  std::string label;
};

struct CollocationSystem {
  double kappa = 1.0;
  std::vector<SubdomainRule> subdomains;
  std::vector<ConstraintRow> constraints;
  /// Safeguard bound on every arc-length slot.
  double ell_max = 1e300;

  [[nodiscard]] int count() const { return static_cast<int>(subdomains.size()); }
};

enum class RowKind { Ode, Constraint };

struct RowLabel {
  RowKind kind = RowKind::Ode;
  int equation = 0;  // 0: R, 1: U, 2: Psi (ODE rows)
  int sub = 0;
  int point = 0;  // collocation index (ODE rows) or constraint index
  std::string label;
};

struct ResidualAssembly {
  Vector residual;
  Matrix jacobian;
  std::vector<RowLabel> row_map;
};

namespace detail {

struct CollocationMats {
  Matrix D0;
  Matrix D1;
};

/// Per-thread cache of rectangular matrices keyed by n.
inline const CollocationMats& collocation_mats(int n) {
  thread_local std::map<int, std::unique_ptr<CollocationMats>> cache;
  auto& slot = cache[n];
  if (!slot) {
    slot = std::make_unique<CollocationMats>(
        CollocationMats{cheb::diffmat_rect(n, 0).entries, cheb::diffmat_rect(n, 1).entries});
  }
  return *slot;
}

inline int endpoint_index(int n, Side side) { return side == Side::Left ? 0 : n - 1; }

}  // namespace detail

inline void check_layout(const CollocationSystem& sys, const SolutionVector& v) {
  if (v.layout.subdomains() != sys.count()) {
    throw LayoutMismatch("system has " + std::to_string(sys.count()) + " subdomains, vector has " +
                         std::to_string(v.layout.subdomains()));
  }
  if (v.data.size() != v.layout.length()) {
    throw LayoutMismatch("vector length does not match its layout");
  }
  const int n_rows = 3 * (v.layout.total_points() - sys.count()) +
                     static_cast<int>(sys.constraints.size());
  if (n_rows != v.layout.length()) {
    throw LayoutMismatch("system is not square: " + std::to_string(n_rows) + " rows for " +
                         std::to_string(v.layout.length()) + " unknowns");
  }
  for (int k = 0; k < sys.count(); ++k) {
    if (v.layout.sizes[static_cast<std::size_t>(k)] < 2) {
      throw LayoutMismatch("subdomain grids need at least 2 points");
    }
  }
}

/// Residual N(v) and, when requested, the Frechet derivative L(v).
inline ResidualAssembly assemble(const CollocationSystem& sys, const SolutionVector& v,
                                 bool with_jacobian = true) {
  check_layout(sys, v);
  if (!v.data.allFinite()) {
    throw NonFinite("assemble: solution vector has non-finite entries");
  }
  const Layout& lay = v.layout;
  const int n_v = lay.length();
  const int K = sys.count();
  const double kappa = sys.kappa;

  ResidualAssembly out;
  out.residual = Vector::Zero(n_v);
  if (with_jacobian) out.jacobian = Matrix::Zero(n_v, n_v);
  out.row_map.resize(static_cast<std::size_t>(n_v));

  // Row offsets of each equation block for each subdomain.
  std::vector<int> eq_offset(static_cast<std::size_t>(3 * K));
  {
    int row = 0;
    for (int eq = 0; eq < 3; ++eq) {
      for (int k = 0; k < K; ++k) {
        eq_offset[static_cast<std::size_t>(eq * K + k)] = row;
        row += lay.sizes[static_cast<std::size_t>(k)] - 1;
      }
    }
  }

  for (int k = 0; k < K; ++k) {
    const int n = lay.sizes[static_cast<std::size_t>(k)];
    const int m = n - 1;
    const auto& mats = detail::collocation_mats(n);
    const Vector R = v.segment(k, Field::R);
    const Vector U = v.segment(k, Field::U);
    const Vector P = v.segment(k, Field::Psi);
    const double ell = v.ell(k);

    const Vector Rc = mats.D0 * R;
    const Vector Uc = mats.D0 * U;
    const Vector Pc = mats.D0 * P;
    const Vector dR = mats.D1 * R;
    const Vector dU = mats.D1 * U;
    const Vector dP = mats.D1 * P;
    const Vector cosP = Pc.array().cos();
    const Vector sinP = Pc.array().sin();

    const int rR = eq_offset[static_cast<std::size_t>(k)];
    const int rU = eq_offset[static_cast<std::size_t>(K + k)];
    const int rP = eq_offset[static_cast<std::size_t>(2 * K + k)];
    const int cR = lay.offset(k, Field::R);
    const int cU = lay.offset(k, Field::U);
    const int cP = lay.offset(k, Field::Psi);
    const int cL = lay.ell_offset(k);
    const PsiForm form = sys.subdomains[static_cast<std::size_t>(k)].form;

    out.residual.segment(rR, m) = dR - ell * cosP;
    out.residual.segment(rU, m) = dU - ell * sinP;
    if (form == PsiForm::Standard) {
      out.residual.segment(rP, m) =
          (dP.array() + ell * sinP.array() / Rc.array() - kappa * ell * Uc.array()).matrix();
    } else {
      out.residual.segment(rP, m) =
          (Rc.array() * dP.array() + ell * sinP.array() - kappa * ell * Rc.array() * Uc.array())
              .matrix();
    }

    for (int i = 0; i < m; ++i) {
      out.row_map[static_cast<std::size_t>(rR + i)] = {RowKind::Ode, 0, k, i, "R'"};
      out.row_map[static_cast<std::size_t>(rU + i)] = {RowKind::Ode, 1, k, i, "U'"};
      out.row_map[static_cast<std::size_t>(rP + i)] = {RowKind::Ode, 2, k, i, "Psi'"};
    }

    if (!with_jacobian) continue;
    Matrix& J = out.jacobian;

    // R rows: D dR + l sin(Psi) D0 dPsi - cos(Psi) dl
    J.block(rR, cR, m, n) = mats.D1;
    J.block(rR, cP, m, n) = (ell * sinP).asDiagonal() * mats.D0;
    J.block(rR, cL, m, 1) = -cosP;
    // U rows: D dU - l cos(Psi) D0 dPsi - sin(Psi) dl
    J.block(rU, cU, m, n) = mats.D1;
    J.block(rU, cP, m, n) = (-ell * cosP).asDiagonal() * mats.D0;
    J.block(rU, cL, m, 1) = -sinP;

    if (form == PsiForm::Standard) {
      const Vector dR_coef = (-ell * sinP.array() / Rc.array().square()).matrix();
      const Vector dP_coef = (ell * cosP.array() / Rc.array()).matrix();
      J.block(rP, cR, m, n) = dR_coef.asDiagonal() * mats.D0;
      J.block(rP, cU, m, n) = -kappa * ell * mats.D0;
      J.block(rP, cP, m, n) = mats.D1 + dP_coef.asDiagonal() * mats.D0;
      J.block(rP, cL, m, 1) = (sinP.array() / Rc.array() - kappa * Uc.array()).matrix();
    } else {
      const Vector dR_coef = (dP.array() - kappa * ell * Uc.array()).matrix();
      J.block(rP, cR, m, n) = dR_coef.asDiagonal() * mats.D0;
      J.block(rP, cU, m, n) = (-kappa * ell * Rc).asDiagonal() * mats.D0;
      J.block(rP, cP, m, n) = Rc.asDiagonal() * mats.D1 + (ell * cosP).asDiagonal() * mats.D0;
      J.block(rP, cL, m, 1) = (sinP.array() - kappa * Uc.array() * Rc.array()).matrix();
    }
  }

  const int first_bc = 3 * (lay.total_points() - K);
  for (std::size_t c = 0; c < sys.constraints.size(); ++c) {
    const auto& row = sys.constraints[c];
    const int r = first_bc + static_cast<int>(c);
    double value = -row.rhs;
    for (const auto& t : row.terms) {
      const int n = lay.sizes[static_cast<std::size_t>(t.sub)];
      const int col = lay.offset(t.sub, t.field) + detail::endpoint_index(n, t.side);
      value += t.coeff * v.data[col];
      if (with_jacobian) out.jacobian(r, col) += t.coeff;
    }
    out.residual[r] = value;
    out.row_map[static_cast<std::size_t>(r)] = {RowKind::Constraint, -1, -1, static_cast<int>(c),
                                                row.label};
  }

  if (!out.residual.allFinite() || (with_jacobian && !out.jacobian.allFinite())) {
    throw NonFinite("assemble: non-finite residual or Jacobian entries");
  }
  return out;
}

inline Vector residual(const CollocationSystem& sys, const SolutionVector& v) {
  return assemble(sys, v, false).residual;
}

/// Residual rows belonging to subdomain k's ODE blocks.
inline Vector subdomain_residual(const ResidualAssembly& a, int k) {
  std::vector<double> rows;
  for (std::size_t i = 0; i < a.row_map.size(); ++i) {
    if (a.row_map[i].kind == RowKind::Ode && a.row_map[i].sub == k) rows.push_back(a.residual[static_cast<Eigen::Index>(i)]);
  }
  return Eigen::Map<const Vector>(rows.data(), static_cast<Eigen::Index>(rows.size()));
}

}  // namespace capsurf

#pragma once

#include <random>
#include <vector>

#include "capsurf/capillary.hpp"
#include "capsurf/continuation.hpp"
#include "capsurf/multiscale.hpp"

namespace capsurf::testing {

/// Piecewise-linear zero-height state: subdomain k runs from r[k] to r[k+1].
inline SolutionVector flat_state(const std::vector<double>& r, const std::vector<int>& n) {
  std::vector<SubdomainState> subs;
  for (std::size_t k = 0; k < n.size(); ++k) {
    SubdomainState s;
    s.n = n[k];
    const Vector tau = cheb::chebpts(s.n).points;
    s.R = (r[k] + 0.5 * (r[k + 1] - r[k]) * (tau.array() + 1.0)).matrix();
    s.U = Vector::Zero(s.n);
    s.Psi = Vector::Zero(s.n);
    s.ell = 0.5 * (r[k + 1] - r[k]);
    subs.push_back(s);
  }
  return pack(subs);
}

/// Random admissible state near `v`: smooth perturbations of every field that
/// keep the radius sign rules of `sys`.
inline SolutionVector perturbed(const CollocationSystem& sys, const SolutionVector& v,
                                std::mt19937& rng, double amp = 0.05) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int attempt = 0; attempt < 100; ++attempt) {
    auto subs = unpack(v);
    for (auto& s : subs) {
      const Vector tau = cheb::chebpts(s.n).points;
      const double c[6] = {d(rng), d(rng), d(rng), d(rng), d(rng), d(rng)};
      const double scale = std::max(1.0, s.R.cwiseAbs().maxCoeff());
      for (int j = 0; j < s.n; ++j) {
        const double t = tau[j];
        s.R[j] += amp * scale * 0.2 * (c[0] * t * t + c[1] * std::sin(2 * t));
        s.U[j] += amp * (c[2] + c[3] * t * t * t);
        s.Psi[j] += amp * (c[4] * t + c[5] * std::cos(3 * t));
      }
      s.ell *= 1.0 + 0.5 * amp * d(rng);
    }
    SolutionVector out = pack(subs);
    if (admissible(sys, out)) return out;
  }
  throw Error("could not draw an admissible state");
}

/// Relative error of the analytic Jacobian against a central difference along
/// a random direction.
inline double fd_error(const CollocationSystem& sys, const SolutionVector& v, std::mt19937& rng,
                       double h = 1e-7) {
  std::normal_distribution<double> nd;
  Vector dv(v.n_v());
  for (Eigen::Index i = 0; i < dv.size(); ++i) dv[i] = nd(rng);
  const Matrix L = assemble(sys, v).jacobian;
  SolutionVector vp{v.layout, v.data + h * dv};
  SolutionVector vm{v.layout, v.data - h * dv};
  const Vector fd = (residual(sys, vp) - residual(sys, vm)) / (2 * h);
  const Vector an = L * dv;
  return (fd - an).norm() / an.norm();
}

/// Roundoff allowance for residuals of exact states: a derivative row sums
/// O(n) entries of size O(n) times field values of size |v|.
inline double flat_tol(const SolutionVector& v) {
  int n = 0;
  for (int k : v.layout.sizes) n = std::max(n, k);
  return 1e-14 * std::max(1.0, v.data.cwiseAbs().maxCoeff()) * n;
}

inline ProblemSpec p1(double b, double psi_b) {
  ProblemSpec s;
  s.kind = ProblemKind::P1;
  s.b = b;
  s.psi_b = psi_b;
  return s;
}

inline ProblemSpec p2(double a, double b, double psi_a, double psi_b) {
  ProblemSpec s;
  s.kind = ProblemKind::P2;
  s.a = a;
  s.b = b;
  s.psi_a = psi_a;
  s.psi_b = psi_b;
  return s;
}

inline ProblemSpec with_method(ProblemSpec s, Method m, double delta) {
  s.method = m;
  s.delta = delta;
  return s;
}

}  // namespace capsurf::testing

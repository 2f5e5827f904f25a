#pragma once

// Computational vector layout: all R blocks, then all U blocks, then all Psi
// blocks, then one arc-length slot per subdomain.

#include <Eigen/Dense>

#include <numeric>
#include <string>
#include <vector>

#include "capsurf/error.hpp"

namespace capsurf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Field { R = 0, U = 1, Psi = 2 };

/// Samples of one subdomain's fields on chebpts(n) plus its arc-length scale.
struct SubdomainState {
  int n = 0;
  Vector R;
  Vector U;
  Vector Psi;
  double ell = 0.0;

  [[nodiscard]] const Vector& field(Field f) const {
    return f == Field::R ? R : (f == Field::U ? U : Psi);
  }
  Vector& field(Field f) { return f == Field::R ? R : (f == Field::U ? U : Psi); }
};

/// Grid sizes of each subdomain, in order.
struct Layout {
  std::vector<int> sizes;

  [[nodiscard]] int subdomains() const { return static_cast<int>(sizes.size()); }
  [[nodiscard]] int total_points() const { return std::accumulate(sizes.begin(), sizes.end(), 0); }
  [[nodiscard]] int length() const { return 3 * total_points() + subdomains(); }

  [[nodiscard]] int offset(int sub, Field f) const {
    int before = 0;
    for (int k = 0; k < sub; ++k) before += sizes[static_cast<std::size_t>(k)];
    return static_cast<int>(f) * total_points() + before;
  }
  [[nodiscard]] int ell_offset(int sub) const { return 3 * total_points() + sub; }

  bool operator==(const Layout&) const = default;
};

struct SolutionVector {
  Layout layout;
  Vector data;

  [[nodiscard]] int n_v() const { return static_cast<int>(data.size()); }

  [[nodiscard]] auto segment(int sub, Field f) const {
    return data.segment(layout.offset(sub, f), layout.sizes[static_cast<std::size_t>(sub)]);
  }
  auto segment(int sub, Field f) {
    return data.segment(layout.offset(sub, f), layout.sizes[static_cast<std::size_t>(sub)]);
  }
  [[nodiscard]] double ell(int sub) const { return data[layout.ell_offset(sub)]; }
  double& ell(int sub) { return data[layout.ell_offset(sub)]; }
};

inline SolutionVector pack(const std::vector<SubdomainState>& subs) {
  Layout layout;
  for (const auto& s : subs) {
    if (s.n < 2 || s.R.size() != s.n || s.U.size() != s.n || s.Psi.size() != s.n) {
      throw LayoutMismatch("pack: subdomain field sizes do not match n");
    }
    layout.sizes.push_back(s.n);
  }
  SolutionVector v{layout, Vector::Zero(layout.length())};
  for (int k = 0; k < layout.subdomains(); ++k) {
    const auto& s = subs[static_cast<std::size_t>(k)];
    v.segment(k, Field::R) = s.R;
    v.segment(k, Field::U) = s.U;
    v.segment(k, Field::Psi) = s.Psi;
    v.ell(k) = s.ell;
  }
  return v;
}

inline std::vector<SubdomainState> unpack(const SolutionVector& v) {
  if (v.data.size() != v.layout.length()) {
    throw LayoutMismatch("unpack: data length " + std::to_string(v.data.size()) +
                         " does not match layout length " + std::to_string(v.layout.length()));
  }
  std::vector<SubdomainState> out;
  for (int k = 0; k < v.layout.subdomains(); ++k) {
    SubdomainState s;
    s.n = v.layout.sizes[static_cast<std::size_t>(k)];
    s.R = v.segment(k, Field::R);
    s.U = v.segment(k, Field::U);
    s.Psi = v.segment(k, Field::Psi);
    s.ell = v.ell(k);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace capsurf

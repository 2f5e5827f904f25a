#pragma once

// Chebyshev grids, rectangular collocation matrices, barycentric resampling
// and Chebyshev coefficient transforms. All grids are second-kind points in
// ascending order on [-1, 1].

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <algorithm>
#include <string>
#include <vector>

#include "capsurf/error.hpp"

namespace capsurf::cheb {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Second-kind Chebyshev grid, ascending: x_j = -cos(j*pi/(n-1)).
struct ChebGrid {
  int n = 0;
  Vector points;
};

/// Dense (n-1) x n matrix mapping n-point samples to samples of the
/// interpolant (order 0) or of its derivative (order 1) on the (n-1)-point grid.
struct RectDiffMat {
  int order = 0;
  Matrix entries;

  [[nodiscard]] Eigen::Index rows() const { return entries.rows(); }
  [[nodiscard]] Eigen::Index cols() const { return entries.cols(); }
};

inline ChebGrid chebpts(int n) {
  if (n < 2) {
    throw InvalidGrid("chebpts: need at least 2 points, got " + std::to_string(n));
  }
  ChebGrid grid{n, Vector(n)};
  const int m = n - 1;
  // The sine form is exactly antisymmetric and hits 0 and +-1 exactly.
  for (int j = 0; j < n; ++j) {
    grid.points[j] = std::sin(std::numbers::pi * (2.0 * j - m) / (2.0 * m));
  }
  grid.points[0] = -1.0;
  grid.points[m] = 1.0;
  return grid;
}

/// Barycentric weights for the second-kind grid (up to a common factor).
inline Vector bary_weights(int n) {
  Vector w(n);
  for (int j = 0; j < n; ++j) {
    w[j] = (j % 2 == 0) ? 1.0 : -1.0;
  }
  w[0] *= 0.5;
  w[n - 1] *= 0.5;
  return w;
}

namespace detail {

/// Interpolation matrix from the nodes `x` (weights `w`) to arbitrary targets.
inline Matrix interp_matrix(const Vector& x, const Vector& w, const Vector& targets) {
  const Eigen::Index n = x.size();
  Matrix P = Matrix::Zero(targets.size(), n);
  for (Eigen::Index i = 0; i < targets.size(); ++i) {
    const double t = targets[i];
    Eigen::Index hit = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (t == x[j]) {
        hit = j;
        break;
      }
    }
    if (hit >= 0) {
      P(i, hit) = 1.0;
      continue;
    }
    double denom = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double c = w[j] / (t - x[j]);
      P(i, j) = c;
      denom += c;
    }
    P.row(i) /= denom;
  }
  return P;
}

}  // namespace detail

/// Square first-derivative matrix on chebpts(n); diagonal by negative row sums.
inline Matrix diffmat_square(int n) {
  const ChebGrid g = chebpts(n);
  const Vector w = bary_weights(n);
  Matrix D = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double diag = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      D(i, j) = (w[j] / w[i]) / (g.points[i] - g.points[j]);
      diag -= D(i, j);
    }
    D(i, i) = diag;
  }
  return D;
}

/// Interpolation from chebpts(n) to arbitrary points in [-1, 1].
inline Matrix interp_matrix(int n, const Vector& targets) {
  const ChebGrid g = chebpts(n);
  return detail::interp_matrix(g.points, bary_weights(n), targets);
}

inline RectDiffMat diffmat_rect(int n, int order) {
  if (n < 2) {
    throw InvalidGrid("diffmat_rect: need at least 2 points");
  }
  if (order != 0 && order != 1) {
    throw UnsupportedOrder("diffmat_rect: only orders 0 and 1 are supported");
  }
  const Matrix P = interp_matrix(n, chebpts(n - 1).points);
  if (order == 0) {
    return {0, P};
  }
  // p' has degree n-2, so interpolating its nodal values is exact.
  return {1, P * diffmat_square(n)};
}

/// Row w with w . f = p(tau0), p the interpolant of f on chebpts(n).
inline Vector eval_row(int n, double tau0) {
  Vector t(1);
  t[0] = tau0;
  return interp_matrix(n, t).row(0).transpose();
}

inline Vector resample(const Vector& values, int n_new) {
  const auto n = static_cast<int>(values.size());
  if (n < 2 || n_new < 2) {
    throw InvalidGrid("resample: grids need at least 2 points");
  }
  if (n_new == n) {
    return values;
  }
  return interp_matrix(n, chebpts(n_new).points) * values;
}

/// Evaluate the interpolant of `values` (on chebpts(n)) at `tau`.
inline double interpolate(const Vector& values, double tau) {
  return eval_row(static_cast<int>(values.size()), tau).dot(values);
}

/// Chebyshev coefficients c_0..c_{n-1} of the interpolant through `values`.
inline Vector cheb_coeffs(const Vector& values) {
  const auto n = static_cast<int>(values.size());
  if (n < 2) {
    throw InvalidGrid("cheb_coeffs: need at least 2 values");
  }
  const int N = n - 1;
  Vector c = Vector::Zero(n);
  // Ascending node j is the descending node k = N - j, at angle k*pi/N.
  for (int m = 0; m <= N; ++m) {
    double sum = 0.0;
    for (int k = 0; k <= N; ++k) {
      const double f = values[N - k];
      const double weight = (k == 0 || k == N) ? 0.5 : 1.0;
      sum += weight * f * std::cos(std::numbers::pi * static_cast<double>(m) * k / N);
    }
    c[m] = 2.0 * sum / N;
  }
  c[0] *= 0.5;
  c[N] *= 0.5;
  return c;
}

/// Inverse of cheb_coeffs: values on chebpts(n) of sum_m c_m T_m.
inline Vector cheb_values(const Vector& coeffs) {
  const auto n = static_cast<int>(coeffs.size());
  if (n < 2) {
    throw InvalidGrid("cheb_values: need at least 2 coefficients");
  }
  const int N = n - 1;
  Vector v = Vector::Zero(n);
  for (int j = 0; j < n; ++j) {
    const int k = N - j;
    double sum = 0.0;
    for (int m = 0; m <= N; ++m) {
      sum += coeffs[m] * std::cos(std::numbers::pi * static_cast<double>(m) * k / N);
    }
    v[j] = sum;
  }
  return v;
}

/// Clenshaw evaluation of a Chebyshev series at x.
inline double clenshaw(const Vector& c, double x) {
  double b1 = 0.0;
  double b2 = 0.0;
  for (Eigen::Index k = c.size() - 1; k >= 1; --k) {
    const double b0 = 2.0 * x * b1 - b2 + c[k];
    b2 = b1;
    b1 = b0;
  }
  return x * b1 - b2 + c[0];
}

/// Samples on chebpts(n) of the indefinite integral F(tau) = int_{-1}^{tau} p,
/// p the interpolant of `values`.
inline Vector cumsum(const Vector& values) {
  const auto n = static_cast<int>(values.size());
  const Vector c = cheb_coeffs(values);
  Vector C = Vector::Zero(n + 1);
  for (int k = 0; k < n; ++k) {
    // int T_0 = T_1, int T_1 = T_2/4, int T_k = T_{k+1}/(2(k+1)) - T_{k-1}/(2(k-1)).
    if (k == 0) {
      C[1] += c[0];
    } else if (k == 1) {
      C[2] += c[1] / 4.0;
    } else {
      C[k + 1] += c[k] / (2.0 * (k + 1));
      C[k - 1] -= c[k] / (2.0 * (k - 1));
    }
  }
  const double at_left = clenshaw(C, -1.0);
  const ChebGrid g = chebpts(n);
  Vector out(n);
  for (int j = 0; j < n; ++j) {
    out[j] = clenshaw(C, g.points[j]) - at_left;
  }
  out[0] = 0.0;
  return out;
}

/// Ratio of the largest of the last three coefficients to max(largest
/// coefficient, floor). The floor keeps near-zero fields from reading as noisy.
inline double tail_ratio(const Vector& values, double floor = 1.0) {
  const Vector c = cheb_coeffs(values).cwiseAbs();
  const auto n = c.size();
  const Eigen::Index tail = std::min<Eigen::Index>(3, n);
  const double tail_max = c.tail(tail).maxCoeff();
  const double scale = std::max(c.maxCoeff(), floor);
  return tail_max / scale;
}

}  // namespace capsurf::cheb

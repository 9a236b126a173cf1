// Univariate three-term recurrences and Gauss rules built from them.
#pragma once

#include "mvops/matrixkit.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvops {

/// Monic recurrence p_{n+1} = (t - alpha_n) p_n - beta_n p_{n-1}, with
/// beta_0 the total mass. The orthonormal form
///   t p_n = a_n p_{n+1} + b_n p_n + a_{n-1} p_{n-1}
/// has b_n = alpha_n and a_n = sqrt(beta_{n+1}).
struct Recurrence1D {
  std::string label;
  std::vector<Real> alpha;  // alpha_0, alpha_1, ...
  std::vector<Real> beta;   // beta_0 (mass), beta_1, ...

  int size() const { return static_cast<int>(alpha.size()); }
  Real mass() const { return beta.at(0); }
  Real b(int n) const { return alpha.at(static_cast<std::size_t>(n)); }
  Real a(int n) const { return std::sqrt(beta.at(static_cast<std::size_t>(n) + 1)); }

  /// Monic p_0..p_n, ascending coefficients.
  std::vector<std::vector<Real>> monic_polys(int n) const {
    if (n + 1 > size()) throw std::out_of_range("Recurrence1D: not enough coefficients");
    std::vector<std::vector<Real>> p{{1}};
    if (n == 0) return p;
    p.push_back({-alpha[0], 1});
    for (int k = 1; k < n; ++k) {
      const auto& cur = p[static_cast<std::size_t>(k)];
      const auto& prev = p[static_cast<std::size_t>(k) - 1];
      std::vector<Real> next(cur.size() + 1, 0);
      for (std::size_t j = 0; j < cur.size(); ++j) {
        next[j + 1] += cur[j];
        next[j] -= alpha[static_cast<std::size_t>(k)] * cur[j];
      }
      for (std::size_t j = 0; j < prev.size(); ++j) next[j] -= beta[static_cast<std::size_t>(k)] * prev[j];
      p.push_back(std::move(next));
    }
    return p;
  }

  /// Orthonormal p_0..p_n (positive leading coefficient) for the weight with
  /// total mass beta_0.
  std::vector<std::vector<Real>> orthonormal_polys(int n) const {
    auto p = monic_polys(n);
    Real norm2 = mass();
    for (int k = 0; k <= n; ++k) {
      if (k > 0) norm2 *= beta[static_cast<std::size_t>(k)];
      const Real s = 1 / std::sqrt(norm2);
      for (auto& c : p[static_cast<std::size_t>(k)]) c *= s;
    }
    return p;
  }
};

inline Recurrence1D jacobi_recurrence(Real a, Real b, int n) {
  if (!(a > -1 && b > -1)) throw std::invalid_argument("jacobi_recurrence: need a, b > -1");
  Recurrence1D r;
  r.label = "jacobi(a=" + format_real(a) + ",b=" + format_real(b) + ")";
  const Real ab = a + b;
  for (int k = 0; k < n; ++k) {
    if (k == 0) {
      r.alpha.push_back((b - a) / (ab + 2));
      r.beta.push_back(std::exp((ab + 1) * std::log(Real(2)) + std::lgamma(a + 1) + std::lgamma(b + 1) -
                                std::lgamma(ab + 2)));
      continue;
    }
    const Real t = 2 * k + ab;
    r.alpha.push_back((b * b - a * a) / (t * (t + 2)));
    if (k == 1)
      r.beta.push_back(4 * (1 + a) * (1 + b) / ((2 + ab) * (2 + ab) * (3 + ab)));
    else
      r.beta.push_back(4 * k * (k + a) * (k + b) * (k + ab) / (t * t * (t + 1) * (t - 1)));
  }
  return r;
}

/// Laguerre weight t^alpha e^{-t} on (0, inf), unnormalized.
inline Recurrence1D laguerre_recurrence(Real alpha, int n) {
  if (!(alpha > -1)) throw std::invalid_argument("laguerre_recurrence: need alpha > -1");
  Recurrence1D r;
  r.label = "laguerre(alpha=" + format_real(alpha) + ")";
  for (int k = 0; k < n; ++k) {
    r.alpha.push_back(2 * k + alpha + 1);
    r.beta.push_back(k == 0 ? std::tgamma(alpha + 1) : k * (k + alpha));
  }
  return r;
}

/// Orthonormal Chebyshev recurrences of kinds 1..4 for the normalized
/// weights (total mass 1), with the coefficient values hard-coded.
inline Recurrence1D chebyshev_recurrence(int kind, int n) {
  if (kind < 1 || kind > 4) throw std::invalid_argument("chebyshev_recurrence: kind must be 1..4");
  Recurrence1D r;
  r.label = "chebyshev(kind=" + std::to_string(kind) + ")";
  for (int k = 0; k < n; ++k) {
    Real b = 0;
    if (k == 0 && kind == 3) b = -0.5L;
    if (k == 0 && kind == 4) b = 0.5L;
    r.alpha.push_back(b);
    if (k == 0)
      r.beta.push_back(1);
    else if (k == 1 && kind == 1)
      r.beta.push_back(0.5L);  // a_0 = 1/sqrt(2)
    else
      r.beta.push_back(0.25L);  // a_n = 1/2
  }
  return r;
}

/// Jacobi parameters (a, b) of the Chebyshev weight of the given kind.
inline std::pair<Real, Real> chebyshev_jacobi_params(int kind) {
  switch (kind) {
    case 1: return {-0.5L, -0.5L};
    case 2: return {0.5L, 0.5L};
    case 3: return {0.5L, -0.5L};
    case 4: return {-0.5L, 0.5L};
    default: throw std::invalid_argument("chebyshev kind must be 1..4");
  }
}

struct GaussRule {
  std::vector<Real> nodes;
  std::vector<Real> weights;
};

/// Golub–Welsch: n-point Gauss rule of the recurrence (exact to degree 2n-1).
inline GaussRule gauss_rule(const Recurrence1D& r, int n) {
  if (n < 1 || n > r.size()) throw std::invalid_argument("gauss_rule: need 1 <= n <= recurrence length");
  Matrix jac = Matrix::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    jac(k, k) = r.alpha[static_cast<std::size_t>(k)];
    if (k + 1 < n) jac(k, k + 1) = jac(k + 1, k) = std::sqrt(r.beta[static_cast<std::size_t>(k) + 1]);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(jac);
  GaussRule g;
  for (int k = 0; k < n; ++k) {
    g.nodes.push_back(es.eigenvalues()(k));
    const Real v0 = es.eigenvectors()(0, k);
    g.weights.push_back(r.mass() * v0 * v0);
  }
  return g;
}

/// Maps a rule on [-1, 1] to [0, 1] (weights scaled by `weight_scale`).
inline GaussRule to_unit_interval(GaussRule g, Real weight_scale) {
  for (auto& x : g.nodes) x = (x + 1) / 2;
  for (auto& w : g.weights) w *= weight_scale;
  return g;
}

}  // namespace mvops

// Moment functionals as memoized oracles alpha -> s_alpha, their algebra
// (polynomial left products, tensor composition, divided differences and
// point masses) and the built-in weights used by the family catalog.
#pragma once

#include "mvops/indexing.hpp"
#include "mvops/matrixkit.hpp"
#include "mvops/polynomial.hpp"
#include "mvops/recurrence.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mvops {

/// A linear functional on polynomials in d variables, given by its moments.
///
/// Copies share one memo table. The table is guarded by a mutex, so a single
/// instance may be queried from several threads.
class MomentFunctional {
 public:
  using Oracle = std::function<Real(const MultiIndex&)>;

  MomentFunctional() = default;
  MomentFunctional(int d, std::string label, Oracle oracle, std::string scale = "unnormalized")
      : d_(d), label_(std::move(label)), scale_(std::move(scale)),
        state_(std::make_shared<State>(std::move(oracle))) {}

  int dim() const { return d_; }
  const std::string& label() const { return label_; }
  /// How the functional is normalized ("<u,1> = 1", "unnormalized", ...).
  const std::string& scale() const { return scale_; }

  Real moment(const MultiIndex& alpha) const {
    if (static_cast<int>(alpha.size()) != d_) throw std::invalid_argument("moment: multi-index has wrong length");
    {
      std::lock_guard<std::mutex> lock(state_->mutex);
      auto it = state_->memo.find(alpha);
      if (it != state_->memo.end()) return it->second;
    }
    const Real value = state_->oracle(alpha);
    if (!std::isfinite(value)) throw std::domain_error("moment: non-finite value for " + label_);
    std::lock_guard<std::mutex> lock(state_->mutex);
    state_->memo.emplace(alpha, value);
    return value;
  }

  /// Moments of every monomial of degree <= max_degree, in flat order.
  Vector moment_vector(int max_degree) const {
    const auto idx = flat_indices(d_, max_degree);
    Vector s(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t f = 0; f < idx.size(); ++f) s(static_cast<Eigen::Index>(f)) = moment(idx[f]);
    return s;
  }

 private:
  struct State {
    explicit State(Oracle o) : oracle(std::move(o)) {}
    Oracle oracle;
    std::mutex mutex;
    std::map<MultiIndex, Real> memo;
  };

  int d_ = 1;
  std::string label_;
  std::string scale_;
  std::shared_ptr<State> state_;
};

/// lambda(x) = sum_i a_i x_i + b.
struct LinearPoly {
  std::vector<Real> a;
  Real b = 0;

  int dim() const { return static_cast<int>(a.size()); }
  bool is_degree_one(Real tol = 0) const {
    Real s = 0;
    for (Real v : a) s += std::abs(v);
    return s > tol;
  }
  PolyVec to_poly() const { return PolyVec::linear(a, b); }
};

/// <u, p> for each row of p.
inline Vector apply(const MomentFunctional& u, const PolyVec& p) {
  if (u.dim() != p.dim()) throw ShapeError("apply: dimension mismatch");
  return p.coeffs() * u.moment_vector(p.degree());
}

/// <u, p q^t>, the matrix of pairwise products contracted with the moments.
inline Matrix apply_outer(const MomentFunctional& u, const PolyVec& p, const PolyVec& q) {
  if (u.dim() != p.dim() || u.dim() != q.dim()) throw ShapeError("apply_outer: dimension mismatch");
  const auto ip = flat_indices(p.dim(), p.degree());
  const auto iq = flat_indices(q.dim(), q.degree());
  Matrix s(static_cast<Eigen::Index>(ip.size()), static_cast<Eigen::Index>(iq.size()));
  for (std::size_t a = 0; a < ip.size(); ++a)
    for (std::size_t b = 0; b < iq.size(); ++b)
      s(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = u.moment(add(ip[a], iq[b]));
  return p.coeffs() * s * q.coeffs().transpose();
}

/// (p u)(x^alpha) = u(p x^alpha).
inline MomentFunctional left_multiply(const PolyVec& p, const MomentFunctional& u) {
  if (p.rows() != 1 || p.dim() != u.dim()) throw ShapeError("left_multiply: need a scalar polynomial of equal dimension");
  const auto terms = flat_indices(p.dim(), p.degree());
  std::vector<std::pair<MultiIndex, Real>> nz;
  for (std::size_t f = 0; f < terms.size(); ++f)
    if (p.coeffs()(0, static_cast<Eigen::Index>(f)) != 0) nz.emplace_back(terms[f], p.coeffs()(0, static_cast<Eigen::Index>(f)));
  return MomentFunctional(
      u.dim(), "poly*" + u.label(),
      [u, nz](const MultiIndex& alpha) {
        Real s = 0;
        for (const auto& [beta, c] : nz) s += c * u.moment(add(alpha, beta));
        return s;
      },
      u.scale());
}

inline MomentFunctional left_multiply(const LinearPoly& lambda, const MomentFunctional& u) {
  return left_multiply(lambda.to_poly(), u);
}

/// Composition of functionals in separate groups of variables:
/// s_{(alpha_1, alpha_2, ...)} = prod_k s^{(k)}_{alpha_k}.
inline MomentFunctional tensor(const std::vector<MomentFunctional>& factors) {
  if (factors.empty()) throw std::invalid_argument("tensor: no factors");
  int d = 0;
  std::string label;
  for (const auto& f : factors) {
    d += f.dim();
    label += (label.empty() ? "" : " o ") + f.label();
  }
  return MomentFunctional(d, label, [factors](const MultiIndex& alpha) {
    Real s = 1;
    std::size_t pos = 0;
    for (const auto& f : factors) {
      MultiIndex part(alpha.begin() + static_cast<long>(pos), alpha.begin() + static_cast<long>(pos) + f.dim());
      s *= f.moment(part);
      pos += static_cast<std::size_t>(f.dim());
    }
    return s;
  });
}

inline MomentFunctional tensor(const MomentFunctional& u, const MomentFunctional& w) { return tensor({u, w}); }

inline MomentFunctional sum(const MomentFunctional& u, const MomentFunctional& w) {
  if (u.dim() != w.dim()) throw ShapeError("sum: dimension mismatch");
  return MomentFunctional(u.dim(), u.label() + " + " + w.label(),
                          [u, w](const MultiIndex& a) { return u.moment(a) + w.moment(a); });
}

inline MomentFunctional scaled(const MomentFunctional& u, Real s) {
  return MomentFunctional(u.dim(), format_real(s) + "*" + u.label(),
                          [u, s](const MultiIndex& a) { return s * u.moment(a); });
}

/// mass * delta_c in one variable.
inline MomentFunctional point_mass(Real c, Real mass) {
  return MomentFunctional(1, format_real(mass) + "*delta_" + format_real(c),
                          [c, mass](const MultiIndex& a) { return mass * std::pow(c, a[0]); });
}

/// <(x - c)^{-1} u, p> = <u, (p(x) - p(c)) / (x - c)>, one variable. The
/// quotient of x^m is sum_{l<m} c^{m-1-l} x^l (synthetic division).
inline MomentFunctional divided_difference(const MomentFunctional& u, Real c) {
  if (u.dim() != 1) throw ShapeError("divided_difference: univariate functionals only");
  return MomentFunctional(1, "(x-" + format_real(c) + ")^-1 " + u.label(), [u, c](const MultiIndex& a) {
    Real s = 0, cp = 1;
    for (int l = a[0] - 1; l >= 0; --l) {
      s += cp * u.moment({l});
      cp *= c;
    }
    return s;
  });
}

// ---------------------------------------------------------------------------
// Univariate weights.

/// Gauss-rule moments of a recurrence, with (max degree + 2) nodes.
inline MomentFunctional functional_from_recurrence(const std::function<Recurrence1D(int)>& make, std::string label,
                                                   std::string scale = "unnormalized") {
  return MomentFunctional(
      1, std::move(label),
      [make](const MultiIndex& a) {
        const int n = a[0] + 2;
        const GaussRule g = gauss_rule(make(n), n);
        Real s = 0;
        for (std::size_t k = 0; k < g.nodes.size(); ++k) s += g.weights[k] * std::pow(g.nodes[k], a[0]);
        return s;
      },
      std::move(scale));
}

/// (1 - t)^a (1 + t)^b on [-1, 1], unnormalized.
inline MomentFunctional jacobi_functional(Real a, Real b) {
  (void)jacobi_recurrence(a, b, 1);
  return functional_from_recurrence([a, b](int n) { return jacobi_recurrence(a, b, n); },
                                    "jacobi(a=" + format_real(a) + ",b=" + format_real(b) + ")");
}

/// t^alpha e^{-t} on (0, inf), unnormalized: s_m = Gamma(m + alpha + 1).
inline MomentFunctional laguerre_functional(Real alpha) {
  if (!(alpha > -1)) throw std::invalid_argument("laguerre_functional: need alpha > -1");
  return MomentFunctional(1, "laguerre(alpha=" + format_real(alpha) + ")",
                          [alpha](const MultiIndex& a) { return std::tgamma(a[0] + alpha + 1); });
}

/// Gauss–Laguerre route to the same moments (cross-check only).
inline Real laguerre_moment_quadrature(Real alpha, int m) {
  const int n = m + 2;
  const GaussRule g = gauss_rule(laguerre_recurrence(alpha, n), n);
  Real s = 0;
  for (std::size_t k = 0; k < g.nodes.size(); ++k) s += g.weights[k] * std::pow(g.nodes[k], m);
  return s;
}

/// Normalized Chebyshev weight of kind 1..4.
inline MomentFunctional chebyshev_functional(int kind) {
  return functional_from_recurrence([kind](int n) { return chebyshev_recurrence(kind, n); },
                                    "chebyshev(kind=" + std::to_string(kind) + ")", "<u,1> = 1");
}

/// x^{-1} u_x + Gamma(alpha+1)/(alpha+1-a1) delta_0 with u_x the Laguerre
/// weight; satisfies x v = u_x.
inline MomentFunctional krall_laguerre_functional(Real alpha, Real a1) {
  if (!(alpha > -1)) throw std::invalid_argument("krall_laguerre: need alpha > -1");
  if (a1 == 0) throw std::invalid_argument("krall_laguerre: need a1 != 0");
  if (alpha + 1 - a1 == 0) throw std::invalid_argument("krall_laguerre: need alpha + 1 - a1 != 0");
  const Real mass = std::tgamma(alpha + 1) / (alpha + 1 - a1);
  MomentFunctional v = sum(divided_difference(laguerre_functional(alpha), 0), point_mass(0, mass));
  return MomentFunctional(1, "krall-laguerre(alpha=" + format_real(alpha) + ",a1=" + format_real(a1) + ")",
                          [v](const MultiIndex& a) { return v.moment(a); });
}

/// (1-x)^{-1} u_x + <u_x,1>(alpha+beta+2)/(2(alpha+1)+a1(alpha+beta+2)) delta_1
/// with u_x the Jacobi weight; satisfies (1 - x) v = u_x. Here
/// <(1-x)^{-1} u, p> = <u, (p(x) - p(1)) / (1 - x)> = -<(x-1)^{-1} u, p>.
inline MomentFunctional krall_jacobi_functional(Real alpha, Real beta, Real a1) {
  if (!(alpha > -1 && beta > -1)) throw std::invalid_argument("krall_jacobi: need alpha, beta > -1");
  if (a1 == 0) throw std::invalid_argument("krall_jacobi: need a1 != 0");
  const Real denom = 2 * (alpha + 1) + a1 * (alpha + beta + 2);
  if (denom == 0) throw std::invalid_argument("krall_jacobi: need 2(alpha+1) + a1(alpha+beta+2) != 0");
  const MomentFunctional u = jacobi_functional(alpha, beta);
  const Real mass = u.moment({0}) * (alpha + beta + 2) / denom;
  MomentFunctional v = sum(scaled(divided_difference(u, 1), -1), point_mass(1, mass));
  return MomentFunctional(
      1, "krall-jacobi(alpha=" + format_real(alpha) + ",beta=" + format_real(beta) + ",a1=" + format_real(a1) + ")",
      [v](const MultiIndex& a) { return v.moment(a); });
}

// ---------------------------------------------------------------------------
// Multivariate weights.

inline Real pochhammer(Real a, int n) {
  Real r = 1;
  for (int k = 0; k < n; ++k) r *= a + k;
  return r;
}

inline Real beta_fn(Real x, Real y) { return std::exp(std::lgamma(x) + std::lgamma(y) - std::lgamma(x + y)); }

/// Simplex weight prod x_i^{kappa_i - 1/2} (1-|x|)^{kappa_{d+1} - 1/2},
/// normalized, by the Dirichlet integral written with Pochhammer symbols.
inline MomentFunctional simplex_functional(const std::vector<Real>& kappa) {
  const int d = static_cast<int>(kappa.size()) - 1;
  if (d < 1) throw std::invalid_argument("simplex: need d + 1 >= 2 parameters");
  Real total = 0;
  for (Real k : kappa) {
    if (!(k > -0.5L)) throw std::invalid_argument("simplex: need kappa_i > -1/2");
    total += k;
  }
  std::string label = "simplex(k=";
  for (std::size_t i = 0; i < kappa.size(); ++i) label += (i ? "," : "") + format_real(kappa[i]);
  label += ")";
  return MomentFunctional(
      d, label,
      [kappa, total, d](const MultiIndex& a) {
        Real num = 1;
        for (int i = 0; i < d; ++i) num *= pochhammer(kappa[static_cast<std::size_t>(i)] + 0.5L, a[static_cast<std::size_t>(i)]);
        return num / pochhammer(total + (d + 1) * 0.5L, total_degree(a));
      },
      "<u,1> = 1");
}

/// Collapsed-coordinate Gauss–Jacobi route to the normalized simplex moment
/// (cross-check for simplex_functional).
inline Real simplex_moment_quadrature(const std::vector<Real>& kappa, const MultiIndex& alpha) {
  const int d = static_cast<int>(kappa.size()) - 1;
  // x_j = t_j prod_{l<j} (1 - t_l); the integral factorizes over t_l with
  // weight t^{kappa_l - 1/2} (1 - t)^{e_l} and polynomial t^{alpha_l} (1-t)^{tail_l}.
  auto integrate = [&](const MultiIndex& a) {
    Real value = 1;
    for (int l = 0; l < d; ++l) {
      Real e = (d - l - 1) + kappa[static_cast<std::size_t>(d)] - 0.5L;
      int tail = 0;
      for (int j = l + 1; j < d; ++j) {
        e += kappa[static_cast<std::size_t>(j)] - 0.5L;
        tail += a[static_cast<std::size_t>(j)];
      }
      const Real p = kappa[static_cast<std::size_t>(l)] - 0.5L;
      const int deg = a[static_cast<std::size_t>(l)] + tail;
      const int n = deg + 2;
      // weight t^p (1-t)^e on [0,1] is Jacobi(a=e, b=p) on [-1,1] mapped.
      const GaussRule g = to_unit_interval(gauss_rule(jacobi_recurrence(e, p, n), n), std::pow(Real(2), -(e + p + 1)));
      Real s = 0;
      for (std::size_t k = 0; k < g.nodes.size(); ++k)
        s += g.weights[k] * std::pow(g.nodes[k], a[static_cast<std::size_t>(l)]) * std::pow(1 - g.nodes[k], tail);
      value *= s;
    }
    return value;
  };
  return integrate(alpha) / integrate(MultiIndex(static_cast<std::size_t>(d), 0));
}

/// Disk weight (1 - x^2 - y^2)^mu by Beta integrals in polar coordinates.
/// Normalized to <u,1> = 1 unless `normalized` is false.
inline MomentFunctional disk_functional(Real mu, bool normalized = true) {
  if (!(mu > -1)) throw std::invalid_argument("disk: need mu > -1");
  const Real total = std::numbers::pi_v<Real> / (mu + 1);
  return MomentFunctional(
      2, "disk(mu=" + format_real(mu) + ")",
      [mu, total, normalized](const MultiIndex& a) -> Real {
        if (a[0] % 2 || a[1] % 2) return 0;
        const Real j = a[0], k = a[1];
        const Real v = 0.5L * beta_fn((j + k) / 2 + 1, mu + 1) * 2 * beta_fn((j + 1) / 2, (k + 1) / 2);
        return normalized ? v / total : v;
      },
      normalized ? "<u,1> = 1" : "unnormalized");
}

/// Gauss–Jacobi route to the normalized disk moment: substitute
/// y = sqrt(1-x^2) t and integrate x against (1-x^2)^{mu+1/2}.
inline Real disk_moment_quadrature(Real mu, const MultiIndex& alpha) {
  auto integrate = [mu](int j, int k) -> Real {
    if (j % 2 || k % 2) return 0;
    const int nx = j + k + 2, ny = k + 2;
    const GaussRule gx = gauss_rule(jacobi_recurrence(mu + 0.5L, mu + 0.5L, nx), nx);
    const GaussRule gy = gauss_rule(jacobi_recurrence(mu, mu, ny), ny);
    Real sx = 0, sy = 0;
    for (std::size_t q = 0; q < gx.nodes.size(); ++q)
      sx += gx.weights[q] * std::pow(gx.nodes[q], j) * std::pow(1 - gx.nodes[q] * gx.nodes[q], k / 2);
    for (std::size_t q = 0; q < gy.nodes.size(); ++q) sy += gy.weights[q] * std::pow(gy.nodes[q], k);
    return sx * sy;
  };
  return integrate(alpha[0], alpha[1]) / integrate(0, 0);
}

/// prod_i (1 - x_i)^{a_i} (1 + x_i)^{b_i} on the cube, unnormalized.
inline MomentFunctional cube_functional(const std::vector<Real>& a, const std::vector<Real>& b) {
  if (a.size() != b.size() || a.empty()) throw std::invalid_argument("cube: need equally many a and b parameters");
  std::vector<MomentFunctional> f;
  for (std::size_t i = 0; i < a.size(); ++i) f.push_back(jacobi_functional(a[i], b[i]));
  return tensor(f);
}

/// x^kappa e^{-|x|_1} on R^d_+, unnormalized.
inline MomentFunctional multi_laguerre_functional(const std::vector<Real>& kappa) {
  if (kappa.empty()) throw std::invalid_argument("multi-laguerre: need at least one parameter");
  std::vector<MomentFunctional> f;
  for (Real k : kappa) f.push_back(laguerre_functional(k));
  return tensor(f);
}

/// Product of d normalized Chebyshev weights of one kind.
inline MomentFunctional product_chebyshev_functional(int kind, int d) {
  return tensor(std::vector<MomentFunctional>(static_cast<std::size_t>(d), chebyshev_functional(kind)));
}

/// The symmetric weight (u^2 - 4v)^{-1/2} w(x) w(y) in the variables
/// u = x + y, v = x y, for w the normalized Chebyshev weight of a kind:
/// s_{(j,k)} = iint (x+y)^j (xy)^k w(x) w(y) dx dy (so <u,1> = 1).
inline MomentFunctional koornwinder_chebyshev_functional(int kind) {
  return MomentFunctional(
      2, "koornwinder-chebyshev(kind=" + std::to_string(kind) + ")",
      [kind](const MultiIndex& a) {
        const int n = (a[0] + 2 * a[1]) / 2 + 2;
        const GaussRule g = gauss_rule(chebyshev_recurrence(kind, n), n);
        Real s = 0;
        for (std::size_t p = 0; p < g.nodes.size(); ++p)
          for (std::size_t q = 0; q < g.nodes.size(); ++q)
            s += g.weights[p] * g.weights[q] * std::pow(g.nodes[p] + g.nodes[q], a[0]) *
                 std::pow(g.nodes[p] * g.nodes[q], a[1]);
        return s;
      },
      "<u,1> = 1 (full-square integral; domain constant of the symmetric weight dropped)");
}

}  // namespace mvops

// Concrete pairs of linearly related systems: the Koornwinder–Chebyshev
// quasi-orthogonal combinations, disk polynomials with the weight (1-x)W,
// Krall tensor products, and adjacent simplex / cube / Laguerre families.
// Each bundle builds both systems from moment oracles or explicit formulas,
// compares them with the closed-form relation matrices and feeds the pair
// through the linear-relation checks.
#pragma once

#include "mvops/catalog.hpp"
#include "mvops/construct.hpp"
#include "mvops/indexing.hpp"
#include "mvops/linrel.hpp"
#include "mvops/matrixkit.hpp"
#include "mvops/moments.hpp"
#include "mvops/polynomial.hpp"
#include "mvops/recurrence.hpp"
#include "mvops/report.hpp"
#include "mvops/ttr.hpp"

#include <json.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvops {

struct Tolerances {
  Real rank = kRankTol;
  Real res = kResidualTol;
};

// ---------------------------------------------------------------------------
// Scalar coefficients.

namespace coeff {

inline Real checked_ratio(Real num, Real den, const char* what) {
  if (den == 0) throw std::domain_error(std::string(what) + ": zero denominator");
  return num / den;
}

/// Orthonormal Jacobi adjacency p_m^{(a,b)} = c_m p_m^{(a,b+1)} + d_m p_{m-1}^{(a,b+1)}.
inline Real jacobi_c(int m, Real a, Real b) {
  if (m == 0) return std::sqrt(checked_ratio(2 * (b + 1), a + b + 2, "jacobi_c"));
  return std::sqrt(checked_ratio(2 * (m + b + 1) * (m + a + b + 1), (2 * m + a + b + 2) * (2 * m + a + b + 1), "jacobi_c"));
}
inline Real jacobi_d(int m, Real a, Real b) {
  if (m == 0) return 0;
  return std::sqrt(checked_ratio(2 * m * (m + a), (2 * m + a + b + 1) * (2 * m + a + b), "jacobi_d"));
}

/// Classical Jacobi adjacency P_m^{(a,b)} = f_m P_m^{(a+1,b)} - g_m P_{m-1}^{(a+1,b)}.
inline Real jacobi_f(int m, Real a, Real b) {
  if (m == 0) return 1;
  return checked_ratio(m + a + b + 1, 2 * m + a + b + 1, "jacobi_f");
}
inline Real jacobi_g(int m, Real a, Real b) {
  if (m == 0) return 0;
  return checked_ratio(m + b, 2 * m + a + b + 1, "jacobi_g");
}

/// Simplex parameters for direction l (0-based) at index nu, kappa of length d+1.
inline Real simplex_a(int l, const MultiIndex& nu, const std::vector<Real>& kappa) {
  const int d = static_cast<int>(nu.size());
  Real s = Real(d - l - 2) / 2;
  for (int i = l + 1; i <= d; ++i) s += kappa[static_cast<std::size_t>(i)];
  for (int i = l + 1; i < d; ++i) s += 2 * nu[static_cast<std::size_t>(i)];
  return s;
}
inline Real simplex_b(int l, const std::vector<Real>& kappa) { return kappa[static_cast<std::size_t>(l)] - 0.5L; }

/// Normalization h_nu of the simplex product basis.
inline Real simplex_h(const MultiIndex& nu, const std::vector<Real>& kappa) {
  const int d = static_cast<int>(nu.size());
  if (static_cast<int>(kappa.size()) != d + 1) throw std::invalid_argument("simplex_h: kappa must have d + 1 entries");
  Real num = 1, total = 0;
  for (Real k : kappa) total += k;
  for (int l = 0; l < d; ++l) {
    Real base = Real(d - l + 1) / 2;
    for (int i = l; i <= d; ++i) base += kappa[static_cast<std::size_t>(i)];
    for (int i = l + 1; i < d; ++i) base += 2 * nu[static_cast<std::size_t>(i)];
    num *= pochhammer(base, 2 * nu[static_cast<std::size_t>(l)]);
  }
  return std::sqrt(num / pochhammer(total + Real(d + 1) / 2, 2 * total_degree(nu)));
}

inline Real harmonic(int n) {
  Real s = 0;
  for (int i = 1; i <= n; ++i) s += Real(1) / i;
  return s;
}

/// Krall–Laguerre quasi-definiteness quantities (alpha != 0 and alpha == 0).
inline Real krall_laguerre_alpha(int n, Real alpha, Real a1) {
  return std::tgamma(Real(n)) * std::tgamma(alpha + 1) * (alpha + 1 - a1) + (a1 - 1) * std::tgamma(n + alpha);
}
inline Real krall_laguerre_alpha_tilde(int n, Real a1) { return (a1 - 1) * harmonic(n - 1) + 1; }
/// The one-variable relation coefficient: q_n = p_n + a_n p_{n-1}.
inline Real krall_laguerre_a(int n, Real alpha, Real a1) {
  if (n == 1) return a1;
  if (alpha == 0) return n * checked_ratio(krall_laguerre_alpha_tilde(n + 1, a1), krall_laguerre_alpha_tilde(n, a1), "krall_laguerre_a");
  return checked_ratio(krall_laguerre_alpha(n + 1, alpha, a1), krall_laguerre_alpha(n, alpha, a1), "krall_laguerre_a");
}

inline Real krall_jacobi_constant(Real alpha, Real beta, Real a1) {
  return -checked_ratio(2 * (beta + 1) + a1 * (alpha + beta + 1) * (alpha + beta + 2),
                        2 * (alpha + 1) + a1 * (alpha + beta + 2), "krall_jacobi_constant");
}
inline Real krall_jacobi_alpha(int n, Real alpha, Real beta, Real a1) {
  const Real m = krall_jacobi_constant(alpha, beta, a1);
  return std::tgamma(alpha + 1) * std::tgamma(alpha + beta + 2) * std::tgamma(Real(n)) * std::tgamma(n + beta) +
         m * std::tgamma(beta + 1) * std::tgamma(n + alpha) * std::tgamma(n + alpha + beta);
}
inline Real krall_jacobi_alpha_tilde(int n, Real beta, Real a1) {
  Real s = 0;
  for (int i = 1; i <= n - 1; ++i) s += Real(1) / i + 1 / (beta + i);
  return checked_ratio(2 * (beta + 2), 2 + a1 * (beta + 2), "krall_jacobi_alpha_tilde") - (beta + 1) * s;
}
inline Real krall_jacobi_a(int n, Real alpha, Real beta, Real a1) {
  if (n == 1) return a1;
  if (alpha == 0) {
    const Real pre = -2 * n * (n + beta) / ((2 * n + beta) * (2 * n + beta - 1));
    return pre * checked_ratio(krall_jacobi_alpha_tilde(n + 1, beta, a1), krall_jacobi_alpha_tilde(n, beta, a1), "krall_jacobi_a");
  }
  const Real s = 2 * n + alpha + beta;
  return -2 / (s * (s - 1)) *
         checked_ratio(krall_jacobi_alpha(n + 1, alpha, beta, a1), krall_jacobi_alpha(n, alpha, beta, a1), "krall_jacobi_a");
}

/// Koornwinder–Chebyshev diagonal entry of C~_{n,1} and the scalar
/// condition equivalent to the first-direction compatibility.
inline Real koornwinder_lambda(int n, Real rho, const Recurrence1D& r) {
  return r.a(n - 1) - rho * rho * (r.a(n - 1) - r.a(n)) + rho * (r.b(n - 1) - r.b(n));
}
inline Real koornwinder_scalar_condition(int n, Real rho, const Recurrence1D& r) {
  return (r.a(n - 1) - r.a(n - 2)) + rho * (r.b(n - 1) - r.b(n)) + rho * rho * (r.a(n) - r.a(n - 1));
}

}  // namespace coeff

// ---------------------------------------------------------------------------
// Univariate building blocks.

/// Classical Jacobi P_m^{(a,b)}, ascending coefficients.
inline std::vector<Real> classical_jacobi(int m, Real a, Real b) {
  // (a+1)_m/m! sum_k (-m)_k (m+a+b+1)_k / ((a+1)_k k!) ((1-t)/2)^k
  std::vector<Real> out(static_cast<std::size_t>(m) + 1, 0);
  const Real lead = pochhammer(a + 1, m) / std::tgamma(Real(m + 1));
  for (int k = 0; k <= m; ++k) {
    const Real ck = lead * pochhammer(-m, k) * pochhammer(m + a + b + 1, k) / (pochhammer(a + 1, k) * std::tgamma(Real(k + 1)));
    // ((1-t)/2)^k = 2^{-k} sum_j C(k,j) (-t)^j
    for (int j = 0; j <= k; ++j)
      out[static_cast<std::size_t>(j)] += ck * std::pow(Real(2), -k) * static_cast<Real>(binomial(k, j)) * (j % 2 ? -1 : 1);
  }
  return out;
}

/// Classical Laguerre L_m^{(a)}, ascending coefficients.
inline std::vector<Real> classical_laguerre(int m, Real a) {
  std::vector<Real> out(static_cast<std::size_t>(m) + 1, 0);
  for (int k = 0; k <= m; ++k)
    out[static_cast<std::size_t>(k)] = (k % 2 ? -1 : 1) * pochhammer(a + k + 1, m - k) / (std::tgamma(Real(m - k + 1)) * std::tgamma(Real(k + 1)));
  return out;
}

/// Orthonormal Jacobi p_m^{(a,b)} for the unnormalized weight (1-t)^a (1+t)^b,
/// positive leading coefficient.
inline std::vector<Real> orthonormal_jacobi(int m, Real a, Real b) {
  return jacobi_recurrence(a, b, m + 1).orthonormal_polys(m)[static_cast<std::size_t>(m)];
}

namespace detail {

inline std::vector<Real> unit_vec(int d, int i) {
  std::vector<Real> a(static_cast<std::size_t>(d), 0);
  a[static_cast<std::size_t>(i)] = 1;
  return a;
}

/// Relative coefficient mismatch of two polynomial vectors.
inline Real relative_mismatch(const PolyVec& a, const PolyVec& b) {
  const int deg = std::max(a.degree(), b.degree());
  const PolyVec da = a.padded(deg), db = b.padded(deg);
  const Real scale = std::max<Real>({1, max_abs(da.coeffs()), max_abs(db.coeffs())});
  return max_abs(da.coeffs() - db.coeffs()) / scale;
}

/// Systems of the product form prod_i f_i(nu_i; x_i), one row per index.
inline PolySystem product_system(int d, int N, const std::function<std::vector<Real>(int var, int m)>& factor,
                                 std::string label) {
  std::vector<PolyVec> polys;
  for (int n = 0; n <= N; ++n) {
    std::vector<PolyVec> rows;
    for (const auto& nu : enumerate_indices(d, n)) {
      PolyVec p = PolyVec::constant(d, 1);
      for (int i = 0; i < d; ++i)
        p = p.times(embed_univariate(univariate(factor(i, nu[static_cast<std::size_t>(i)])), d, i));
      rows.push_back(p.truncated(n));
    }
    polys.push_back(stack(rows));
  }
  return PolySystem(d, std::move(polys), false, std::move(label));
}

/// max over degrees of the relative mismatch of Q_n - Khat_n P_n - Mhat_n P_{n-1}.
inline std::vector<Real> relation_residuals(const PolySystem& q, const PolySystem& p, const std::vector<Matrix>& k_hat,
                                            const std::vector<Matrix>& m_hat, int N) {
  std::vector<Real> out;
  for (int n = 0; n <= N; ++n) {
    PolyVec rhs = k_hat[static_cast<std::size_t>(n)] * p[n];
    if (n > 0) rhs = rhs + m_hat[static_cast<std::size_t>(n)] * p[n - 1];
    out.push_back(relative_mismatch(q[n], rhs));
  }
  return out;
}

inline Real ttr_difference(const ThreeTermData& a, const ThreeTermData& b) {
  const int K = std::min(a.size(), b.size());
  Real worst = 0;
  for (int n = 0; n < K; ++n)
    for (int i = 0; i < a.d; ++i) {
      const auto sn = static_cast<std::size_t>(n), si = static_cast<std::size_t>(i);
      worst = std::max({worst, max_abs(a.A[sn][si] - b.A[sn][si]), max_abs(a.B[sn][si] - b.B[sn][si]),
                        max_abs(a.C[sn][si] - b.C[sn][si])});
    }
  return worst / std::max<Real>({1, a.scale(), b.scale()});
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Checks shared by every pair Q (functional v), P (functional u) with
// Q_n = Khat P_n + Mhat P_{n-1}.

struct PairAnalysis {
  LinearRelation relation;  // from the Fourier coefficients of Q on P
  RankClassification ranks;
  GramBlocks h_monic, ht_monic;
  std::optional<LinearPoly> lambda;
  std::vector<Real> mh;
  Report report;
};

/// Relation, rank class, lambda (u = lambda v), the M-H identity and the
/// functional identity itself, for a pair of orthogonal systems. `max_moment`
/// bounds the degree of the moments of v used in the functional identity.
inline PairAnalysis analyze_pair(const PolySystem& q, const MomentFunctional& v, const PolySystem& p,
                                 const MomentFunctional& u, const std::optional<LinearPoly>& expected_lambda,
                                 const Tolerances& tol, int max_moment = -1) {
  PairAnalysis a;
  const GramBlocks h = gram_blocks(u, p), ht = gram_blocks(v, q);
  a.report.add(residual_check("orthogonality of P", -1, -1, orthogonality_defect(u, p), tol.res));
  a.report.add(residual_check("orthogonality of Q", -1, -1, orthogonality_defect(v, q), tol.res));
  a.relation = compute_relation(q, p, u, h);
  for (int n = 2; n <= a.relation.max_degree(); ++n)
    a.report.add(residual_check("fourier tail", n, -1, a.relation.tail_by_degree[static_cast<std::size_t>(n)], tol.res));
  a.ranks = classify_ranks(a.relation, tol.rank);
  a.report.add(flag_check("rank class", a.ranks.cls != RankClass::Mixed, to_string(a.ranks.cls)));
  if (a.ranks.cls != RankClass::Full) return a;

  a.h_monic = to_monic(h, p);
  a.ht_monic = to_monic(ht, q);
  a.lambda = recover_lambda(a.relation, a.h_monic, a.ht_monic, v, tol.rank);
  if (expected_lambda)
    a.report.add(residual_check("lambda direction", -1, -1, direction_error(*a.lambda, *expected_lambda), tol.res));
  a.mh = verify_mh(a.relation, a.h_monic, a.ht_monic, *a.lambda);
  for (std::size_t n = 1; n < a.mh.size(); ++n) a.report.add(residual_check("M-H identity", static_cast<int>(n), -1, a.mh[n], tol.res));

  // <u, x^alpha> = <v, lambda x^alpha>
  const int top = max_moment < 0 ? 2 * q.max_degree() : max_moment - 1;
  const MomentFunctional lv = left_multiply(*a.lambda, v);
  Real worst = 0, scale = 0;
  for (const auto& alpha : flat_indices(u.dim(), top)) {
    const Real x = u.moment(alpha), y = lv.moment(alpha);
    worst = std::max(worst, std::abs(x - y));
    scale = std::max({scale, std::abs(x), std::abs(y)});
  }
  a.report.add(residual_check("u = lambda v", top, -1, worst / std::max<Real>(1, scale), tol.res));
  return a;
}

inline nlohmann::json to_json(const PairAnalysis& a) {
  nlohmann::json j{{"classification", to_string(a.ranks.cls)}, {"ranks", a.ranks.ranks},
                   {"fourier_tail", static_cast<double>(a.relation.tail)}};
  if (a.lambda) j["lambda"] = to_json(*a.lambda);
  if (!a.mh.empty()) j["mh_max"] = static_cast<double>(max_of(a.mh));
  return j;
}

// ---------------------------------------------------------------------------
// Generic family report, used by the registry and the CLI.

struct FamilyReport {
  std::string family;
  std::string params;
  Report checks;
  /// Orthogonality verdict where the family asks for one.
  std::optional<bool> orthogonal;
  /// The closed-form rule for that verdict.
  std::optional<bool> expected_orthogonal;
  nlohmann::json details = nlohmann::json::object();

  bool pass() const { return checks.pass() && (!orthogonal || *orthogonal); }
  /// Checks pass and any verdict agrees with its closed-form rule.
  bool as_expected() const {
    return checks.pass() && (!orthogonal || !expected_orthogonal || *orthogonal == *expected_orthogonal);
  }
};

inline nlohmann::json to_json(const FamilyReport& r) {
  nlohmann::json j{{"family", r.family}, {"params", r.params}, {"checks", to_json(r.checks)}, {"pass", r.pass()},
                   {"as_expected", r.as_expected()}, {"details", r.details}};
  if (r.orthogonal) j["orthogonal"] = *r.orthogonal;
  if (r.expected_orthogonal) j["expected_orthogonal"] = *r.expected_orthogonal;
  return j;
}

// ---------------------------------------------------------------------------
// Koornwinder–Chebyshev: P_n orthonormal for (u^2-4v)^{-1/2} w(x) w(y) in
// u = x + y, v = x y, and Q_n = P_n + M_{n,rho} P_{n-1}.

/// f(x)g(y) + g(x)f(y) as a polynomial in (u, v).
inline PolyVec symmetric_product(const std::vector<Real>& f, const std::vector<Real>& g) {
  const int m = static_cast<int>(std::max(f.size(), g.size())) - 1;
  auto at = [](const std::vector<Real>& c, int i) { return i < static_cast<int>(c.size()) ? c[static_cast<std::size_t>(i)] : Real(0); };
  const PolyVec u = PolyVec::linear({1, 0}, 0), v = PolyVec::linear({0, 1}, 0);
  // power sums x^k + y^k
  std::vector<PolyVec> s{PolyVec::constant(2, 2), u};
  for (int k = 2; k <= m; ++k) s.push_back(u.times(s[static_cast<std::size_t>(k) - 1]) - v.times(s[static_cast<std::size_t>(k) - 2]));
  PolyVec out = PolyVec::constant(2, 0);
  for (int i = 0; i <= m; ++i)
    for (int j = 0; j <= i; ++j) {
      Real c = at(f, i) * at(g, j) + at(f, j) * at(g, i);
      if (c == 0) continue;
      if (i == j) c /= 2;
      out = out + c * v.pow(j).times(s[static_cast<std::size_t>(i - j)]);
    }
  return out;
}

/// Orthonormal basis P^n_k, k = 0..n: (p_n(x)p_k(y) + p_k(x)p_n(y))/sqrt(2)
/// for k < n and p_n(x)p_n(y) for k = n.
inline PolySystem chebyshev_koornwinder_basis(int kind, int N) {
  const auto p = chebyshev_recurrence(kind, N + 1).orthonormal_polys(N);
  std::vector<PolyVec> polys;
  for (int n = 0; n <= N; ++n) {
    std::vector<PolyVec> rows;
    for (int k = 0; k <= n; ++k) {
      const PolyVec s = symmetric_product(p[static_cast<std::size_t>(n)], p[static_cast<std::size_t>(k)]);
      rows.push_back(((k < n ? 1 / std::sqrt(Real(2)) : Real(0.5L)) * s).padded(n));
    }
    polys.push_back(stack(rows));
  }
  return PolySystem(2, std::move(polys), false, "koornwinder-chebyshev(kind=" + std::to_string(kind) + ")");
}

/// rho [I_{n-1} 0; 0 sqrt2; 0 -rho], of size (n+1) x n.
inline Matrix chebyshev_relation_block(int n, Real rho) {
  Matrix m = Matrix::Zero(n + 1, n);
  for (int k = 0; k + 1 < n; ++k) m(k, k) = 1;
  m(n - 1, n - 1) = std::sqrt(Real(2));
  m(n, n - 1) = -rho;
  return rho * m;
}

/// Closed form of C~_{n,1}, n >= 2.
inline Matrix chebyshev_ctilde_closed(int n, Real rho, const Recurrence1D& r) {
  const Real lam = coeff::koornwinder_lambda(n, rho, r), a = r.a(n - 2);
  Matrix c = Matrix::Zero(n + 1, n);
  for (int k = 0; k + 1 < n; ++k) c(k, k) = lam;
  c(n - 1, n - 2) = rho * a;
  c(n - 1, n - 1) = std::sqrt(Real(2)) * lam;
  c(n, n - 2) = -std::sqrt(Real(2)) * rho * rho * a;
  c(n, n - 1) = -2 * rho * lam;
  return c;
}

/// Whether got = S expected T for sign diagonals S, T; returns the residual
/// after the best such alignment (infinity when the zero patterns differ).
inline Real sign_aligned_residual(const Matrix& got, const Matrix& expected, Real tol) {
  if (got.rows() != expected.rows() || got.cols() != expected.cols()) return INFINITY;
  const Real scale = std::max<Real>({1, max_abs(got), max_abs(expected)});
  const Eigen::Index R = got.rows(), C = got.cols();
  std::vector<int> rs(static_cast<std::size_t>(R), 0), cs(static_cast<std::size_t>(C), 0);
  // propagate signs over the bipartite graph of nonzero entries
  for (Eigen::Index start = 0; start < R; ++start) {
    if (rs[static_cast<std::size_t>(start)]) continue;
    rs[static_cast<std::size_t>(start)] = 1;
    std::vector<std::pair<bool, Eigen::Index>> stack{{true, start}};
    while (!stack.empty()) {
      auto [is_row, k] = stack.back();
      stack.pop_back();
      for (Eigen::Index o = 0; o < (is_row ? C : R); ++o) {
        const Eigen::Index r = is_row ? k : o, c = is_row ? o : k;
        if (std::abs(expected(r, c)) <= tol * scale || std::abs(got(r, c)) <= tol * scale) continue;
        const int s = got(r, c) * expected(r, c) > 0 ? 1 : -1;
        int& mine = is_row ? rs[static_cast<std::size_t>(k)] : cs[static_cast<std::size_t>(k)];
        int& other = is_row ? cs[static_cast<std::size_t>(o)] : rs[static_cast<std::size_t>(o)];
        if (!other) {
          other = s * mine;
          stack.emplace_back(!is_row, o);
        }
      }
    }
  }
  Real worst = 0;
  for (Eigen::Index r = 0; r < R; ++r)
    for (Eigen::Index c = 0; c < C; ++c) {
      const int sr = rs[static_cast<std::size_t>(r)] ? rs[static_cast<std::size_t>(r)] : 1;
      const int sc = cs[static_cast<std::size_t>(c)] ? cs[static_cast<std::size_t>(c)] : 1;
      worst = std::max(worst, std::abs(sr * sc * got(r, c) - expected(r, c)));
    }
  return worst / scale;
}

struct ChebyshevKoornwinder {
  int kind = 1;
  Real rho = 0;
  int N = 0;
  Recurrence1D rec;
  MomentFunctional u;
  PolySystem P;  // orthonormal, degrees 0..N+1
  ThreeTermData ttr;
  LinearRelation relation;  // M_{n,rho}, n = 1..N+1
  TheoremOutcome theorem4;
  std::vector<Real> scalar_condition;  // n = 2..N (index n)
  std::vector<Real> lambda_n;          // n = 2..N (index n)
  std::vector<Real> alignment;         // residual of C~_{n,1} against the closed form, index n
  bool aligned = true;
  bool direct_orthogonal = false;
  Real direct_offdiag = 0;
  std::vector<int> direct_ranks;
  std::optional<PairAnalysis> pair;
  Report report;  // construction checks and agreements

  bool verdict() const { return theorem4.verdict(); }
  /// kind 1: rho = 0; kind 2: all rho; kind 3: rho != 1; kind 4: rho != -1.
  static bool rule(int kind, Real rho) {
    switch (kind) {
      case 1: return rho == 0;
      case 2: return true;
      case 3: return rho != 1;
      default: return rho != -1;
    }
  }
  bool expected() const { return rule(kind, rho); }
};

inline ChebyshevKoornwinder chebyshev_koornwinder(int kind, Real rho, int N, const Tolerances& tol = {}) {
  if (kind < 1 || kind > 4) throw std::invalid_argument("chebyshev_koornwinder: kind must be 1..4");
  if (N < 2) throw std::invalid_argument("chebyshev_koornwinder: need N >= 2");
  ChebyshevKoornwinder b;
  b.kind = kind;
  b.rho = rho;
  b.N = N;
  b.rec = chebyshev_recurrence(kind, 2 * N + 4);
  b.u = koornwinder_chebyshev_functional(kind);
  b.P = chebyshev_koornwinder_basis(kind, N + 1);
  const GramBlocks h = gram_blocks(b.u, b.P);
  // The (u, v) monomial basis loses about 1.5 digits per degree, so the
  // sanity checks stop at degree N; degree N+1 only feeds the validator.
  Real id_err = 0;
  for (int n = 0; n <= N; ++n) id_err = std::max(id_err, max_abs(h[n] - Matrix::Identity(h[n].rows(), h[n].cols())));
  b.report.add(residual_check("orthonormality of P", -1, -1, std::max(id_err, orthogonality_defect(b.u, b.P.truncated(N))), tol.res));

  b.ttr = compute_ttr(b.P, b.u, h, tol.res);
  Real ca = 0;
  for (int n = 1; n < b.ttr.size(); ++n)
    for (int i = 0; i < 2; ++i)
      ca = std::max(ca, max_abs(b.ttr.C[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)] -
                                b.ttr.A[static_cast<std::size_t>(n) - 1][static_cast<std::size_t>(i)].transpose()));
  b.report.add(residual_check("C = A^t", -1, -1, ca / std::max<Real>(1, b.ttr.scale()), tol.res));

  std::vector<Matrix> blocks;
  for (int n = 1; n <= N + 1; ++n) blocks.push_back(chebyshev_relation_block(n, rho));
  b.relation = relation_from_blocks(2, blocks);
  b.theorem4 = theorem4_construct(b.ttr, b.relation, tol.rank, tol.res);

  b.scalar_condition.assign(static_cast<std::size_t>(N) + 1, 0);
  b.lambda_n.assign(static_cast<std::size_t>(N) + 1, 0);
  b.alignment.assign(static_cast<std::size_t>(N) + 1, 0);
  bool scalar_ok = true;
  for (int n = 2; n <= N; ++n) {
    const auto sn = static_cast<std::size_t>(n);
    b.scalar_condition[sn] = coeff::koornwinder_scalar_condition(n, rho, b.rec);
    b.lambda_n[sn] = coeff::koornwinder_lambda(n, rho, b.rec);
    scalar_ok = scalar_ok && std::abs(b.scalar_condition[sn]) <= tol.res;
    b.alignment[sn] = sign_aligned_residual(b.theorem4.partner.C[sn][0], chebyshev_ctilde_closed(n, rho, b.rec), tol.rank);
    b.aligned = b.aligned && b.alignment[sn] <= tol.res;
  }
  bool compat1 = true;
  for (const auto& r : b.theorem4.report.records)
    if (r.name == "compatibility" && r.direction == 1) compat1 = compat1 && r.pass;
  b.report.add(flag_check("scalar condition agrees with direction-1 compatibility", scalar_ok == compat1,
                          std::string("scalar ") + (scalar_ok ? "holds" : "fails") + ", compatibility " + (compat1 ? "holds" : "fails")));

  // Direct test: the functional dual to Q, then its Gram blocks.
  std::vector<PolyVec> qs;
  const PolySystem P2 = chebyshev_koornwinder_basis(kind, 2 * N + 2);
  for (int n = 0; n <= 2 * N + 2; ++n)
    qs.push_back(n == 0 ? P2[0] : P2[n] + chebyshev_relation_block(n, rho) * P2[n - 1]);
  const PolySystem Q2(2, qs, false, "Q");
  const MomentFunctional w = functional_from_basis(Q2);
  const PolySystem Q = Q2.truncated(N);
  Real off = 0, diag = 0;
  b.direct_orthogonal = true;
  for (int n = 0; n <= N; ++n) {
    const Matrix hn = inner_block(w, Q[n], Q[n]);
    diag = std::max(diag, max_abs(hn));
    for (int m = 0; m < n; ++m) off = std::max(off, max_abs(inner_block(w, Q[n], Q[m])));
    b.direct_ranks.push_back(numeric_rank(hn, tol.rank, std::max<Real>(1, max_abs(hn))));
    b.direct_orthogonal = b.direct_orthogonal && b.direct_ranks.back() == rank_count(2, n);
  }
  b.direct_offdiag = off / std::max<Real>(1, diag);
  b.direct_orthogonal = b.direct_orthogonal && b.direct_offdiag <= tol.res;
  b.report.add(flag_check("verdict agrees with direct Gram test", b.direct_orthogonal == b.verdict(),
                          std::string("direct ") + (b.direct_orthogonal ? "orthogonal" : "not orthogonal")));

  if (b.verdict() && b.direct_orthogonal) {
    const auto cls = classify_orthogonal_pair(b.relation, tol.rank);
    b.report.add(flag_check("rank class", cls.cls != RankClass::Mixed, to_string(cls.cls)));
    // lambda and the M-H identity go through the dual functional of Q, whose
    // moments lose accuracy at the top degrees; they stop at N-1.
    if (rho != 0) {
      b.pair = analyze_pair(Q.truncated(N - 1), w, b.P.truncated(N - 1), b.u, std::nullopt, tol, 2 * N + 2);
      b.report.append(b.pair->report);
    }
  }
  return b;
}

inline FamilyReport family_report(const ChebyshevKoornwinder& b) {
  FamilyReport r;
  r.family = "cheb-koornwinder";
  r.params = "kind=" + std::to_string(b.kind) + ",rho=" + format_real(b.rho) + ",N=" + std::to_string(b.N);
  r.checks = b.report;
  r.orthogonal = b.verdict();
  r.expected_orthogonal = b.expected();
  std::vector<double> sc, lam, al;
  for (int n = 2; n <= b.N; ++n) {
    sc.push_back(static_cast<double>(b.scalar_condition[static_cast<std::size_t>(n)]));
    lam.push_back(static_cast<double>(b.lambda_n[static_cast<std::size_t>(n)]));
    al.push_back(static_cast<double>(b.alignment[static_cast<std::size_t>(n)]));
  }
  r.details = {{"theorem4", to_json(b.theorem4.report)},
               {"scalar_condition_n2_to_N", sc},
               {"lambda_n_rho_n2_to_N", lam},
               {"ctilde_alignment", b.aligned ? "aligned" : "basis mismatch"},
               {"ctilde_alignment_residuals", al},
               {"direct_orthogonal", b.direct_orthogonal},
               {"direct_offdiag", static_cast<double>(b.direct_offdiag)},
               {"direct_ranks", b.direct_ranks}};
  if (b.pair) r.details["pair"] = to_json(*b.pair);
  return r;
}

// ---------------------------------------------------------------------------
// Theorem round trips for monic pairs with known three-term data.

struct TheoremRoundTrip {
  ThreeTermData ttr_q, ttr_p;  // from compute_ttr on the monic systems
  TheoremOutcome theorem3, theorem4;
  Real theorem3_vs_direct = 0, theorem4_vs_direct = 0;
  Report report;
};

/// Q, P monic through degree N+1; runs both constructions on degrees 0..N.
inline TheoremRoundTrip theorem_round_trip(const PolySystem& qm, const MomentFunctional& v, const PolySystem& pm,
                                           const MomentFunctional& u, const LinearRelation& rel, const Tolerances& tol) {
  TheoremRoundTrip t;
  t.ttr_q = compute_ttr(qm, v, gram_blocks(v, qm), tol.res);
  t.ttr_p = compute_ttr(pm, u, gram_blocks(u, pm), tol.res);
  t.theorem3 = theorem3_check(t.ttr_q, rel, tol.res);
  t.theorem4 = theorem4_construct(t.ttr_p, rel, tol.rank, tol.res);
  t.theorem3_vs_direct = detail::ttr_difference(t.theorem3.partner, t.ttr_p);
  t.theorem4_vs_direct = detail::ttr_difference(t.theorem4.partner, t.ttr_q);
  for (const auto& r : t.theorem3.report.records) {
    CheckRecord c = r;
    c.name = "Q known: " + r.name;
    t.report.add(c);
  }
  for (const auto& r : t.theorem4.report.records) {
    CheckRecord c = r;
    c.name = "P known: " + r.name;
    t.report.add(c);
  }
  t.report.add(residual_check("Q known: constructed P data vs direct", -1, -1, t.theorem3_vs_direct, tol.res));
  t.report.add(residual_check("P known: constructed Q data vs direct", -1, -1, t.theorem4_vs_direct, tol.res));
  return t;
}

// ---------------------------------------------------------------------------
// Disk: Q from W^{(mu)}, P from (1-x) W^{(mu)}, both built by the
// Koornwinder product with rho^2 = 1 - x^2.

struct DiskAdjacent {
  Real mu = 0;
  int N = 0;
  MomentFunctional v, u;
  PolySystem Q, P;                // native Koornwinder systems, degrees 0..N+1
  std::vector<Matrix> M_closed;   // index n, n = 1..N+1
  std::vector<Real> relation_residuals;
  PairAnalysis pair;
  TheoremRoundTrip theorems;
  Report report;
};

/// -1/(2n+2mu+2) diag(n, ..., 1) over a zero row.
inline Matrix disk_relation_block(int n, Real mu) {
  Matrix m = Matrix::Zero(n + 1, n);
  for (int k = 0; k < n; ++k) m(k, k) = -Real(n - k) / (2 * n + 2 * mu + 2);
  return m;
}

inline PolySystem disk_system(Real mu, Real shift, int N, std::string label) {
  const Recurrence1D r = jacobi_recurrence(mu, mu, N + 2);
  return koornwinder_system(
      [mu, shift](int k, int m) { return jacobi_recurrence(mu + k + 0.5L + shift, mu + k + 0.5L, m + 1); }, r,
      RhoSpec::sqrt_of({1, 0, -1}), N, std::move(label));
}

inline DiskAdjacent disk_adjacent(Real mu, int N, const Tolerances& tol = {}) {
  if (!(mu > -1)) throw std::invalid_argument("disk_adjacent: need mu > -1");
  if (N < 1) throw std::invalid_argument("disk_adjacent: need N >= 1");
  DiskAdjacent b;
  b.mu = mu;
  b.N = N;
  b.v = disk_functional(mu);
  b.u = left_multiply(LinearPoly{{-1, 0}, 1}, b.v);
  b.Q = disk_system(mu, 0, N + 1, "disk(mu=" + format_real(mu) + ")");
  b.P = disk_system(mu, 1, N + 1, "(1-x)disk(mu=" + format_real(mu) + ")");
  std::vector<Matrix> k_hat{Matrix::Identity(1, 1)}, m_hat{Matrix(1, 0)};
  b.M_closed.push_back(Matrix(1, 0));
  for (int n = 1; n <= N + 1; ++n) {
    b.M_closed.push_back(disk_relation_block(n, mu));
    k_hat.push_back(Matrix::Identity(n + 1, n + 1));
    m_hat.push_back(b.M_closed.back());
  }
  b.relation_residuals = detail::relation_residuals(b.Q, b.P, k_hat, m_hat, N + 1);
  for (int n = 1; n <= N + 1; ++n)
    b.report.add(residual_check("closed-form relation", n, -1, b.relation_residuals[static_cast<std::size_t>(n)], tol.res));

  b.pair = analyze_pair(b.Q, b.v, b.P, b.u, LinearPoly{{-1, 0}, 1}, tol);
  b.report.append(b.pair.report);
  Real mhat = 0;
  for (int n = 1; n <= N + 1; ++n)
    mhat = std::max(mhat, max_abs(b.pair.relation.M_hat[static_cast<std::size_t>(n)] - b.M_closed[static_cast<std::size_t>(n)]));
  b.report.add(residual_check("Fourier Mhat vs closed form", -1, -1, mhat, tol.res));
  b.report.add(residual_check("Fourier Khat vs identity", -1, -1, leading_mismatch(b.pair.relation, b.Q, b.P), tol.res));

  b.theorems = theorem_round_trip(to_monic(b.Q), b.v, to_monic(b.P), b.u, b.pair.relation, tol);
  b.report.append(b.theorems.report);
  return b;
}

inline FamilyReport family_report(const DiskAdjacent& b) {
  FamilyReport r;
  r.family = "disk";
  r.params = "mu=" + format_real(b.mu) + ",N=" + std::to_string(b.N);
  r.checks = b.report;
  r.details = {{"pair", to_json(b.pair)},
               {"relation_residual", static_cast<double>(max_of(b.relation_residuals))},
               {"theorem3_vs_direct", static_cast<double>(b.theorems.theorem3_vs_direct)},
               {"theorem4_vs_direct", static_cast<double>(b.theorems.theorem4_vs_direct)}};
  return r;
}

// ---------------------------------------------------------------------------
// Krall tensor products: v = v_x o w_y with v_x the Krall modification,
// u = u_x o w_y with u_x the classical weight, lambda = x or 1 - x.

enum class KrallKind { Laguerre, Jacobi };

struct KrallParams {
  KrallKind kind = KrallKind::Laguerre;
  Real alpha = 0.5L, beta = 0, a1 = 2;
  /// Second-variable functional: Laguerre(gamma) or Jacobi(gamma, delta),
  /// matching the kind.
  Real gamma = 0, delta = 0;

  std::string str() const {
    std::string s = kind == KrallKind::Laguerre ? "alpha=" + format_real(alpha)
                                                : "alpha=" + format_real(alpha) + ",beta=" + format_real(beta);
    s += ",a1=" + format_real(a1) + ",gamma=" + format_real(gamma);
    if (kind == KrallKind::Jacobi) s += ",delta=" + format_real(delta);
    return s;
  }
};

inline MomentFunctional krall_modified(const KrallParams& p) {
  return p.kind == KrallKind::Laguerre ? krall_laguerre_functional(p.alpha, p.a1)
                                       : krall_jacobi_functional(p.alpha, p.beta, p.a1);
}
inline MomentFunctional krall_classical(const KrallParams& p) {
  return p.kind == KrallKind::Laguerre ? laguerre_functional(p.alpha) : jacobi_functional(p.alpha, p.beta);
}
inline MomentFunctional krall_second(const KrallParams& p) {
  return p.kind == KrallKind::Laguerre ? laguerre_functional(p.gamma) : jacobi_functional(p.gamma, p.delta);
}
inline Real krall_a(const KrallParams& p, int n) {
  return p.kind == KrallKind::Laguerre ? coeff::krall_laguerre_a(n, p.alpha, p.a1)
                                       : coeff::krall_jacobi_a(n, p.alpha, p.beta, p.a1);
}
/// The quantity whose vanishing at n breaks quasi-definiteness (n >= 2).
inline Real krall_gate(const KrallParams& p, int n) {
  if (p.kind == KrallKind::Laguerre)
    return p.alpha == 0 ? coeff::krall_laguerre_alpha_tilde(n, p.a1) : coeff::krall_laguerre_alpha(n, p.alpha, p.a1);
  return p.alpha == 0 ? coeff::krall_jacobi_alpha_tilde(n, p.beta, p.a1) : coeff::krall_jacobi_alpha(n, p.alpha, p.beta, p.a1);
}

/// The a1 at which krall_gate(p, n) vanishes (the other parameters held).
/// Gate times its a1-dependent denominator is affine in a1, so the root is
/// closed form. Returns nullopt when the gate does not depend on a1.
inline std::optional<Real> krall_gate_root(const KrallParams& p, int n) {
  if (n < 2) throw std::invalid_argument("krall_gate_root: need n >= 2");
  const Real al = p.alpha, be = p.beta;
  Real c0 = 0, c1 = 0;  // c0 + c1 * a1 = 0
  if (p.kind == KrallKind::Laguerre) {
    if (al == 0) {
      c0 = 1 - coeff::harmonic(n - 1);
      c1 = coeff::harmonic(n - 1);
    } else {
      const Real g = std::tgamma(Real(n)) * std::tgamma(al + 1), h = std::tgamma(n + al);
      c0 = g * (al + 1) - h;
      c1 = h - g;
    }
  } else if (al == 0) {
    Real s = 0;
    for (int i = 1; i <= n - 1; ++i) s += Real(1) / i + 1 / (be + i);
    c0 = 2 * (be + 2) - 2 * (be + 1) * s;
    c1 = -(be + 1) * s * (be + 2);
  } else {
    const Real a = std::tgamma(al + 1) * std::tgamma(al + be + 2) * std::tgamma(Real(n)) * std::tgamma(n + be);
    const Real b = std::tgamma(be + 1) * std::tgamma(n + al) * std::tgamma(n + al + be);
    c0 = 2 * (al + 1) * a - 2 * (be + 1) * b;
    c1 = (al + be + 2) * (a - (al + be + 1) * b);
  }
  if (c1 == 0) return std::nullopt;
  return -c0 / c1;
}

/// Roots of krall_gate(p, n) in a1 over [lo, hi] by a sign scan and
/// bisection. Sign changes across a pole of the gate are discarded.
inline std::vector<Real> krall_gate_scan(KrallParams p, int n, Real lo, Real hi, int steps = 400) {
  auto gate = [&](Real a1) {
    p.a1 = a1;
    try {
      return krall_gate(p, n);
    } catch (const std::exception&) {
      return std::numeric_limits<Real>::quiet_NaN();
    }
  };
  std::vector<Real> roots;
  Real x0 = lo, g0 = gate(lo);
  for (int i = 1; i <= steps; ++i) {
    const Real x1 = lo + (hi - lo) * i / steps, g1 = gate(x1);
    if (std::isfinite(g0) && std::isfinite(g1) && (g0 < 0) != (g1 < 0)) {
      Real a = x0, b = x1, ga = g0;
      for (int it = 0; it < 200 && b - a > 0; ++it) {
        const Real m = (a + b) / 2, gm = gate(m);
        if (!std::isfinite(gm) || m == a || m == b) break;
        if ((gm < 0) == (ga < 0)) a = m, ga = gm;
        else b = m;
      }
      const Real r = (a + b) / 2, scale = std::max(std::abs(g0), std::abs(g1));
      if (std::abs(gate(r)) <= 1e-6L * scale) roots.push_back(r);
    }
    x0 = x1, g0 = g1;
  }
  return roots;
}

/// diag(a_n, ..., a_1) over a zero row.
inline Matrix tensor_relation_block(const std::vector<Real>& a, int n) {
  Matrix m = Matrix::Zero(n + 1, n);
  for (int k = 0; k < n; ++k) m(k, k) = a.at(static_cast<std::size_t>(n - k));
  return m;
}

struct KrallTensor {
  KrallParams params;
  int N = 0;
  MomentFunctional v, u;
  PolySystem Q, P;                 // monic, degrees 0..N+1
  std::vector<Real> a_closed;      // index n = 1..N+1
  std::vector<Real> a_numeric;     // one-variable Gram–Schmidt
  PairAnalysis pair;
  TheoremRoundTrip theorems;
  Report report;
};

inline KrallTensor krall_tensor(const KrallParams& params, int N, const Tolerances& tol = {}) {
  if (N < 1) throw std::invalid_argument("krall_tensor: need N >= 1");
  KrallTensor b;
  b.params = params;
  b.N = N;
  const MomentFunctional vx = krall_modified(params), ux = krall_classical(params), wy = krall_second(params);
  const LinearPoly lam1 = params.kind == KrallKind::Laguerre ? LinearPoly{{1}, 0} : LinearPoly{{-1}, 1};
  const LinearPoly lam2{{lam1.a[0], 0}, lam1.b};

  // one-variable pair
  const auto [q1, hq1] = gram_schmidt_monic(vx, N + 1, tol.rank);
  const auto [p1, hp1] = gram_schmidt_monic(ux, N + 1, tol.rank);
  b.a_closed.assign(static_cast<std::size_t>(N) + 2, 0);
  b.a_numeric.assign(static_cast<std::size_t>(N) + 2, 0);
  Real worst_a = 0, worst_rel = 0;
  for (int n = 1; n <= N + 1; ++n) {
    const auto sn = static_cast<std::size_t>(n);
    b.a_closed[sn] = krall_a(params, n);
    b.a_numeric[sn] = (q1[n] - p1[n]).coeffs()(0, n - 1);
    worst_a = std::max(worst_a, std::abs(b.a_closed[sn] - b.a_numeric[sn]) / std::max<Real>(1, std::abs(b.a_closed[sn])));
    worst_rel = std::max(worst_rel, detail::relative_mismatch(q1[n], p1[n] + b.a_closed[sn] * p1[n - 1]));
  }
  b.report.add(residual_check("a_n closed form vs Gram-Schmidt", -1, -1, worst_a, tol.res));
  b.report.add(residual_check("one-variable relation", -1, -1, worst_rel, tol.res));
  Real ident = 0;
  const MomentFunctional lv1 = left_multiply(lam1, vx);
  for (int m = 0; m <= 2 * N + 2; ++m)
    ident = std::max(ident, std::abs(lv1.moment({m}) - ux.moment({m})) / std::max<Real>(1, std::abs(ux.moment({m}))));
  b.report.add(residual_check("one-variable lambda v = u", -1, -1, ident, tol.res));

  b.v = tensor(vx, wy);
  b.u = tensor(ux, wy);
  b.Q = gram_schmidt_monic(b.v, N + 1, tol.rank).first;
  b.P = gram_schmidt_monic(b.u, N + 1, tol.rank).first;

  std::vector<Matrix> k_hat{Matrix::Identity(1, 1)}, m_hat{Matrix(1, 0)};
  for (int n = 1; n <= N + 1; ++n) {
    k_hat.push_back(Matrix::Identity(n + 1, n + 1));
    m_hat.push_back(tensor_relation_block(b.a_closed, n));
  }
  const auto res = detail::relation_residuals(b.Q, b.P, k_hat, m_hat, N + 1);
  for (int n = 1; n <= N + 1; ++n) b.report.add(residual_check("closed-form relation", n, -1, res[static_cast<std::size_t>(n)], tol.res));

  b.pair = analyze_pair(b.Q, b.v, b.P, b.u, lam2, tol);
  b.report.append(b.pair.report);
  b.theorems = theorem_round_trip(b.Q, b.v, b.P, b.u, b.pair.relation, tol);
  b.report.append(b.theorems.report);
  return b;
}

inline FamilyReport family_report(const KrallTensor& b) {
  FamilyReport r;
  r.family = b.params.kind == KrallKind::Laguerre ? "krall-laguerre" : "krall-jacobi";
  r.params = b.params.str() + ",N=" + std::to_string(b.N);
  r.checks = b.report;
  std::vector<double> a;
  for (int n = 1; n <= b.N + 1; ++n) a.push_back(static_cast<double>(b.a_closed[static_cast<std::size_t>(n)]));
  r.details = {{"pair", to_json(b.pair)}, {"a_n_from_1", a}};
  return r;
}

// ---------------------------------------------------------------------------
// Adjacent families: original = Khat shifted_n + Mhat shifted_{n-1}.

struct AdjacentFamily {
  std::string family;
  std::string params;
  int direction = 1;  // 1-based
  int N = 0;
  MomentFunctional v, u;  // original, shifted
  PolySystem original, shifted;
  std::vector<Matrix> K_hat, M_hat;  // closed forms, index n
  std::vector<Real> residuals;       // index n
  PairAnalysis pair;
  Report report;

  Real max_residual() const { return max_of(residuals); }
};

namespace detail {

inline void finish_adjacent(AdjacentFamily& b, const LinearPoly& lambda, const Tolerances& tol) {
  b.residuals = relation_residuals(b.original, b.shifted, b.K_hat, b.M_hat, b.N);
  for (int n = 1; n <= b.N; ++n)
    b.report.add(residual_check("closed-form relation", n, -1, b.residuals[static_cast<std::size_t>(n)], tol.res));
  b.pair = analyze_pair(b.original, b.v, b.shifted, b.u, lambda, tol);
  b.report.append(b.pair.report);
}

inline std::string join(const std::vector<Real>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + format_real(xs[i]);
  return s;
}

}  // namespace detail

/// Orthonormal simplex basis from the product formula
///   h_nu^{-1} prod_l (1 - |x_{<l}|)^{nu_l} p_{nu_l}^{(a_l,b_l)}(2 x_l / (1 - |x_{<l}|) - 1).
inline PolySystem simplex_basis(const std::vector<Real>& kappa, int N) {
  const int d = static_cast<int>(kappa.size()) - 1;
  std::vector<PolyVec> polys;
  for (int n = 0; n <= N; ++n) {
    std::vector<PolyVec> rows;
    for (const auto& nu : enumerate_indices(d, n)) {
      PolyVec p = PolyVec::constant(d, 1 / coeff::simplex_h(nu, kappa));
      std::vector<Real> prefix(static_cast<std::size_t>(d), 0);
      for (int l = 0; l < d; ++l) {
        const int m = nu[static_cast<std::size_t>(l)];
        const auto c = orthonormal_jacobi(m, coeff::simplex_a(l, nu, kappa), coeff::simplex_b(l, kappa));
        const PolyVec s = PolyVec::linear(prefix, 0);
        const PolyVec w = PolyVec::constant(d, 1) - s;  // 1 - |x_{<l}|
        std::vector<Real> two_x(static_cast<std::size_t>(d), 0);
        two_x[static_cast<std::size_t>(l)] = 2;
        const PolyVec t = PolyVec::linear(two_x, -1) + s;  // 2 x_l - (1 - |x_{<l}|)
        PolyVec f = PolyVec::constant(d, 0);
        for (int k = 0; k <= m; ++k) f = f + c[static_cast<std::size_t>(k)] * t.pow(k).times(w.pow(m - k));
        p = p.times(f);
        prefix[static_cast<std::size_t>(l)] = 1;
      }
      rows.push_back(p.padded(n).truncated(n));
    }
    polys.push_back(stack(rows));
  }
  return PolySystem(d, std::move(polys), false, "simplex(k=" + detail::join(kappa) + ")");
}

/// Simplex: kappa -> kappa + e_j (j 1-based, j <= d), with
///   Khat = diag(h^{kappa+e_j}_alpha / h^kappa_alpha c_{alpha_j}^{(a_j,b_j)}),
///   Mhat = L_{n-1,j}^t diag(h^{kappa+e_j}_{alpha-e_j} / h^kappa_alpha d_{alpha_j}^{(a_j,b_j)}).
inline AdjacentFamily simplex_adjacent(const std::vector<Real>& kappa, int j, int N, const Tolerances& tol = {}) {
  const int d = static_cast<int>(kappa.size()) - 1;
  if (d < 1) throw std::invalid_argument("simplex_adjacent: need d + 1 >= 2 parameters");
  for (Real k : kappa)
    if (!(k > -0.5L)) throw std::invalid_argument("simplex_adjacent: need kappa_i > -1/2");
  if (j < 1 || j > d) throw std::invalid_argument("simplex_adjacent: direction out of range");
  AdjacentFamily b;
  b.family = "simplex";
  b.direction = j;
  b.N = N;
  b.params = "k=" + detail::join(kappa) + ",j=" + std::to_string(j) + ",N=" + std::to_string(N);
  std::vector<Real> shifted = kappa;
  shifted[static_cast<std::size_t>(j) - 1] += 1;
  b.v = simplex_functional(kappa);
  b.u = simplex_functional(shifted);
  b.original = simplex_basis(kappa, N);
  b.shifted = simplex_basis(shifted, N);
  const int l = j - 1;
  for (int n = 0; n <= N; ++n) {
    const auto idx = enumerate_indices(d, n);
    Matrix k = Matrix::Zero(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const auto& al = idx[i];
      const Real a = coeff::simplex_a(l, al, kappa), bb = coeff::simplex_b(l, kappa);
      k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) =
          coeff::simplex_h(al, shifted) / coeff::simplex_h(al, kappa) * coeff::jacobi_c(al[static_cast<std::size_t>(l)], a, bb);
    }
    b.K_hat.push_back(k);
    if (n == 0) {
      b.M_hat.push_back(Matrix(1, 0));
      continue;
    }
    const auto lower = enumerate_indices(d, n - 1);
    Matrix dg = Matrix::Zero(static_cast<Eigen::Index>(lower.size()), static_cast<Eigen::Index>(lower.size()));
    for (std::size_t i = 0; i < lower.size(); ++i) {
      const MultiIndex al = add(lower[i], unit_index(d, l));
      const Real a = coeff::simplex_a(l, al, kappa), bb = coeff::simplex_b(l, kappa);
      dg(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) =
          coeff::simplex_h(lower[i], shifted) / coeff::simplex_h(al, kappa) * coeff::jacobi_d(al[static_cast<std::size_t>(l)], a, bb);
    }
    b.M_hat.push_back(shift_matrix(d, n - 1, l).transpose() * dg);
  }
  detail::finish_adjacent(b, LinearPoly{detail::unit_vec(d, l), 0}, tol);
  return b;
}

/// Multiple Jacobi on the cube: a -> a + e_j (shift_b false) with
/// Khat = diag(f), Mhat = -L^t diag(g^{(a_j,b_j)}), or b -> b + e_j with
/// Mhat = +L^t diag(g^{(b_j,a_j)}).
inline AdjacentFamily cube_adjacent(const std::vector<Real>& a, const std::vector<Real>& bpar, int j, bool shift_b, int N,
                                    const Tolerances& tol = {}) {
  const int d = static_cast<int>(a.size());
  if (d < 1 || bpar.size() != a.size()) throw std::invalid_argument("cube_adjacent: need d values each of a and b");
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(a[i] > -1 && bpar[i] > -1)) throw std::invalid_argument("cube_adjacent: need a_i, b_i > -1");
  if (j < 1 || j > d) throw std::invalid_argument("cube_adjacent: direction out of range");
  AdjacentFamily b;
  b.family = "cube";
  b.direction = j;
  b.N = N;
  b.params = "a=" + detail::join(a) + ",b=" + detail::join(bpar) + ",j=" + std::to_string(j) + ",shift=" + (shift_b ? "b" : "a") +
             ",N=" + std::to_string(N);
  const int l = j - 1;
  std::vector<Real> a2 = a, b2 = bpar;
  (shift_b ? b2 : a2)[static_cast<std::size_t>(l)] += 1;
  b.v = cube_functional(a, bpar);
  b.u = cube_functional(a2, b2);
  auto sys = [&](const std::vector<Real>& aa, const std::vector<Real>& bb) {
    return detail::product_system(
        d, N, [&](int i, int m) { return classical_jacobi(m, aa[static_cast<std::size_t>(i)], bb[static_cast<std::size_t>(i)]); },
        "cube(a=" + detail::join(aa) + ",b=" + detail::join(bb) + ")");
  };
  b.original = sys(a, bpar);
  b.shifted = sys(a2, b2);
  const Real aj = a[static_cast<std::size_t>(l)], bj = bpar[static_cast<std::size_t>(l)];
  for (int n = 0; n <= N; ++n) {
    const auto idx = enumerate_indices(d, n);
    Matrix k = Matrix::Zero(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i)
      k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = coeff::jacobi_f(idx[i][static_cast<std::size_t>(l)], aj, bj);
    b.K_hat.push_back(k);
    if (n == 0) {
      b.M_hat.push_back(Matrix(1, 0));
      continue;
    }
    const auto lower = enumerate_indices(d, n - 1);
    Matrix g = Matrix::Zero(static_cast<Eigen::Index>(lower.size()), static_cast<Eigen::Index>(lower.size()));
    for (std::size_t i = 0; i < lower.size(); ++i) {
      const int m = lower[i][static_cast<std::size_t>(l)] + 1;
      g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = shift_b ? coeff::jacobi_g(m, bj, aj) : coeff::jacobi_g(m, aj, bj);
    }
    const Matrix lt = shift_matrix(d, n - 1, l).transpose();
    b.M_hat.push_back(shift_b ? Matrix(lt * g) : Matrix(-(lt * g)));
  }
  std::vector<Real> lin = detail::unit_vec(d, l);
  if (!shift_b) lin[static_cast<std::size_t>(l)] = -1;
  detail::finish_adjacent(b, LinearPoly{lin, 1}, tol);
  return b;
}

/// Multiple Laguerre: kappa -> kappa + e_j with Khat = I, Mhat = -L_{n-1,j}^t.
inline AdjacentFamily laguerre_adjacent(const std::vector<Real>& kappa, int j, int N, const Tolerances& tol = {}) {
  const int d = static_cast<int>(kappa.size());
  if (d < 1) throw std::invalid_argument("laguerre_adjacent: need at least one parameter");
  for (Real k : kappa)
    if (!(k > -1)) throw std::invalid_argument("laguerre_adjacent: need kappa_i > -1");
  if (j < 1 || j > d) throw std::invalid_argument("laguerre_adjacent: direction out of range");
  AdjacentFamily b;
  b.family = "multi-laguerre";
  b.direction = j;
  b.N = N;
  b.params = "k=" + detail::join(kappa) + ",j=" + std::to_string(j) + ",N=" + std::to_string(N);
  const int l = j - 1;
  std::vector<Real> shifted = kappa;
  shifted[static_cast<std::size_t>(l)] += 1;
  b.v = multi_laguerre_functional(kappa);
  b.u = multi_laguerre_functional(shifted);
  auto sys = [&](const std::vector<Real>& k) {
    return detail::product_system(
        d, N, [&](int i, int m) { return classical_laguerre(m, k[static_cast<std::size_t>(i)]); },
        "multi-laguerre(k=" + detail::join(k) + ")");
  };
  b.original = sys(kappa);
  b.shifted = sys(shifted);
  for (int n = 0; n <= N; ++n) {
    b.K_hat.push_back(Matrix::Identity(rank_count(d, n), rank_count(d, n)));
    b.M_hat.push_back(n == 0 ? Matrix(1, 0) : Matrix(-shift_matrix(d, n - 1, l).transpose()));
  }
  detail::finish_adjacent(b, LinearPoly{detail::unit_vec(d, l), 0}, tol);
  return b;
}

inline FamilyReport family_report(const AdjacentFamily& b) {
  FamilyReport r;
  r.family = b.family;
  r.params = b.params;
  r.checks = b.report;
  r.details = {{"pair", to_json(b.pair)}, {"relation_residual", static_cast<double>(b.max_residual())}};
  return r;
}

// ---------------------------------------------------------------------------
// Registry.

struct FamilyEntry {
  std::string name;
  std::string summary;
  std::function<FamilyReport(const FamilySpec&, int N, const Tolerances&)> run;
};

namespace detail {

inline std::vector<Real> list_or(const FamilySpec& s, const std::string& key, std::vector<Real> fallback) {
  return s.has(key) ? s.list(key) : fallback;
}

inline KrallParams krall_params(const FamilySpec& s, KrallKind kind) {
  KrallParams p;
  p.kind = kind;
  p.alpha = s.scalar("alpha", 0.5L);
  p.beta = s.scalar("beta", 0);
  p.a1 = s.scalar("a1", kind == KrallKind::Laguerre ? 2 : 1);
  p.gamma = s.scalar("gamma", 0);
  p.delta = s.scalar("delta", 0);
  return p;
}

}  // namespace detail

inline const std::vector<FamilyEntry>& family_registry() {
  static const std::vector<FamilyEntry> entries{
      {"disk", "disk polynomials for W^(mu) and (1-x)W^(mu); params mu",
       [](const FamilySpec& s, int N, const Tolerances& t) { return family_report(disk_adjacent(s.scalar("mu", 0), N, t)); }},
      {"cheb-koornwinder", "Koornwinder-Chebyshev quasi-orthogonal combination; params kind, rho",
       [](const FamilySpec& s, int N, const Tolerances& t) {
         return family_report(chebyshev_koornwinder(s.integer("kind", 2), s.scalar("rho", 0.5L), N, t));
       }},
      {"krall-laguerre", "Krall-Laguerre x Laguerre tensor; params alpha, a1, gamma",
       [](const FamilySpec& s, int N, const Tolerances& t) {
         return family_report(krall_tensor(detail::krall_params(s, KrallKind::Laguerre), N, t));
       }},
      {"krall-jacobi", "Krall-Jacobi x Jacobi tensor; params alpha, beta, a1, gamma, delta",
       [](const FamilySpec& s, int N, const Tolerances& t) {
         return family_report(krall_tensor(detail::krall_params(s, KrallKind::Jacobi), N, t));
       }},
      {"simplex", "adjacent simplex families kappa -> kappa + e_j; params k (d+1 values), j",
       [](const FamilySpec& s, int N, const Tolerances& t) {
         return family_report(simplex_adjacent(detail::list_or(s, "k", {0.5L, 0.5L, 0.5L}), s.integer("j", 1), N, t));
       }},
      {"cube", "adjacent multiple Jacobi families; params a, b (d values each), j, shift (0: a, 1: b)",
       [](const FamilySpec& s, int N, const Tolerances& t) {
         return family_report(cube_adjacent(detail::list_or(s, "a", {0, 0}), detail::list_or(s, "b", {0, 0}), s.integer("j", 1),
                                            s.integer("shift", 0) != 0, N, t));
       }},
      {"multi-laguerre", "adjacent multiple Laguerre families; params k (d values), j",
       [](const FamilySpec& s, int N, const Tolerances& t) {
         return family_report(laguerre_adjacent(detail::list_or(s, "k", {0, 1}), s.integer("j", 1), N, t));
       }},
  };
  return entries;
}

inline const FamilyEntry& find_family(const std::string& name) {
  const std::string key = name == "koornwinder-chebyshev" ? "cheb-koornwinder" : name;
  for (const auto& e : family_registry())
    if (e.name == key) return e;
  throw ParseError("unknown family '" + name + "'");
}

inline FamilyReport run_family(const FamilySpec& spec, int N, const Tolerances& tol = {}) {
  return find_family(spec.name).run(spec, N, tol);
}

}  // namespace mvops

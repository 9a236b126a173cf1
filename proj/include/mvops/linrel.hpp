// Linear relations Q_n = P_n + M_n P_{n-1} between polynomial systems: the
// relation blocks and their rank classes, the degree-one polynomial lambda
// with u = lambda v, the identity M_n H_{n-1} = H~_n sum_i a_i L_{n-1,i}^t,
// and the two constructions that transport a three-term relation across the
// linear relation (Q known -> P, P known -> Q).
#pragma once

#include "mvops/construct.hpp"
#include "mvops/indexing.hpp"
#include "mvops/matrixkit.hpp"
#include "mvops/moments.hpp"
#include "mvops/report.hpp"
#include "mvops/ttr.hpp"

#include <json.hpp>

#include <cmath>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvops {

enum class RankClass { Zero, Full, Mixed };

inline std::string to_string(RankClass c) {
  switch (c) {
    case RankClass::Zero: return "zero";
    case RankClass::Full: return "full";
    default: return "mixed";
  }
}

/// The "mixed" rank pattern was observed on a pair declared orthogonal.
class MixedRankDiagnostic : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Relation blocks for n = 0..N. M[0] is the empty 1 x 0 block.
struct LinearRelation {
  int d = 1;
  /// Monic coordinates: Qbar_n = Pbar_n + M_n Pbar_{n-1}.
  std::vector<Matrix> M;
  /// Native coordinates: Q_n = Khat_n P_n + Mhat_n P_{n-1}.
  std::vector<Matrix> K_hat, M_hat;
  /// Largest relative Fourier coefficient of Q_n on P_j, j <= n-2.
  Real tail = 0;
  std::vector<Real> tail_by_degree;

  int max_degree() const { return static_cast<int>(M.size()) - 1; }
  const Matrix& operator[](int n) const { return M.at(static_cast<std::size_t>(n)); }
  Real scale() const {
    Real s = 0;
    for (const auto& m : M) s = std::max(s, max_abs(m));
    return s;
  }
};

/// Builds a relation directly from monic blocks M_1..M_N (M_0 is implied).
inline LinearRelation relation_from_blocks(int d, const std::vector<Matrix>& m_from_1) {
  LinearRelation r;
  r.d = d;
  r.M.push_back(Matrix(1, 0));
  for (std::size_t k = 0; k < m_from_1.size(); ++k) {
    const int n = static_cast<int>(k) + 1;
    if (m_from_1[k].rows() != rank_count(d, n) || m_from_1[k].cols() != rank_count(d, n - 1))
      throw ShapeError("relation block M_" + std::to_string(n) + " has wrong shape");
    r.M.push_back(m_from_1[k]);
  }
  r.K_hat.clear();
  for (int n = 0; n <= r.max_degree(); ++n) r.K_hat.push_back(Matrix::Identity(rank_count(d, n), rank_count(d, n)));
  r.M_hat = r.M;
  return r;
}

/// Native blocks from monic ones: Khat = F E^{-1}, Mhat_n = F_n M_n E_{n-1}^{-1}
/// with E_n, F_n the leading coefficients of P_n and Q_n.
inline void attach_native_blocks(LinearRelation& r, const std::vector<Matrix>& e, const std::vector<Matrix>& f) {
  r.K_hat.clear();
  r.M_hat.clear();
  for (int n = 0; n <= r.max_degree(); ++n) {
    const auto sn = static_cast<std::size_t>(n);
    r.K_hat.push_back(solve_right(f[sn], e[sn]));
    r.M_hat.push_back(n == 0 ? Matrix(1, 0) : Matrix(solve_right(f[sn] * r.M[sn], e[sn - 1])));
  }
}

/// Relation between Q and an orthogonal system P (functional u, Gram blocks
/// H of P), from the Fourier coefficients M_{n,j} = <u, Q_n P_j^t> H_j^{-1}.
/// Works in native coordinates for any pair of systems with invertible
/// leading coefficients; M is reported in monic coordinates.
inline LinearRelation compute_relation(const PolySystem& q, const PolySystem& p, const MomentFunctional& u,
                                       const GramBlocks& h) {
  if (q.dim() != p.dim()) throw ShapeError("compute_relation: dimension mismatch");
  const int N = std::min(q.max_degree(), p.max_degree());
  LinearRelation r;
  r.d = p.dim();
  std::vector<std::vector<Matrix>> coef(static_cast<std::size_t>(N) + 1);
  Real mscale = 0;
  for (int n = 0; n <= N; ++n) {
    for (int j = 0; j <= n; ++j) coef[static_cast<std::size_t>(n)].push_back(solve_right(inner_block(u, q[n], p[j]), h[j]));
    r.K_hat.push_back(coef[static_cast<std::size_t>(n)][static_cast<std::size_t>(n)]);
    r.M_hat.push_back(n ? coef[static_cast<std::size_t>(n)][static_cast<std::size_t>(n) - 1] : Matrix(1, 0));
    mscale = std::max(mscale, max_abs(r.M_hat.back()));
  }
  const Real denom = std::max<Real>(1, mscale);
  for (int n = 0; n <= N; ++n) {
    Real t = 0;
    for (int j = 0; j + 2 <= n; ++j) t = std::max(t, max_abs(coef[static_cast<std::size_t>(n)][static_cast<std::size_t>(j)]));
    r.tail_by_degree.push_back(t / denom);
    r.tail = std::max(r.tail, t / denom);
  }
  // Monic coordinates: Qbar_n = F_n^{-1} Q_n, Pbar_n = E_n^{-1} P_n.
  r.M.push_back(Matrix(1, 0));
  for (int n = 1; n <= N; ++n)
    r.M.push_back(solve(q.leading(n), r.M_hat[static_cast<std::size_t>(n)] * p.leading(n - 1)));
  return r;
}

/// Largest deviation of F_n^{-1} Khat_n E_n from the identity: zero when
/// both systems share leading coefficients up to the monic normalization.
inline Real leading_mismatch(const LinearRelation& r, const PolySystem& q, const PolySystem& p) {
  Real worst = 0;
  for (int n = 0; n <= r.max_degree(); ++n) {
    const Matrix k = solve(q.leading(n), r.K_hat[static_cast<std::size_t>(n)] * p.leading(n));
    worst = std::max(worst, max_abs(k - Matrix::Identity(k.rows(), k.cols())));
  }
  return worst;
}

struct RankClassification {
  RankClass cls = RankClass::Zero;
  std::vector<int> ranks;  // ranks[n] for n >= 1; ranks[0] = 0
};

/// "zero" if every M_n vanishes, "full" if rank M_n = r_{n-1} for all
/// n >= 1, otherwise "mixed". Ranks are relative to max(1, max_n |M_n|).
inline RankClassification classify_ranks(const LinearRelation& r, Real tol = kRankTol) {
  RankClassification out;
  const Real ref = std::max<Real>(1, r.scale());
  bool all_zero = true, all_full = true;
  out.ranks.push_back(0);
  for (int n = 1; n <= r.max_degree(); ++n) {
    const int k = numeric_rank(r[n], tol, ref);
    out.ranks.push_back(k);
    all_zero = all_zero && k == 0;
    all_full = all_full && k == rank_count(r.d, n - 1);
  }
  out.cls = all_zero ? RankClass::Zero : all_full ? RankClass::Full : RankClass::Mixed;
  return out;
}

/// Same as classify_ranks, for a pair asserted to be orthogonal: a mixed
/// pattern is impossible there and raises.
inline RankClassification classify_orthogonal_pair(const LinearRelation& r, Real tol = kRankTol) {
  auto c = classify_ranks(r, tol);
  if (c.cls == RankClass::Mixed) {
    std::string ranks;
    for (std::size_t n = 1; n < c.ranks.size(); ++n) ranks += (n > 1 ? "," : "") + std::to_string(c.ranks[n]);
    throw MixedRankDiagnostic("mixed rank pattern (" + ranks + ") on a pair declared orthogonal");
  }
  return c;
}

/// lambda from M_1 H_0 = H~_1 a, with the constant fixed by
/// <u, 1> = sum_i a_i <v, x_i> + b <v, 1>. H and Ht are monic-coordinate
/// Gram blocks (P under u, Q under v).
inline LinearPoly recover_lambda(const LinearRelation& r, const GramBlocks& h, const GramBlocks& ht,
                                 const MomentFunctional& v, Real tol = kRankTol) {
  if (r.max_degree() < 1) throw std::invalid_argument("recover_lambda: relation needs degree >= 1");
  const Matrix a = solve(ht[1], r[1] * h[0]);
  LinearPoly lam;
  Real s = 0, sa = 0;
  for (int i = 0; i < r.d; ++i) {
    lam.a.push_back(a(i, 0));
    s += v.moment(unit_index(r.d, i)) * a(i, 0);
    sa += std::abs(a(i, 0));
  }
  const MultiIndex zero(static_cast<std::size_t>(r.d), 0);
  lam.b = (h[0](0, 0) - s) / v.moment(zero);
  if (!(sa > tol * std::max<Real>(1, std::abs(lam.b))))
    throw std::runtime_error("recover_lambda: degenerate linear part (relation classified full?)");
  return lam;
}

/// Distance between the unit directions of (a, b) and an expected (a, b),
/// minimized over the overall sign.
inline Real direction_error(const LinearPoly& got, const LinearPoly& expected) {
  Vector x(got.dim() + 1), y(expected.dim() + 1);
  for (int i = 0; i < got.dim(); ++i) x(i) = got.a[static_cast<std::size_t>(i)];
  for (int i = 0; i < expected.dim(); ++i) y(i) = expected.a[static_cast<std::size_t>(i)];
  x(got.dim()) = got.b;
  y(expected.dim()) = expected.b;
  x.normalize();
  y.normalize();
  return std::min((x - y).cwiseAbs().maxCoeff(), (x + y).cwiseAbs().maxCoeff());
}

/// Per-degree relative residual of M_n H_{n-1} = H~_n sum_i a_i L_{n-1,i}^t
/// (monic coordinates), n = 1..N; entry 0 is zero.
inline std::vector<Real> verify_mh(const LinearRelation& r, const GramBlocks& h, const GramBlocks& ht,
                                   const LinearPoly& lambda) {
  std::vector<Real> out{0};
  const int N = std::min({r.max_degree(), h.max_degree() + 1, ht.max_degree()});
  for (int n = 1; n <= N; ++n) {
    Matrix s = Matrix::Zero(rank_count(r.d, n), rank_count(r.d, n - 1));
    for (int i = 0; i < r.d; ++i) s += lambda.a[static_cast<std::size_t>(i)] * shift_matrix(r.d, n - 1, i).transpose();
    const Matrix lhs = r[n] * h[n - 1], rhs = ht[n] * s;
    const Real scale = std::max({max_abs(lhs), max_abs(rhs), Real(1e-300L)});
    out.push_back(max_abs(lhs - rhs) / scale);
  }
  return out;
}

inline Real max_of(const std::vector<Real>& v) {
  Real m = 0;
  for (Real x : v) m = std::max(m, x);
  return m;
}

struct TheoremOutcome {
  ThreeTermData partner;  // the constructed three-term data of the other system
  Report report;
  bool verdict() const { return report.pass(); }
};

namespace detail {
inline Real compat_scale(const LinearRelation& r, const ThreeTermData& t) {
  return std::max<Real>(1, std::max<Real>(1, r.scale()) * std::max<Real>(1, t.scale()));
}
}  // namespace detail

/// Q (three-term data t_q) orthogonal, Q_n = P_n + M_n P_{n-1}: builds
///   A = A~,  B_n = B~_n - M_n A_{n-1} + A~_n M_{n+1},  C_n = C~_n - M_n B_{n-1} + B~_n M_n
/// and reports M_n C_{n-1,i} - C~_{n,i} M_{n-1} (n >= 2); P is orthogonal
/// exactly when all of these vanish. Degrees without M_{n+1} are dropped.
inline TheoremOutcome theorem3_check(const ThreeTermData& t_q, const LinearRelation& r, Real tol_res = kResidualTol) {
  t_q.check_shapes();
  const int d = t_q.d;
  const int K = std::min(t_q.size(), r.max_degree());
  TheoremOutcome out;
  auto& p = out.partner;
  p.d = d;
  const Real scale = detail::compat_scale(r, t_q);
  for (int n = 0; n < K; ++n) {
    const auto sn = static_cast<std::size_t>(n);
    std::vector<Matrix> as, bs, cs;
    for (int i = 0; i < d; ++i) {
      const auto si = static_cast<std::size_t>(i);
      const Matrix& at = t_q.A[sn][si];
      Matrix b = t_q.B[sn][si] + at * r.M[sn + 1];
      if (n > 0) b -= r.M[sn] * t_q.A[sn - 1][si];
      Matrix c = t_q.C[sn][si];
      if (n > 0) c += t_q.B[sn][si] * r.M[sn] - r.M[sn] * p.B[sn - 1][si];
      as.push_back(at);
      bs.push_back(std::move(b));
      cs.push_back(std::move(c));
    }
    p.A.push_back(std::move(as));
    p.B.push_back(std::move(bs));
    p.C.push_back(std::move(cs));
    for (int i = 0; n >= 2 && i < d; ++i) {
      const auto si = static_cast<std::size_t>(i);
      const Real res = max_abs(r.M[sn] * p.C[sn - 1][si] - t_q.C[sn][si] * r.M[sn - 1]) / scale;
      out.report.add(residual_check("compatibility", n, i + 1, res, tol_res));
    }
  }
  return out;
}

/// P (three-term data t_p) orthogonal, Q_n = P_n + M_n P_{n-1}: builds
///   A~ = A,  B~_n = B_n + M_n A_{n-1} - A_n M_{n+1},  C~_n = C_n + M_n B_{n-1} - B~_n M_n
/// and reports the compatibility residuals, rank C~_{n,i} = r_{n-1} and
/// rank of the joint C~_n^t = r_n. Q is orthogonal exactly when all pass.
/// A is taken as given, so orthonormal P (C_n = A_{n-1}^t) is covered as well.
inline TheoremOutcome theorem4_construct(const ThreeTermData& t_p, const LinearRelation& r, Real tol_rank = kRankTol,
                                         Real tol_res = kResidualTol) {
  t_p.check_shapes();
  const int d = t_p.d;
  const int K = std::min(t_p.size(), r.max_degree());
  TheoremOutcome out;
  auto& q = out.partner;
  q.d = d;
  const Real scale = detail::compat_scale(r, t_p);
  for (int n = 0; n < K; ++n) {
    const auto sn = static_cast<std::size_t>(n);
    std::vector<Matrix> as, bs, cs;
    for (int i = 0; i < d; ++i) {
      const auto si = static_cast<std::size_t>(i);
      const Matrix& a = t_p.A[sn][si];
      Matrix b = t_p.B[sn][si] - a * r.M[sn + 1];
      if (n > 0) b += r.M[sn] * t_p.A[sn - 1][si];
      Matrix c = t_p.C[sn][si];
      if (n > 0) c += r.M[sn] * t_p.B[sn - 1][si] - b * r.M[sn];
      as.push_back(a);
      bs.push_back(std::move(b));
      cs.push_back(std::move(c));
    }
    q.A.push_back(std::move(as));
    q.B.push_back(std::move(bs));
    q.C.push_back(std::move(cs));
  }
  const Real ref = q.scale();
  for (int n = 1; n < K; ++n) {
    const auto sn = static_cast<std::size_t>(n);
    for (int i = 0; i < d; ++i) {
      const auto si = static_cast<std::size_t>(i);
      if (n >= 2) {
        const Real res = max_abs(r.M[sn] * t_p.C[sn - 1][si] - q.C[sn][si] * r.M[sn - 1]) / scale;
        out.report.add(residual_check("compatibility", n, i + 1, res, tol_res));
      }
      out.report.add(rank_check("rank C~", n, i + 1, numeric_rank(q.C[sn][si], tol_rank, ref), rank_count(d, n - 1)));
    }
    out.report.add(rank_check("rank joint C~^t", n, -1, numeric_rank(q.joint_Ct(n), tol_rank, ref), rank_count(d, n)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// The two-variable example with A = L, C_{n,i} = -L_{n-1,i}^t,
// B_{n,i} = L_{n,i} C_{n+1,i} - C_{n,i} L_{n-1,i} and M_n = C_{n,1}: the
// compatibility condition holds but C~_{n,1} = C_{n,1}(I + B_{n-1,1}) has
// rank n - 1.

struct Counterexample {
  ThreeTermData p_side;  // degrees 0..n_max+1
  ThreeTermData q_side;  // degrees 0..n_max
  LinearRelation relation;
  TheoremOutcome outcome;
  /// Largest deviation from the closed forms B~_{n,1} = 0, B~_{n,2} = B_{n,2},
  /// C~_{n,1} = C_{n,1}(I + B_{n-1,1}), C~_{n,2} = C_{n,2}.
  Real closed_form_residual = 0;
};

inline ThreeTermData counterexample_ttr(int degrees) {
  const int d = 2;
  ThreeTermData t;
  t.d = d;
  auto c_block = [&](int n, int i) {
    return n == 0 ? Matrix(1, 0) : Matrix(-shift_matrix(d, n - 1, i).transpose());
  };
  for (int n = 0; n < degrees; ++n) {
    std::vector<Matrix> as, bs, cs;
    for (int i = 0; i < d; ++i) {
      const Matrix l = shift_matrix(d, n, i);
      Matrix b = l * c_block(n + 1, i);
      if (n > 0) b -= c_block(n, i) * shift_matrix(d, n - 1, i);
      as.push_back(l);
      bs.push_back(std::move(b));
      cs.push_back(c_block(n, i));
    }
    t.A.push_back(std::move(as));
    t.B.push_back(std::move(bs));
    t.C.push_back(std::move(cs));
  }
  return t;
}

inline Counterexample counterexample(int n_max, Real tol_rank = kRankTol, Real tol_res = kResidualTol) {
  if (n_max < 2) throw std::invalid_argument("counterexample: need n_max >= 2");
  Counterexample cx;
  cx.p_side = counterexample_ttr(n_max + 2);
  std::vector<Matrix> m;
  for (int n = 1; n <= n_max + 1; ++n) m.push_back(cx.p_side.C[static_cast<std::size_t>(n)][0]);
  cx.relation = relation_from_blocks(2, m);
  cx.outcome = theorem4_construct(cx.p_side, cx.relation, tol_rank, tol_res);
  cx.q_side = cx.outcome.partner;
  Real worst = 0;
  const auto& p = cx.p_side;
  const auto& q = cx.q_side;
  for (int n = 0; n < q.size(); ++n) {
    const auto sn = static_cast<std::size_t>(n);
    worst = std::max(worst, max_abs(q.B[sn][0]));
    worst = std::max(worst, max_abs(q.B[sn][1] - p.B[sn][1]));
    if (n > 0) {
      const Matrix id = Matrix::Identity(p.B[sn - 1][0].rows(), p.B[sn - 1][0].cols());
      worst = std::max(worst, max_abs(q.C[sn][0] - p.C[sn][0] * (id + p.B[sn - 1][0])));
      worst = std::max(worst, max_abs(q.C[sn][1] - p.C[sn][1]));
    }
  }
  cx.closed_form_residual = worst;
  return cx;
}

// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const LinearRelation& r) {
  nlohmann::json m = nlohmann::json::array(), mh = nlohmann::json::array(), kh = nlohmann::json::array();
  for (int n = 0; n <= r.max_degree(); ++n) {
    m.push_back(to_text(r.M[static_cast<std::size_t>(n)]));
    if (static_cast<std::size_t>(n) < r.M_hat.size()) mh.push_back(to_text(r.M_hat[static_cast<std::size_t>(n)]));
    if (static_cast<std::size_t>(n) < r.K_hat.size()) kh.push_back(to_text(r.K_hat[static_cast<std::size_t>(n)]));
  }
  const auto cls = classify_ranks(r);
  return {{"type", "LinearRelation"}, {"d", r.d}, {"N", r.max_degree()}, {"M", m}, {"M_hat", mh}, {"K_hat", kh},
          {"fourier_tail", static_cast<double>(r.tail)}, {"classification", to_string(cls.cls)}, {"ranks", cls.ranks}};
}

/// Reads M_1..M_K from the "M" array of a LinearRelation envelope; the
/// leading empty M_0 entry is optional.
inline LinearRelation relation_from_json(const nlohmann::json& j) {
  try {
    if (j.at("type").get<std::string>() != "LinearRelation") throw ParseError("not a LinearRelation envelope");
    const int d = j.at("d").get<int>();
    if (d < 1) throw ParseError("LinearRelation envelope: bad d");
    std::vector<Matrix> m;
    for (const auto& t : j.at("M")) m.push_back(from_text(t.get<std::string>()));
    if (!m.empty() && m.front().cols() == 0) m.erase(m.begin());
    return relation_from_blocks(d, m);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("LinearRelation envelope: ") + e.what());
  } catch (const ShapeError& e) {
    throw ParseError(e.what());
  }
}

/// M_1, M_2, ... as consecutive plain-text matrices; d is the row count of M_1.
inline LinearRelation relation_from_text(std::istream& is) {
  std::vector<Matrix> m;
  while (is >> std::ws && is.peek() != std::char_traits<char>::eof()) m.push_back(read_matrix(is));
  if (m.empty()) throw ParseError("no relation blocks");
  try {
    return relation_from_blocks(static_cast<int>(m.front().rows()), m);
  } catch (const ShapeError& e) {
    throw ParseError(e.what());
  }
}

inline nlohmann::json to_json(const LinearPoly& l) {
  std::vector<double> a;
  for (Real x : l.a) a.push_back(static_cast<double>(x));
  return {{"a", a}, {"b", static_cast<double>(l.b)}};
}

}  // namespace mvops

// The vector three-term relation
//   x_i P_n = A_{n,i} P_{n+1} + B_{n,i} P_n + C_{n,i} P_{n-1}:
// extraction from an orthogonal system, forward generation, rank
// conditions and least-squares fitting for arbitrary monic systems.
#pragma once

#include "mvops/construct.hpp"
#include "mvops/indexing.hpp"
#include "mvops/matrixkit.hpp"
#include "mvops/report.hpp"

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <vector>

namespace mvops {

/// Coefficient blocks for degrees n = 0..size()-1 and directions 0..d-1.
/// C[0][i] has zero columns.
struct ThreeTermData {
  int d = 1;
  std::vector<std::vector<Matrix>> A, B, C;
  /// Per-degree reconstruction or fit residuals, when known.
  std::vector<Real> residuals;

  int size() const { return static_cast<int>(A.size()); }

  Matrix joint_A(int n) const { return vstack(A.at(static_cast<std::size_t>(n))); }
  /// Stack of C_{n,i}^t over i, of size d r_{n-1} x r_n.
  Matrix joint_Ct(int n) const {
    std::vector<Matrix> t;
    for (const auto& c : C.at(static_cast<std::size_t>(n))) t.push_back(c.transpose());
    return vstack(t);
  }
  Real scale() const {
    Real s = 0;
    for (const auto* part : {&A, &B, &C})
      for (const auto& per_n : *part)
        for (const auto& m : per_n) s = std::max(s, max_abs(m));
    return s;
  }
  void check_shapes() const {
    if (B.size() != A.size() || C.size() != A.size()) throw ShapeError("ThreeTermData: A, B, C differ in length");
    for (int n = 0; n < size(); ++n) {
      const auto sn = static_cast<std::size_t>(n);
      if (static_cast<int>(A[sn].size()) != d || static_cast<int>(B[sn].size()) != d || static_cast<int>(C[sn].size()) != d)
        throw ShapeError("ThreeTermData: wrong number of directions at degree " + std::to_string(n));
      const int rn = rank_count(d, n), rn1 = rank_count(d, n + 1), rm = n ? rank_count(d, n - 1) : 0;
      for (int i = 0; i < d; ++i) {
        const auto si = static_cast<std::size_t>(i);
        if (A[sn][si].rows() != rn || A[sn][si].cols() != rn1 || B[sn][si].rows() != rn || B[sn][si].cols() != rn ||
            C[sn][si].rows() != rn || C[sn][si].cols() != rm)
          throw ShapeError("ThreeTermData: block shape wrong at degree " + std::to_string(n) + ", direction " +
                           std::to_string(i + 1));
      }
    }
  }
};

/// x_i P_n - A P_{n+1} - B P_n - C P_{n-1}, as coefficients.
inline PolyVec ttr_defect(const PolySystem& p, int n, int i, const Matrix& a, const Matrix& b, const Matrix& c) {
  PolyVec r = p[n].times_variable(i) - a * p[n + 1] - b * p[n];
  if (n > 0) r = r - c * p[n - 1];
  return r;
}

/// Three-term coefficients of an orthogonal system for n = 0..N-1, with
///   B = <u, x_i P_n P_n^t> H_n^{-1},  C = <u, x_i P_n P_{n-1}^t> H_{n-1}^{-1},
/// and A from the leading coefficients (A = L for monic systems). Throws if
/// the relative reconstruction residual exceeds tol_res.
inline ThreeTermData compute_ttr(const PolySystem& p, const MomentFunctional& u, const GramBlocks& h,
                                 Real tol_res = kResidualTol) {
  const int d = p.dim(), N = p.max_degree();
  ThreeTermData t;
  t.d = d;
  for (int n = 0; n < N; ++n) {
    std::vector<Matrix> as, bs, cs;
    Real worst = 0;
    for (int i = 0; i < d; ++i) {
      const Matrix l = shift_matrix(d, n, i);
      Matrix a = p.monic() ? l : Matrix(p.leading(n) * solve_right(l, p.leading(n + 1)));
      const PolyVec xp = p[n].times_variable(i);
      Matrix b = solve_right(inner_block(u, xp, p[n]), h[n]);
      Matrix c = n > 0 ? solve_right(inner_block(u, xp, p[n - 1]), h[n - 1]) : Matrix(rank_count(d, n), 0);
      const Real scale = std::max<Real>(max_abs(xp.coeffs()), 1);
      worst = std::max(worst, max_abs(ttr_defect(p, n, i, a, b, c).coeffs()) / scale);
      as.push_back(std::move(a));
      bs.push_back(std::move(b));
      cs.push_back(std::move(c));
    }
    if (worst > tol_res)
      throw std::runtime_error("compute_ttr: reconstruction residual " + format_real(worst) + " at degree " +
                               std::to_string(n) + " (input not orthogonal?)");
    t.A.push_back(std::move(as));
    t.B.push_back(std::move(bs));
    t.C.push_back(std::move(cs));
    t.residuals.push_back(worst);
  }
  return t;
}

struct GeneratedSystem {
  PolySystem system;
  /// Relative consistency residual of the stacked system per degree n+1.
  std::vector<Real> residuals;
  Real max_residual() const {
    Real m = 0;
    for (Real r : residuals) m = std::max(m, r);
    return m;
  }
};

/// Forward generation: P_0 = 1 and P_{n+1} solves the stacked system
/// A_n P_{n+1} = stack_i(x_i P_n - B_{n,i} P_n - C_{n,i} P_{n-1}) by least
/// squares. The consistency residual of the overdetermined system is
/// reported, not assumed zero.
inline GeneratedSystem generate_from_ttr(const ThreeTermData& t, int N) {
  t.check_shapes();
  if (N > t.size()) throw std::invalid_argument("generate_from_ttr: need coefficients for degrees 0..N-1");
  const int d = t.d;
  std::vector<PolyVec> polys{PolyVec::constant(d, 1)};
  std::vector<Real> residuals;
  bool monic = true;
  for (int n = 0; n < N; ++n) {
    std::vector<PolyVec> rhs;
    for (int i = 0; i < d; ++i) {
      const auto sn = static_cast<std::size_t>(n), si = static_cast<std::size_t>(i);
      PolyVec r = polys[sn].times_variable(i) - t.B[sn][si] * polys[sn];
      if (n > 0) r = r - t.C[sn][si] * polys[sn - 1];
      rhs.push_back(r);
      if (max_abs(t.A[sn][si] - shift_matrix(d, n, i)) != 0) monic = false;
    }
    const PolyVec stacked = stack(rhs).padded(n + 1);
    const Matrix a = t.joint_A(n);
    const Matrix next = lstsq(a, stacked.coeffs());
    const Real scale = std::max<Real>(max_abs(stacked.coeffs()), 1);
    residuals.push_back(max_abs(a * next - stacked.coeffs()) / scale);
    polys.emplace_back(d, n + 1, next);
  }
  return {PolySystem(d, std::move(polys), monic), std::move(residuals)};
}

/// rank A_{n,i} = rank C_{n+1,i} = r_n and rank A_n = rank C_{n+1}^t = r_{n+1}.
/// Ranks use tol * max(sigma_max, scale of the coefficient data).
inline Report validate_rank_conditions(const ThreeTermData& t, Real tol_rank = kRankTol) {
  Report rep;
  const int d = t.d;
  const Real ref = t.scale();
  for (int n = 0; n < t.size(); ++n) {
    const auto sn = static_cast<std::size_t>(n);
    for (int i = 0; i < d; ++i) {
      const auto si = static_cast<std::size_t>(i);
      rep.add(rank_check("rank A", n, i + 1, numeric_rank(t.A[sn][si], tol_rank, ref), rank_count(d, n)));
      if (n + 1 < t.size())
        rep.add(rank_check("rank C", n + 1, i + 1, numeric_rank(t.C[sn + 1][si], tol_rank, ref), rank_count(d, n)));
    }
    rep.add(rank_check("rank joint A", n, -1, numeric_rank(t.joint_A(n), tol_rank, ref), rank_count(d, n + 1)));
    if (n + 1 < t.size())
      rep.add(rank_check("rank joint C^t", n + 1, -1, numeric_rank(t.joint_Ct(n + 1), tol_rank, ref), rank_count(d, n + 1)));
  }
  return rep;
}

/// Least-squares fit of (B_{n,i}, C_{n,i}) for a monic system, n = 0..N-1.
/// residuals[n] is the worst relative misfit over i; zero exactly when the
/// system satisfies a three-term relation at degree n.
inline ThreeTermData fit_ttr(const PolySystem& p, int N) {
  if (!p.monic()) throw std::invalid_argument("fit_ttr: system must be monic");
  if (N > p.max_degree()) throw std::invalid_argument("fit_ttr: N exceeds the system degree");
  const int d = p.dim();
  ThreeTermData t;
  t.d = d;
  for (int n = 0; n < N; ++n) {
    const int rn = rank_count(d, n), rm = n ? rank_count(d, n - 1) : 0;
    const Matrix z = (n > 0 ? stack({p[n], p[n - 1]}) : p[n]).padded(n + 1).coeffs();
    std::vector<Matrix> as, bs, cs;
    Real worst = 0;
    for (int i = 0; i < d; ++i) {
      const Matrix l = shift_matrix(d, n, i);
      const PolyVec target = p[n].times_variable(i) - l * p[n + 1];
      const Matrix bc = lstsq(z.transpose(), target.coeffs().transpose()).transpose();
      const Real scale = std::max<Real>(max_abs(p[n].coeffs()), 1);
      worst = std::max(worst, max_abs(bc * z - target.coeffs()) / scale);
      as.push_back(l);
      bs.push_back(bc.leftCols(rn));
      cs.push_back(bc.rightCols(rm));
    }
    t.A.push_back(std::move(as));
    t.B.push_back(std::move(bs));
    t.C.push_back(std::move(cs));
    t.residuals.push_back(worst);
  }
  return t;
}

// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const ThreeTermData& t) {
  auto blocks = [&](const std::vector<std::vector<Matrix>>& part) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& per_n : part) {
      nlohmann::json row = nlohmann::json::array();
      for (const auto& m : per_n) row.push_back(to_text(m));
      out.push_back(row);
    }
    return out;
  };
  return {{"type", "ThreeTermData"}, {"d", t.d}, {"degrees", t.size()},
          {"A", blocks(t.A)}, {"B", blocks(t.B)}, {"C", blocks(t.C)}};
}

inline ThreeTermData ttr_from_json(const nlohmann::json& j) {
  try {
    if (j.at("type").get<std::string>() != "ThreeTermData") throw ParseError("not a ThreeTermData envelope");
    ThreeTermData t;
    t.d = j.at("d").get<int>();
    if (t.d < 1) throw ParseError("ThreeTermData envelope: bad d");
    auto blocks = [&](const char* key) {
      std::vector<std::vector<Matrix>> out;
      for (const auto& row : j.at(key)) {
        std::vector<Matrix> per_n;
        for (const auto& m : row) per_n.push_back(from_text(m.get<std::string>()));
        out.push_back(std::move(per_n));
      }
      return out;
    };
    t.A = blocks("A");
    t.B = blocks("B");
    t.C = blocks("C");
    t.check_shapes();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("ThreeTermData envelope: ") + e.what());
  } catch (const ShapeError& e) {
    throw ParseError(e.what());
  }
}

}  // namespace mvops

// Orthogonal polynomial systems built from a moment functional: block
// Gram–Schmidt, Gram blocks, orthonormalization and the two-variable
// product construction q_{n-k}^{(k)}(x) rho(x)^k r_k(y / rho(x)).
#pragma once

#include "mvops/indexing.hpp"
#include "mvops/matrixkit.hpp"
#include "mvops/moments.hpp"
#include "mvops/polynomial.hpp"
#include "mvops/recurrence.hpp"

#include <json.hpp>

#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvops {

/// The functional is not quasi-definite through `degree`: the Gram block
/// H_degree is numerically singular.
/// A singular Gram block H_k means no monic orthogonal polynomial of degree
/// k+1 exists. degree() is that k+1, the degree at which the orthogonal
/// system breaks; gram_block() is k.
class QuasiDefiniteFailure : public std::runtime_error {
 public:
  QuasiDefiniteFailure(int gram_block, std::vector<Real> sv)
      : std::runtime_error("Gram block H_" + std::to_string(gram_block) + " is singular; no monic orthogonal polynomial of degree " +
                           std::to_string(gram_block + 1)),
        block_(gram_block), singular_values_(std::move(sv)) {}
  int degree() const { return block_ + 1; }
  int gram_block() const { return block_; }
  const std::vector<Real>& singular_values() const { return singular_values_; }

 private:
  int block_;
  std::vector<Real> singular_values_;
};

/// P_0, ..., P_N with P_n = sum_k G_{n,k} X_k.
class PolySystem {
 public:
  PolySystem() = default;
  PolySystem(int d, std::vector<PolyVec> polys, bool monic, std::string label = "")
      : d_(d), polys_(std::move(polys)), monic_(monic), label_(std::move(label)) {
    for (std::size_t n = 0; n < polys_.size(); ++n) {
      const auto& p = polys_[n];
      if (p.dim() != d_ || p.rows() != rank_count(d_, static_cast<int>(n)) || p.degree() > static_cast<int>(n))
        throw ShapeError("PolySystem: degree-" + std::to_string(n) + " vector has wrong shape");
      if (p.degree() < static_cast<int>(n)) polys_[n] = p.padded(static_cast<int>(n));
    }
  }

  int dim() const { return d_; }
  int max_degree() const { return static_cast<int>(polys_.size()) - 1; }
  bool monic() const { return monic_; }
  const std::string& label() const { return label_; }
  void set_label(std::string s) { label_ = std::move(s); }

  const PolyVec& operator[](int n) const { return polys_.at(static_cast<std::size_t>(n)); }
  const std::vector<PolyVec>& polys() const { return polys_; }

  Matrix G(int n, int k) const { return (*this)[n].block(k); }
  Matrix leading(int n) const { return G(n, n); }

  /// Systems of degree <= n (n <= max_degree).
  PolySystem truncated(int n) const {
    return PolySystem(d_, std::vector<PolyVec>(polys_.begin(), polys_.begin() + n + 1), monic_, label_);
  }

 private:
  int d_ = 1;
  std::vector<PolyVec> polys_;
  bool monic_ = false;
  std::string label_;
};

/// H_n = <u, P_n P_n^t> for n = 0..N.
struct GramBlocks {
  std::vector<Matrix> H;
  const Matrix& operator[](int n) const { return H.at(static_cast<std::size_t>(n)); }
  int max_degree() const { return static_cast<int>(H.size()) - 1; }
  Real scale() const {
    Real s = 0;
    for (const auto& h : H) s = std::max(s, max_abs(h));
    return s;
  }
};

/// <u, p q^t>.
inline Matrix inner_block(const MomentFunctional& u, const PolyVec& p, const PolyVec& q) {
  return apply_outer(u, p, q);
}

/// Gram blocks below this fraction of the raw moment block are treated as
/// cancelled to roundoff. Healthy weights through degree 8 stay above 1e-12.
inline constexpr Real kGramFloor = 1e-14L;

inline Matrix symmetrize(const Matrix& h) { return (h + h.transpose()) / 2; }

inline std::vector<Real> to_std(const Vector& v) { return std::vector<Real>(v.data(), v.data() + v.size()); }

/// Monic orthogonal system through degree N by block Gram–Schmidt,
///   P_n = X_n - sum_{j<n} <u, X_n P_j^t> H_j^{-1} P_j,
/// with one reorthogonalization sweep. Throws QuasiDefiniteFailure at the
/// first rank-deficient Gram block, including H_N itself.
inline std::pair<PolySystem, GramBlocks> gram_schmidt_monic(const MomentFunctional& u, int N,
                                                            Real tol_rank = kRankTol) {
  if (N < 0) throw std::invalid_argument("gram_schmidt_monic: need N >= 0");
  const int d = u.dim();
  std::vector<PolyVec> polys;
  GramBlocks gram;
  for (int n = 0; n <= N; ++n) {
    PolyVec p = PolyVec::monomials(d, n);
    for (int sweep = 0; sweep < 2 && n > 0; ++sweep) {
      PolyVec correction(d, n, p.rows());
      for (int j = 0; j < n; ++j) {
        const Matrix c = inner_block(u, p, polys[static_cast<std::size_t>(j)]);
        correction = correction + solve_right(c, gram.H[static_cast<std::size_t>(j)], tol_rank) * polys[static_cast<std::size_t>(j)];
      }
      p = p - correction;
    }
    p.set_block(n, Matrix::Identity(p.rows(), p.rows()));
    const Matrix h = symmetrize(inner_block(u, p, p));
    // H_n is the Schur complement of the moment block <u, X_n X_n^t>; a
    // block that cancels down to roundoff of that block counts as singular
    // even when it is 1x1 and so has no internal scale.
    const PolyVec x = PolyVec::monomials(d, n);
    const Real floor = kGramFloor * singular_values(inner_block(u, x, x)).maxCoeff();
    const Vector sv = singular_values(h);
    if (numeric_rank(h, tol_rank) < p.rows() || sv.minCoeff() <= floor) throw QuasiDefiniteFailure(n, to_std(sv));
    polys.push_back(std::move(p));
    gram.H.push_back(h);
  }
  return {PolySystem(d, std::move(polys), true, u.label()), std::move(gram)};
}

/// Gram blocks of an arbitrary system.
inline GramBlocks gram_blocks(const MomentFunctional& u, const PolySystem& p) {
  GramBlocks g;
  for (int n = 0; n <= p.max_degree(); ++n) g.H.push_back(symmetrize(inner_block(u, p[n], p[n])));
  return g;
}

/// max over m < n of |<u, P_n P_m^t>|, relative to the Gram-block scale.
inline Real orthogonality_defect(const MomentFunctional& u, const PolySystem& p) {
  Real worst = 0, scale = 0;
  for (int n = 0; n <= p.max_degree(); ++n) {
    scale = std::max(scale, max_abs(inner_block(u, p[n], p[n])));
    for (int m = 0; m < n; ++m) worst = std::max(worst, max_abs(inner_block(u, p[n], p[m])));
  }
  return scale > 0 ? worst / scale : worst;
}

/// S_n P_n with S_n the inverse symmetric square root of H_n.
inline PolySystem orthonormalize(const PolySystem& p, const GramBlocks& h) {
  std::vector<PolyVec> out;
  for (int n = 0; n <= p.max_degree(); ++n) out.push_back(inverse(sqrt_spd(h[n])) * p[n]);
  return PolySystem(p.dim(), std::move(out), false, p.label());
}

/// G_{n,n}^{-1} P_n, the monic system with the same span per degree.
inline PolySystem to_monic(const PolySystem& p) {
  std::vector<PolyVec> out;
  for (int n = 0; n <= p.max_degree(); ++n) {
    PolyVec q = inverse(p.leading(n)) * p[n];
    q.set_block(n, Matrix::Identity(q.rows(), q.rows()));
    out.push_back(std::move(q));
  }
  return PolySystem(p.dim(), std::move(out), true, p.label());
}

/// Gram blocks after the change of basis P_n -> G_n^{-1} P_n.
inline GramBlocks to_monic(const GramBlocks& h, const PolySystem& p) {
  GramBlocks out;
  for (int n = 0; n <= h.max_degree(); ++n) {
    const Matrix gi = inverse(p.leading(n));
    out.H.push_back(symmetrize(gi * h[n] * gi.transpose()));
  }
  return out;
}

/// Coefficients c_0..c_n with q = sum_j c_j P_j, by peeling off leading
/// blocks from the top degree down. q must have degree <= P's max degree.
inline std::vector<Matrix> expand_in_basis(const PolyVec& q, const PolySystem& p) {
  if (q.degree() > p.max_degree()) throw std::invalid_argument("expand_in_basis: basis degree too low");
  std::vector<Matrix> c(static_cast<std::size_t>(q.degree()) + 1);
  PolyVec rest = q;
  for (int j = q.degree(); j >= 0; --j) {
    c[static_cast<std::size_t>(j)] = solve_right(rest.block(j), p.leading(j));
    rest = rest - c[static_cast<std::size_t>(j)] * p[j];
  }
  return c;
}

/// How rho enters the product construction: either rho itself is a
/// polynomial of degree one, or only rho^2 is (degree <= 2) and r_k has the
/// parity of k.
struct RhoSpec {
  PolyVec poly;         // univariate: rho, or rho^2
  bool squared = false;

  static RhoSpec linear(Real c0, Real c1) { return {univariate({c0, c1}), false}; }
  static RhoSpec one() { return {univariate({1}), false}; }
  static RhoSpec sqrt_of(const std::vector<Real>& rho2) { return {univariate(rho2), true}; }
};

/// Bivariate system Q_{n-k,k} = q_{n-k}^{(k)}(x) rho(x)^k r_k(y/rho(x)),
/// rows k = 0..n, with q^{(k)} and r monic (from the given recurrences).
/// `q_of_k(k, m)` returns a recurrence with at least m terms for the weight
/// rho^{2k+1} w_1.
inline PolySystem koornwinder_system(const std::function<Recurrence1D(int, int)>& q_of_k, const Recurrence1D& r,
                                     const RhoSpec& rho, int N, std::string label = "") {
  if (rho.poly.degree() > (rho.squared ? 2 : 1)) throw std::invalid_argument("koornwinder_system: inadmissible rho");
  const auto rpolys = r.monic_polys(N);
  if (rho.squared) {
    for (int k = 0; k <= N; ++k)
      for (int j = 0; j <= k; ++j)
        if ((k - j) % 2 && std::abs(rpolys[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)]) > 1e-12L)
          throw std::invalid_argument("koornwinder_system: r_k must have the parity of k when only rho^2 is polynomial");
  }
  const PolyVec y = PolyVec::linear({0, 1}, 0);
  const PolyVec rho_xy = embed_univariate(rho.poly, 2, 0);
  // rho^k r_k(y/rho) as a polynomial.
  auto lifted_r = [&](int k) {
    const auto& c = rpolys[static_cast<std::size_t>(k)];
    PolyVec out = PolyVec::constant(2, 0);
    for (int j = 0; j <= k; ++j) {
      const Real cj = c[static_cast<std::size_t>(j)];
      if (cj == 0) continue;
      const int gap = k - j;
      if (rho.squared && gap % 2) continue;
      out = out + cj * y.pow(j).times(rho_xy.pow(rho.squared ? gap / 2 : gap));
    }
    return out;
  };
  std::vector<PolyVec> lr;
  for (int k = 0; k <= N; ++k) lr.push_back(lifted_r(k));
  std::vector<std::vector<std::vector<Real>>> q(static_cast<std::size_t>(N) + 1);
  for (int k = 0; k <= N; ++k) q[static_cast<std::size_t>(k)] = q_of_k(k, N - k + 1).monic_polys(N - k);

  std::vector<PolyVec> polys;
  for (int n = 0; n <= N; ++n) {
    std::vector<PolyVec> rows;
    for (int k = 0; k <= n; ++k) {
      const PolyVec qx = embed_univariate(univariate(q[static_cast<std::size_t>(k)][static_cast<std::size_t>(n - k)]), 2, 0);
      rows.push_back(qx.times(lr[static_cast<std::size_t>(k)]).truncated(n));
    }
    polys.push_back(stack(rows));
  }
  return PolySystem(2, std::move(polys), false, std::move(label));
}

/// The functional w with <w, 1> = 1 and <w, P_n> = 0 for 1 <= n <= N; its
/// moments are known up to degree N. A system is orthogonal exactly when its
/// Gram blocks under this functional are block diagonal and invertible.
inline MomentFunctional functional_from_basis(const PolySystem& p) {
  const int d = p.dim(), N = p.max_degree();
  const auto idx = flat_indices(d, N);
  std::map<MultiIndex, Real> table;
  const Real p0 = p.leading(0)(0, 0);
  for (const auto& alpha : idx) {
    PolyVec mono(d, total_degree(alpha), 1);
    mono.coeffs()(0, flat_position(alpha)) = 1;
    table[alpha] = expand_in_basis(mono, p)[0](0, 0) * p0;
  }
  return MomentFunctional(d, "dual(" + p.label() + ")", [table, N](const MultiIndex& a) {
    auto it = table.find(a);
    if (it == table.end()) throw std::out_of_range("functional_from_basis: moment beyond degree " + std::to_string(N));
    return it->second;
  }, "<w,1> = 1");
}

// ---------------------------------------------------------------------------
// JSON envelope: per-degree G_{n,k} blocks in the plain-text matrix format.

inline nlohmann::json to_json(const PolySystem& p) {
  nlohmann::json blocks = nlohmann::json::array();
  for (int n = 0; n <= p.max_degree(); ++n) {
    nlohmann::json row = nlohmann::json::array();
    for (int k = 0; k <= n; ++k) row.push_back(to_text(p.G(n, k)));
    blocks.push_back(row);
  }
  return {{"type", "PolySystem"}, {"d", p.dim()}, {"N", p.max_degree()}, {"monic", p.monic()},
          {"functional", p.label()}, {"blocks", blocks}};
}

inline PolySystem polysystem_from_json(const nlohmann::json& j) {
  try {
    if (j.at("type").get<std::string>() != "PolySystem") throw ParseError("not a PolySystem envelope");
    const int d = j.at("d").get<int>(), N = j.at("N").get<int>();
    if (d < 1 || N < 0) throw ParseError("PolySystem envelope: bad d or N");
    const auto& blocks = j.at("blocks");
    if (static_cast<int>(blocks.size()) != N + 1) throw ParseError("PolySystem envelope: wrong number of degrees");
    std::vector<PolyVec> polys;
    for (int n = 0; n <= N; ++n) {
      PolyVec p(d, n, rank_count(d, n));
      const auto& row = blocks.at(static_cast<std::size_t>(n));
      if (static_cast<int>(row.size()) != n + 1) throw ParseError("PolySystem envelope: wrong number of blocks");
      for (int k = 0; k <= n; ++k) {
        const Matrix g = from_text(row.at(static_cast<std::size_t>(k)).get<std::string>());
        if (g.rows() != rank_count(d, n) || g.cols() != rank_count(d, k))
          throw ParseError("PolySystem envelope: block G_{" + std::to_string(n) + "," + std::to_string(k) + "} has wrong shape");
        p.set_block(k, g);
      }
      polys.push_back(std::move(p));
    }
    return PolySystem(d, std::move(polys), j.at("monic").get<bool>(), j.value("functional", ""));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("PolySystem envelope: ") + e.what());
  }
}

}  // namespace mvops

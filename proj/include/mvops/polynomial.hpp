// Column vectors of polynomials in d variables, stored as dense coefficient
// rows over the graded monomial basis. The flat position of a monomial does
// not depend on the degree bound (the graded order is a prefix order), so
// vectors of different degree bounds combine by zero-padding.
#pragma once

#include "mvops/indexing.hpp"
#include "mvops/matrixkit.hpp"

#include <stdexcept>
#include <vector>

namespace mvops {

/// Position of nu inside its degree block (descending lexicographic).
inline int block_position(const MultiIndex& nu) {
  const int d = static_cast<int>(nu.size());
  int n = total_degree(nu);
  int pos = 0;
  for (int k = 0; k + 1 < d; ++k) {
    const int rest = d - k - 1;
    for (int f = n; f > nu[static_cast<std::size_t>(k)]; --f) pos += rank_count(rest, n - f);
    n -= nu[static_cast<std::size_t>(k)];
  }
  return pos;
}

inline int flat_position(const MultiIndex& nu) {
  return space_dim(static_cast<int>(nu.size()), total_degree(nu) - 1) + block_position(nu);
}

/// All multi-indices of degree <= max_degree in flat order.
inline std::vector<MultiIndex> flat_indices(int d, int max_degree) {
  std::vector<MultiIndex> out;
  for (int n = 0; n <= max_degree; ++n) {
    auto b = enumerate_indices(d, n);
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

class PolyVec {
 public:
  PolyVec() = default;
  PolyVec(int d, int degree, int rows)
      : d_(d), degree_(degree), coeffs_(Matrix::Zero(rows, space_dim(d, degree))) {}
  PolyVec(int d, int degree, Matrix coeffs) : d_(d), degree_(degree), coeffs_(std::move(coeffs)) {
    if (coeffs_.cols() != space_dim(d, degree)) throw ShapeError("PolyVec: coefficient width does not match degree");
  }

  /// The canonical vector X_n of degree-n monomials.
  static PolyVec monomials(int d, int n) {
    PolyVec x(d, n, rank_count(d, n));
    x.coeffs_.block(0, space_dim(d, n - 1), x.rows(), x.rows()).setIdentity();
    return x;
  }
  static PolyVec constant(int d, Real c) {
    PolyVec p(d, 0, 1);
    p.coeffs_(0, 0) = c;
    return p;
  }
  /// sum_i a_i x_i + b
  static PolyVec linear(const std::vector<Real>& a, Real b) {
    const int d = static_cast<int>(a.size());
    PolyVec p(d, 1, 1);
    p.coeffs_(0, 0) = b;
    for (int i = 0; i < d; ++i) p.coeffs_(0, flat_position(unit_index(d, i))) = a[static_cast<std::size_t>(i)];
    return p;
  }

  int dim() const { return d_; }
  int degree() const { return degree_; }
  int rows() const { return static_cast<int>(coeffs_.rows()); }
  const Matrix& coeffs() const { return coeffs_; }
  Matrix& coeffs() { return coeffs_; }

  /// Coefficient block on X_k (columns of degree k).
  Matrix block(int k) const {
    if (k > degree_) return Matrix::Zero(rows(), rank_count(d_, k));
    return coeffs_.middleCols(space_dim(d_, k - 1), rank_count(d_, k));
  }
  void set_block(int k, const Matrix& g) {
    coeffs_.middleCols(space_dim(d_, k - 1), rank_count(d_, k)) = g;
  }

  Real coeff(int row, const MultiIndex& nu) const {
    const int f = flat_position(nu);
    return f < coeffs_.cols() ? coeffs_(row, f) : Real(0);
  }

  PolyVec padded(int degree) const {
    if (degree < degree_) throw std::invalid_argument("PolyVec::padded: cannot shrink");
    PolyVec out(d_, degree, rows());
    out.coeffs_.leftCols(coeffs_.cols()) = coeffs_;
    return out;
  }

  /// Drops trailing degrees; the caller asserts they are (numerically) zero.
  PolyVec truncated(int degree) const {
    return PolyVec(d_, degree, Matrix(coeffs_.leftCols(space_dim(d_, degree))));
  }

  PolyVec row(int r) const { return PolyVec(d_, degree_, Matrix(coeffs_.row(r))); }

  /// x_i * this (0-based direction).
  PolyVec times_variable(int i) const {
    PolyVec out(d_, degree_ + 1, rows());
    const auto idx = flat_indices(d_, degree_);
    for (std::size_t f = 0; f < idx.size(); ++f) {
      MultiIndex up = idx[f];
      ++up[static_cast<std::size_t>(i)];
      out.coeffs_.col(flat_position(up)) = coeffs_.col(static_cast<Eigen::Index>(f));
    }
    return out;
  }

  /// Each row multiplied by the scalar polynomial p.
  PolyVec times(const PolyVec& p) const {
    if (p.rows() != 1 || p.dim() != d_) throw ShapeError("PolyVec::times: need a scalar polynomial of equal dimension");
    PolyVec out(d_, degree_ + p.degree_, rows());
    const auto mine = flat_indices(d_, degree_);
    const auto theirs = flat_indices(d_, p.degree_);
    for (std::size_t g = 0; g < theirs.size(); ++g) {
      const Real c = p.coeffs_(0, static_cast<Eigen::Index>(g));
      if (c == 0) continue;
      for (std::size_t f = 0; f < mine.size(); ++f)
        out.coeffs_.col(flat_position(add(mine[f], theirs[g]))) += c * coeffs_.col(static_cast<Eigen::Index>(f));
    }
    return out;
  }

  PolyVec pow(int k) const {
    PolyVec out = constant(d_, 1);
    for (int j = 0; j < k; ++j) out = out.times(*this);
    return out;
  }

  Vector evaluate(const std::vector<Real>& x) const {
    const auto idx = flat_indices(d_, degree_);
    Vector mono(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t f = 0; f < idx.size(); ++f) {
      Real v = 1;
      for (int k = 0; k < d_; ++k) v *= std::pow(x[static_cast<std::size_t>(k)], idx[f][static_cast<std::size_t>(k)]);
      mono(static_cast<Eigen::Index>(f)) = v;
    }
    return coeffs_ * mono;
  }

  friend PolyVec operator*(const Matrix& m, const PolyVec& p) {
    if (m.cols() != p.rows()) throw ShapeError("Matrix * PolyVec: shape mismatch");
    return PolyVec(p.d_, p.degree_, Matrix(m * p.coeffs_));
  }
  friend PolyVec operator*(Real s, const PolyVec& p) { return PolyVec(p.d_, p.degree_, Matrix(s * p.coeffs_)); }
  friend PolyVec operator+(const PolyVec& a, const PolyVec& b) { return combine(a, b, 1); }
  friend PolyVec operator-(const PolyVec& a, const PolyVec& b) { return combine(a, b, -1); }

 private:
  static PolyVec combine(const PolyVec& a, const PolyVec& b, Real sign) {
    if (a.d_ != b.d_ || a.rows() != b.rows()) throw ShapeError("PolyVec: incompatible operands");
    const int deg = std::max(a.degree_, b.degree_);
    PolyVec out = a.padded(deg);
    out.coeffs_.leftCols(b.coeffs_.cols()) += sign * b.coeffs_;
    return out;
  }

  int d_ = 1;
  int degree_ = 0;
  Matrix coeffs_;
};

/// Stacks polynomial vectors of equal dimension (rows concatenated).
inline PolyVec stack(const std::vector<PolyVec>& parts) {
  if (parts.empty()) throw std::invalid_argument("stack: empty");
  int deg = 0, rows = 0;
  for (const auto& p : parts) {
    deg = std::max(deg, p.degree());
    rows += p.rows();
  }
  PolyVec out(parts.front().dim(), deg, rows);
  int r = 0;
  for (const auto& p : parts) {
    out.coeffs().block(r, 0, p.rows(), p.coeffs().cols()) = p.coeffs();
    r += p.rows();
  }
  return out;
}

/// Univariate polynomial from ascending coefficients c_0 + c_1 t + ...
inline PolyVec univariate(const std::vector<Real>& c) {
  const int deg = std::max(0, static_cast<int>(c.size()) - 1);
  PolyVec p(1, deg, 1);
  for (std::size_t k = 0; k < c.size(); ++k) p.coeffs()(0, static_cast<Eigen::Index>(k)) = c[k];
  return p;
}

/// Substitutes a polynomial (in d variables) for the single variable of a
/// univariate polynomial: q(t) -> q(s(x)).
inline PolyVec compose(const PolyVec& q, const PolyVec& s) {
  if (q.dim() != 1 || q.rows() != 1) throw ShapeError("compose: outer polynomial must be scalar univariate");
  PolyVec out = PolyVec::constant(s.dim(), 0);
  PolyVec power = PolyVec::constant(s.dim(), 1);
  for (int k = 0; k <= q.degree(); ++k) {
    const Real c = q.coeffs()(0, k);
    if (c != 0) out = out + c * power;
    if (k < q.degree()) power = power.times(s);
  }
  return out;
}

/// Embeds a univariate polynomial as a polynomial in variable `var` of d.
inline PolyVec embed_univariate(const PolyVec& q, int d, int var) {
  PolyVec x = PolyVec::linear([&] {
    std::vector<Real> a(static_cast<std::size_t>(d), 0);
    a[static_cast<std::size_t>(var)] = 1;
    return a;
  }(), 0);
  return compose(q, x);
}

}  // namespace mvops

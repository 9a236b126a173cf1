// Multi-indices in graded order, dimension counts and the shift matrices
// L_{n,i} defined by L_{n,i} X_{n+1} = x_i X_n.
//
// Ordering: by total degree, then descending lexicographic on (nu_1..nu_d).
// For d = 2 the degree-n block is (n,0), (n-1,1), ..., (0,n). For d >= 3 this
// is our convention; no other ordering is supported.
#pragma once

#include "mvops/matrixkit.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mvops {

using MultiIndex = std::vector<int>;

inline int total_degree(const MultiIndex& nu) {
  int s = 0;
  for (int v : nu) s += v;
  return s;
}

inline MultiIndex unit_index(int d, int i) {
  MultiIndex e(static_cast<std::size_t>(d), 0);
  e.at(static_cast<std::size_t>(i)) = 1;
  return e;
}

inline MultiIndex add(MultiIndex a, const MultiIndex& b) {
  for (std::size_t k = 0; k < a.size(); ++k) a[k] += b[k];
  return a;
}

inline std::int64_t binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::int64_t r = 1;
  for (std::int64_t j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return r;
}

/// r_n^d = C(n+d-1, d-1), the number of monomials of total degree n.
inline int rank_count(int d, int n) {
  if (d < 1 || n < 0) throw std::invalid_argument("rank_count: need d >= 1, n >= 0");
  return static_cast<int>(binomial(n + d - 1, d - 1));
}

/// Number of monomials of total degree <= n.
inline int space_dim(int d, int n) {
  return n < 0 ? 0 : static_cast<int>(binomial(n + d, d));
}

namespace detail {
inline void enumerate_into(int d, int n, MultiIndex& prefix, std::vector<MultiIndex>& out) {
  if (static_cast<int>(prefix.size()) == d - 1) {
    prefix.push_back(n);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int first = n; first >= 0; --first) {
    prefix.push_back(first);
    enumerate_into(d, n - first, prefix, out);
    prefix.pop_back();
  }
}
}  // namespace detail

inline std::vector<MultiIndex> enumerate_indices(int d, int n) {
  if (d < 1 || n < 0) throw std::invalid_argument("enumerate_indices: need d >= 1, n >= 0");
  std::vector<MultiIndex> out;
  out.reserve(static_cast<std::size_t>(rank_count(d, n)));
  MultiIndex prefix;
  detail::enumerate_into(d, n, prefix, out);
  return out;
}

/// All multi-indices of degree 0..max_degree with O(log) lookup of
/// (degree, position) and of the flat position in the graded basis.
class GradedBasis {
 public:
  GradedBasis(int d, int max_degree) : d_(d), max_degree_(max_degree) {
    if (d < 1 || max_degree < 0) throw std::invalid_argument("GradedBasis: need d >= 1, max_degree >= 0");
    int flat = 0;
    for (int n = 0; n <= max_degree; ++n) {
      offsets_.push_back(flat);
      blocks_.push_back(enumerate_indices(d, n));
      for (std::size_t p = 0; p < blocks_.back().size(); ++p) {
        lookup_.emplace(blocks_.back()[p], Slot{n, static_cast<int>(p), flat});
        ++flat;
      }
    }
    size_ = flat;
  }

  int dim() const { return d_; }
  int max_degree() const { return max_degree_; }
  /// Number of monomials of degree <= max_degree.
  int size() const { return size_; }
  int block_size(int n) const { return rank_count(d_, n); }
  int offset(int n) const { return offsets_.at(static_cast<std::size_t>(n)); }
  const std::vector<MultiIndex>& block(int n) const { return blocks_.at(static_cast<std::size_t>(n)); }
  const MultiIndex& at_flat(int flat) const {
    int n = 0;
    while (n < max_degree_ && offsets_[static_cast<std::size_t>(n) + 1] <= flat) ++n;
    return blocks_[static_cast<std::size_t>(n)][static_cast<std::size_t>(flat - offsets_[static_cast<std::size_t>(n)])];
  }

  bool contains(const MultiIndex& nu) const { return lookup_.count(nu) != 0; }
  int position(const MultiIndex& nu) const { return slot(nu).position; }
  int flat_index(const MultiIndex& nu) const { return slot(nu).flat; }

  /// L_{n,i} (0-based direction i), size r_n x r_{n+1}.
  Matrix shift_matrix(int n, int i) const {
    if (i < 0 || i >= d_) throw std::invalid_argument("shift_matrix: direction out of range");
    const int rows = rank_count(d_, n), cols = rank_count(d_, n + 1);
    Matrix l = Matrix::Zero(rows, cols);
    const auto alphas = n <= max_degree_ ? block(n) : enumerate_indices(d_, n);
    const auto next = enumerate_indices(d_, n + 1);
    std::map<MultiIndex, int> pos;
    for (int c = 0; c < cols; ++c) pos.emplace(next[static_cast<std::size_t>(c)], c);
    for (int r = 0; r < rows; ++r) {
      MultiIndex up = alphas[static_cast<std::size_t>(r)];
      ++up[static_cast<std::size_t>(i)];
      l(r, pos.at(up)) = 1;
    }
    return l;
  }

 private:
  struct Slot {
    int degree;
    int position;
    int flat;
  };
  const Slot& slot(const MultiIndex& nu) const {
    auto it = lookup_.find(nu);
    if (it == lookup_.end()) throw std::out_of_range("GradedBasis: multi-index not in basis");
    return it->second;
  }

  int d_;
  int max_degree_;
  int size_ = 0;
  std::vector<int> offsets_;
  std::vector<std::vector<MultiIndex>> blocks_;
  std::map<MultiIndex, Slot> lookup_;
};

/// L_{n,i} without building a basis object.
inline Matrix shift_matrix(int d, int n, int i) { return GradedBasis(d, n + 1).shift_matrix(n, i); }

/// Vertical stack of per-direction blocks (direction order 1..d).
inline Matrix joint_matrix(const std::vector<Matrix>& blocks) { return vstack(blocks); }

/// The joint matrix L_n of L_{n,1}, ..., L_{n,d}.
inline Matrix joint_shift(int d, int n) {
  std::vector<Matrix> ls;
  for (int i = 0; i < d; ++i) ls.push_back(shift_matrix(d, n, i));
  return joint_matrix(ls);
}

}  // namespace mvops

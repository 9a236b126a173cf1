// Dense real matrix kernel: products, solves, least squares, numerical rank
// and the plain-text matrix format used by the command-line tools.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

namespace mvops {

using Real = long double;
using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
using Vector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

/// Default relative threshold for rank decisions.
inline constexpr Real kRankTol = 1e-9L;
/// Default relative threshold for residual checks.
inline constexpr Real kResidualTol = 1e-8L;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline Real max_abs(const Matrix& m) {
  return m.size() == 0 ? Real(0) : m.cwiseAbs().maxCoeff();
}

inline Vector singular_values(const Matrix& m) {
  if (m.size() == 0) return Vector();
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues();
}

/// Number of singular values above tol * max(sigma_max, ref_scale).
///
/// With ref_scale = 0 this is the purely relative rule; a zero matrix has
/// rank 0. A positive ref_scale gives an absolute floor so that a block which
/// is zero up to roundoff (e.g. a single column of size 1e-17) is not counted
/// as full rank just because it is its own largest singular value.
inline int numeric_rank(const Matrix& m, Real tol = kRankTol, Real ref_scale = 0) {
  if (!(tol > 0)) throw std::invalid_argument("numeric_rank: tolerance must be positive");
  const Vector s = singular_values(m);
  if (s.size() == 0) return 0;
  const Real threshold = tol * std::max(s.maxCoeff(), ref_scale);
  int rank = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s(k) > threshold) ++rank;
  return rank;
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw ShapeError("matmul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                     " times " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  return a * b;
}

/// Solves a * x = b for square, numerically nonsingular a.
inline Matrix solve(const Matrix& a, const Matrix& b, Real tol = kRankTol) {
  if (a.rows() != a.cols()) throw ShapeError("solve: matrix is not square");
  if (a.rows() != b.rows()) throw ShapeError("solve: right-hand side has wrong row count");
  if (a.rows() == 0) return Matrix(0, b.cols());
  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  qr.setThreshold(tol);
  if (qr.rank() < a.rows()) throw SingularMatrixError("solve: singular matrix");
  return qr.solve(b);
}

inline Matrix inverse(const Matrix& a, Real tol = kRankTol) {
  return solve(a, Matrix::Identity(a.rows(), a.cols()), tol);
}

/// Right division x * a^{-1}, i.e. the solution of y * a = x.
inline Matrix solve_right(const Matrix& x, const Matrix& a, Real tol = kRankTol) {
  return solve(a.transpose(), x.transpose(), tol).transpose();
}

/// Minimum-norm least-squares solution of a * x = b.
inline Matrix lstsq(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw ShapeError("lstsq: row mismatch");
  if (a.cols() == 0) return Matrix(0, b.cols());
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a);
  return cod.solve(b);
}

/// Vertical stack of equally wide blocks, in the given order.
inline Matrix vstack(const std::vector<Matrix>& blocks) {
  if (blocks.empty()) return Matrix();
  const auto cols = blocks.front().cols();
  Eigen::Index rows = 0;
  for (const auto& b : blocks) {
    if (b.cols() != cols) throw ShapeError("vstack: column counts differ");
    rows += b.rows();
  }
  Matrix out(rows, cols);
  Eigen::Index r = 0;
  for (const auto& b : blocks) {
    out.middleRows(r, b.rows()) = b;
    r += b.rows();
  }
  return out;
}

/// Symmetric positive square root via the eigen-decomposition.
inline Matrix sqrt_spd(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.eigenvalues().minCoeff() <= 0) throw SingularMatrixError("sqrt_spd: matrix is not positive definite");
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

// ---------------------------------------------------------------------------
// Plain-text format: "rows cols" then one line per row, whitespace separated.

inline std::string format_real(Real x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline Real parse_real(const std::string& tok) {
  Real value{};
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last) throw ParseError("not a number: '" + tok + "'");
  if (!std::isfinite(value)) throw ParseError("non-finite entry: '" + tok + "'");
  return value;
}

inline void write_matrix(std::ostream& os, const Matrix& m) {
  os << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << ' ';
      os << format_real(m(i, j));
    }
    os << '\n';
  }
}

inline std::string to_text(const Matrix& m) {
  std::ostringstream os;
  write_matrix(os, m);
  return os.str();
}

inline Matrix read_matrix(std::istream& is) {
  long long rows = -1, cols = -1;
  if (!(is >> rows >> cols) || rows < 0 || cols < 0) throw ParseError("bad matrix header");
  Matrix m(rows, cols);
  std::string tok;
  for (long long i = 0; i < rows; ++i)
    for (long long j = 0; j < cols; ++j) {
      if (!(is >> tok)) throw ParseError("matrix truncated");
      m(i, j) = parse_real(tok);
    }
  return m;
}

inline Matrix from_text(const std::string& s) {
  std::istringstream is(s);
  return read_matrix(is);
}

}  // namespace mvops

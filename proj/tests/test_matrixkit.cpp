#include "mvops/matrixkit.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace mvops;

namespace {

Matrix random_matrix(std::mt19937_64& rng, int r, int c) {
  std::uniform_real_distribution<double> dist(-1, 1);
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = dist(rng);
  return m;
}

// Diagonally dominant, so comfortably invertible.
Matrix well_conditioned(std::mt19937_64& rng, int n) {
  return random_matrix(rng, n, n) + 4 * Matrix::Identity(n, n);
}

}  // namespace

TEST(NumericRank, Examples) {
  EXPECT_EQ(numeric_rank(Matrix::Identity(3, 3), 1e-10L), 3);
  EXPECT_EQ(numeric_rank(Matrix::Zero(2, 4), 1e-10L), 0);
  Matrix m(2, 2);
  m << 1, 1, 1, 1 + 1e-14L;
  EXPECT_EQ(numeric_rank(m, 1e-10L), 1);
  EXPECT_EQ(numeric_rank(Matrix(0, 3)), 0);
}

TEST(NumericRank, ReferenceScaleActsAsFloor) {
  Matrix m(1, 1);
  m << 1e-12L;
  EXPECT_EQ(numeric_rank(m, 1e-9L), 1);
  EXPECT_EQ(numeric_rank(m, 1e-9L, 1), 0);
}

TEST(NumericRank, InvariantUnderNonsingularMultiplication) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix low = random_matrix(rng, 6, 3) * random_matrix(rng, 3, 5);  // rank 3
    const Matrix l = well_conditioned(rng, 6), r = well_conditioned(rng, 5);
    EXPECT_EQ(numeric_rank(low), 3);
    EXPECT_EQ(numeric_rank(l * low * r), 3);
  }
}

TEST(Solve, IdentityAndDiagonal) {
  std::mt19937_64 rng(3);
  const Matrix b = random_matrix(rng, 3, 2);
  EXPECT_EQ(solve(Matrix::Identity(3, 3), b), b);
  Matrix d(2, 2);
  d << 2, 0, 0, 4;
  Matrix expect(2, 2);
  expect << 0.5L, 0, 0, 0.25L;
  EXPECT_LE(max_abs(inverse(d) - expect), 1e-18L);
}

TEST(Solve, InverseOfWellConditioned) {
  std::mt19937_64 rng(5);
  for (int n : {1, 3, 6, 10}) {
    const Matrix a = well_conditioned(rng, n);
    EXPECT_LE(max_abs(inverse(a) * a - Matrix::Identity(n, n)), 1e-10L);
  }
}

TEST(Solve, RightSolve) {
  std::mt19937_64 rng(6);
  const Matrix a = well_conditioned(rng, 4), x = random_matrix(rng, 2, 4);
  EXPECT_LE(max_abs(solve_right(x * a, a) - x), 1e-15L);
}

TEST(Solve, SingularAndShapeErrors) {
  Matrix s(2, 2);
  s << 1, 2, 2, 4;
  EXPECT_THROW(solve(s, Matrix::Identity(2, 2)), SingularMatrixError);
  EXPECT_THROW(inverse(Matrix::Zero(3, 3)), SingularMatrixError);
  EXPECT_THROW(solve(Matrix::Identity(2, 2), Matrix::Identity(3, 3)), ShapeError);
  EXPECT_THROW(matmul(Matrix(2, 3), Matrix(2, 3)), ShapeError);
}

TEST(Lstsq, MatchesNormalEquations) {
  std::mt19937_64 rng(8);
  const Matrix a = random_matrix(rng, 7, 3), b = random_matrix(rng, 7, 2);
  const Matrix x = lstsq(a, b);
  const Matrix normal = (a.transpose() * a).ldlt().solve(a.transpose() * b);
  EXPECT_LE(max_abs(x - normal), 1e-14L);
}

TEST(Lstsq, ConsistentOverdeterminedIsExact) {
  std::mt19937_64 rng(9);
  const Matrix a = random_matrix(rng, 8, 4), x = random_matrix(rng, 4, 3);
  EXPECT_LE(max_abs(lstsq(a, a * x) - x), 1e-15L);
}

TEST(SqrtSpd, SquaresBack) {
  std::mt19937_64 rng(10);
  const Matrix g = random_matrix(rng, 4, 4);
  const Matrix h = g * g.transpose() + Matrix::Identity(4, 4);
  const Matrix s = sqrt_spd(h);
  EXPECT_LE(max_abs(s * s - h), 1e-15L);
  EXPECT_LE(max_abs(s - s.transpose()), 1e-18L);
}

TEST(TextFormat, BitExactRoundTrip) {
  std::mt19937_64 rng(12);
  Matrix m = random_matrix(rng, 3, 4);
  m(0, 0) = 1.0L / 3;
  m(1, 1) = -1e-300L;
  m(2, 3) = 0;
  const Matrix back = from_text(to_text(m));
  ASSERT_EQ(back.rows(), 3);
  ASSERT_EQ(back.cols(), 4);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_EQ(back(i, j), m(i, j));
}

TEST(TextFormat, EmptyShapes) {
  const Matrix e(1, 0);
  const Matrix back = from_text(to_text(e));
  EXPECT_EQ(back.rows(), 1);
  EXPECT_EQ(back.cols(), 0);
}

TEST(TextFormat, ParseErrors) {
  EXPECT_THROW(from_text("2 2\n1 2\n3"), ParseError);
  EXPECT_THROW(from_text("1 1\nabc"), ParseError);
  EXPECT_THROW(from_text("1 1\ninf"), ParseError);
  EXPECT_THROW(from_text("x"), ParseError);
  EXPECT_THROW(from_text("-1 2"), ParseError);
  EXPECT_THROW(parse_real("1.5e"), ParseError);
  EXPECT_EQ(parse_real("+2.5"), 2.5L);
}

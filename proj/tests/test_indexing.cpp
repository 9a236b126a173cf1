#include "mvops/indexing.hpp"
#include "mvops/polynomial.hpp"

#include <gtest/gtest.h>

using namespace mvops;

TEST(RankCount, SmallValues) {
  EXPECT_EQ(rank_count(2, 3), 4);
  EXPECT_EQ(rank_count(3, 2), 6);
  EXPECT_EQ(rank_count(1, 7), 1);
  EXPECT_EQ(rank_count(3, 4), 15);
  EXPECT_EQ(space_dim(2, 3), 10);
  EXPECT_THROW(rank_count(0, 1), std::invalid_argument);
}

TEST(RankCount, SumsToSpaceDimension) {
  for (int d = 1; d <= 4; ++d)
    for (int n = 0; n <= 8; ++n) {
      int total = 0;
      for (int k = 0; k <= n; ++k) total += rank_count(d, k);
      EXPECT_EQ(total, space_dim(d, n));
    }
}

TEST(Enumerate, TwoVariablesDescendInFirstExponent) {
  EXPECT_EQ(enumerate_indices(2, 2), (std::vector<MultiIndex>{{2, 0}, {1, 1}, {0, 2}}));
  EXPECT_EQ(enumerate_indices(2, 3), (std::vector<MultiIndex>{{3, 0}, {2, 1}, {1, 2}, {0, 3}}));
  EXPECT_EQ(enumerate_indices(1, 4), (std::vector<MultiIndex>{{4}}));
}

TEST(Enumerate, ThreeVariables) {
  EXPECT_EQ(enumerate_indices(3, 1), (std::vector<MultiIndex>{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}));
  EXPECT_EQ(enumerate_indices(3, 2),
            (std::vector<MultiIndex>{{2, 0, 0}, {1, 1, 0}, {1, 0, 1}, {0, 2, 0}, {0, 1, 1}, {0, 0, 2}}));
  // indices with nu_3 = 0 appear in the two-variable order
  std::vector<MultiIndex> sub;
  for (const auto& nu : enumerate_indices(3, 3))
    if (nu[2] == 0) sub.push_back({nu[0], nu[1]});
  EXPECT_EQ(sub, enumerate_indices(2, 3));
}

TEST(Enumerate, LengthAndDegree) {
  for (int d = 1; d <= 4; ++d)
    for (int n = 0; n <= 6; ++n) {
      const auto idx = enumerate_indices(d, n);
      ASSERT_EQ(static_cast<int>(idx.size()), rank_count(d, n));
      for (const auto& nu : idx) EXPECT_EQ(total_degree(nu), n);
    }
}

TEST(GradedBasis, PositionsRoundTrip) {
  const GradedBasis b(3, 5);
  for (int f = 0; f < b.size(); ++f) {
    const MultiIndex& nu = b.at_flat(f);
    EXPECT_EQ(b.flat_index(nu), f);
    EXPECT_EQ(b.offset(total_degree(nu)) + b.position(nu), f);
  }
}

TEST(ShiftMatrix, TwoVariableDisplays) {
  Matrix l11(2, 3), l12(2, 3);
  l11 << 1, 0, 0, 0, 1, 0;
  l12 << 0, 1, 0, 0, 0, 1;
  EXPECT_EQ(shift_matrix(2, 1, 0), l11);
  EXPECT_EQ(shift_matrix(2, 1, 1), l12);
  const Matrix joint = joint_shift(2, 1);
  EXPECT_EQ(joint.rows(), 4);
  EXPECT_EQ(joint.cols(), 3);
  EXPECT_EQ(numeric_rank(joint), 3);
}

TEST(ShiftMatrix, DefiningIdentityOnMonomials) {
  for (int d = 1; d <= 3; ++d)
    for (int n = 0; n <= 4; ++n)
      for (int i = 0; i < d; ++i) {
        const PolyVec lhs = shift_matrix(d, n, i) * PolyVec::monomials(d, n + 1);
        const PolyVec rhs = PolyVec::monomials(d, n).times_variable(i);
        EXPECT_EQ(lhs.coeffs(), rhs.padded(n + 1).coeffs()) << "d=" << d << " n=" << n << " i=" << i;
      }
}

TEST(ShiftMatrix, OrthonormalRowsAndJointRank) {
  for (int d = 1; d <= 4; ++d)
    for (int n = 0; n <= 8; ++n) {
      for (int i = 0; i < d; ++i) {
        const Matrix l = shift_matrix(d, n, i);
        EXPECT_EQ(l * l.transpose(), Matrix::Identity(rank_count(d, n), rank_count(d, n)));
      }
      EXPECT_EQ(numeric_rank(joint_shift(d, n)), rank_count(d, n + 1));
    }
}

TEST(JointMatrix, Stacks) {
  Matrix a(1, 1), b(1, 1);
  a << 2;
  b << 5;
  Matrix ab(2, 1);
  ab << 2, 5;
  EXPECT_EQ(joint_matrix({a, b}), ab);
  EXPECT_EQ(joint_matrix({a}), a);
  EXPECT_THROW(joint_matrix({Matrix(1, 2), Matrix(1, 3)}), ShapeError);
}

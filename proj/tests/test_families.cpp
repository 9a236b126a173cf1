#include "mvops/families.hpp"
#include "mvops/manifest.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace mvops;

namespace {

Real binom(int n, int k) { return std::tgamma(Real(n + 1)) / (std::tgamma(Real(k + 1)) * std::tgamma(Real(n - k + 1))); }

// (1-t)^a (1+t)^b moments from Beta integrals, no recurrence involved. The
// alternating sum costs a few digits by degree 12, hence 1e-9 below.
MomentFunctional jacobi_by_beta(Real a, Real b) {
  return MomentFunctional(1, "jacobi beta", [a, b](const MultiIndex& al) {
    const int k = al[0];
    Real s = 0;
    for (int j = 0; j <= k; ++j) s += binom(k, j) * std::pow(Real(2), j) * ((k - j) % 2 ? -1 : 1) * beta_fn(a + 1, b + j + 1);
    return std::pow(Real(2), a + b + 1) * s;
  });
}

// Orthonormal p_0..p_N (positive leading coefficient) by Gram–Schmidt.
std::vector<PolyVec> orthonormal_by_gs(const MomentFunctional& u, int N) {
  const auto [p, h] = gram_schmidt_monic(u, N);
  const PolySystem q = orthonormalize(p, h);
  return q.polys();
}

Real eval1(const std::vector<Real>& c, Real t) {
  Real s = 0;
  for (std::size_t k = c.size(); k-- > 0;) s = s * t + c[k];
  return s;
}

}  // namespace

TEST(Jacobi, OrthonormalMatchesGramSchmidt) {
  for (auto [a, b] : std::vector<std::pair<Real, Real>>{{0, 0}, {0.5L, 1}, {-0.5L, 0.5L}}) {
    const auto gs = orthonormal_by_gs(jacobi_by_beta(a, b), 6);
    for (int m = 0; m <= 6; ++m)
      EXPECT_LE(detail::relative_mismatch(univariate(orthonormal_jacobi(m, a, b)), gs[static_cast<std::size_t>(m)]), 1e-9L)
          << "a=" << a << " b=" << b << " m=" << m;
  }
}

TEST(Jacobi, OrthonormalAdjacencyCoefficients) {
  for (auto [a, b] : std::vector<std::pair<Real, Real>>{{0, 0}, {0.5L, -0.5L}, {2, 1}}) {
    const auto p = orthonormal_by_gs(jacobi_by_beta(a, b), 6);
    const auto q = orthonormal_by_gs(jacobi_by_beta(a, b + 1), 6);
    for (int m = 0; m <= 6; ++m) {
      PolyVec rhs = coeff::jacobi_c(m, a, b) * q[static_cast<std::size_t>(m)];
      if (m) rhs = rhs + coeff::jacobi_d(m, a, b) * q[static_cast<std::size_t>(m) - 1];
      EXPECT_LE(detail::relative_mismatch(p[static_cast<std::size_t>(m)], rhs), 1e-9L) << m;
    }
  }
}

TEST(Jacobi, ClassicalValuesAndAdjacency) {
  EXPECT_NEAR(coeff::jacobi_f(1, 0, 0), Real(2) / 3, 1e-18L);
  EXPECT_NEAR(coeff::jacobi_g(1, 0, 0), Real(1) / 3, 1e-18L);
  EXPECT_EQ(coeff::jacobi_f(0, 0.5L, 1), 1);
  EXPECT_EQ(coeff::jacobi_g(0, 0.5L, 1), 0);
  for (auto [a, b] : std::vector<std::pair<Real, Real>>{{0, 0}, {0.5L, 1.5L}, {-0.5L, 0}}) {
    // P_m(1) = (a+1)_m / m!, and P_1 = (a+1) + (a+b+2)(t-1)/2
    for (int m = 0; m <= 6; ++m) EXPECT_NEAR(eval1(classical_jacobi(m, a, b), 1), pochhammer(a + 1, m) / std::tgamma(Real(m + 1)), 1e-14L);
    EXPECT_NEAR(eval1(classical_jacobi(1, a, b), 0.3L), (a + 1) + (a + b + 2) * (0.3L - 1) / 2, 1e-16L);
    for (int m = 1; m <= 6; ++m) {
      const PolyVec lhs = univariate(classical_jacobi(m, a, b));
      const PolyVec rhs = coeff::jacobi_f(m, a, b) * univariate(classical_jacobi(m, a + 1, b)) -
                          coeff::jacobi_g(m, a, b) * univariate(classical_jacobi(m - 1, a + 1, b));
      EXPECT_LE(detail::relative_mismatch(lhs, rhs), 1e-14L) << m;
    }
  }
  EXPECT_THROW(coeff::jacobi_c(0, -1, -1), std::domain_error);
}

TEST(Laguerre, ClassicalPolynomials) {
  const auto l1 = classical_laguerre(1, 0.5L);
  EXPECT_NEAR(l1[0], 1.5L, 1e-18L);
  EXPECT_NEAR(l1[1], -1, 1e-18L);
  // L_m^{(a)} = L_m^{(a+1)} - L_{m-1}^{(a+1)}
  for (int m = 1; m <= 6; ++m) {
    const PolyVec rhs = univariate(classical_laguerre(m, 1.5L)) - univariate(classical_laguerre(m - 1, 1.5L));
    EXPECT_LE(detail::relative_mismatch(univariate(classical_laguerre(m, 0.5L)), rhs), 1e-15L);
  }
}

TEST(Disk, BundlePasses) {
  for (Real mu : manifest::disk_mus()) {
    const DiskAdjacent b = disk_adjacent(mu, 4);
    EXPECT_TRUE(b.report.pass()) << mu;
    EXPECT_EQ(b.pair.ranks.cls, RankClass::Full);
    ASSERT_TRUE(b.pair.lambda.has_value());
    EXPECT_LE(direction_error(*b.pair.lambda, {{-1, 0}, 1}), 1e-12L);
  }
  EXPECT_THROW(disk_adjacent(-1, 3), std::invalid_argument);
}

TEST(Krall, ClosedFormCoefficientsMatchGramSchmidt) {
  for (const auto& p : manifest::krall_cases()) {
    const KrallTensor b = krall_tensor(p, 4);
    EXPECT_TRUE(b.report.pass()) << p.str();
    for (int n = 1; n <= 5; ++n) EXPECT_NEAR(b.a_closed[n], b.a_numeric[n], 1e-9L * std::max<Real>(1, std::abs(b.a_closed[n])));
    EXPECT_EQ(b.a_closed[1], p.a1);
  }
}

TEST(Krall, TensorRelationBlockLayout) {
  Matrix expect(3, 2);
  expect << 2, 0, 0, 1, 0, 0;
  EXPECT_EQ(tensor_relation_block({0, 1, 2}, 2), expect);
}

TEST(Krall, GateRootClosedFormAgreesWithScan) {
  for (const auto& base : manifest::krall_gate_bases())
    for (int n = manifest::kGateMinDegree; n <= manifest::kGateMaxDegree; ++n) {
      const auto root = krall_gate_root(base, n);
      ASSERT_TRUE(root.has_value());
      const auto scan = krall_gate_scan(base, n, manifest::kGateScanLo, manifest::kGateScanHi);
      ASSERT_EQ(scan.size(), 1u) << base.str() << " n=" << n;
      EXPECT_NEAR(scan.front(), *root, 1e-12L);
      KrallParams at = base;
      at.a1 = *root;
      EXPECT_NEAR(krall_gate(at, n), 0, 1e-10L * std::tgamma(Real(n + 2)));
    }
  KrallParams lag;  // alpha = 1/2: Gamma(n)Gamma(3/2)(3/2 - a1) + (a1 - 1)Gamma(n + 1/2) = 0
  EXPECT_NEAR(*krall_gate_root(lag, 3), Real(3) / 7, 1e-15L);
  EXPECT_THROW(krall_gate_root(lag, 1), std::invalid_argument);
}

TEST(Adjacent, LaguerreBlocks) {
  const AdjacentFamily b = laguerre_adjacent({0, 1}, 1, 4);
  EXPECT_TRUE(b.report.pass());
  EXPECT_EQ(b.M_hat[2], Matrix(-shift_matrix(2, 1, 0).transpose()));
  EXPECT_LE(max_abs(b.pair.relation.M_hat[2] + shift_matrix(2, 1, 0).transpose()), 1e-10L);
}

TEST(Adjacent, CubeBothShifts) {
  for (int j = 1; j <= 2; ++j)
    for (bool shift_b : {false, true}) {
      const AdjacentFamily b = cube_adjacent({0, 0.5L}, {0.5L, 0}, j, shift_b, 4);
      EXPECT_TRUE(b.report.pass()) << b.params;
      EXPECT_LE(b.max_residual(), 1e-13L);
    }
  EXPECT_THROW(cube_adjacent({0}, {0, 0}, 1, false, 3), std::invalid_argument);
  EXPECT_THROW(cube_adjacent({0, 0}, {0, 0}, 3, false, 3), std::invalid_argument);
}

// The Jacobi factors are orthonormal for the unnormalized weight on [-1, 1]
// (the convention c_m, d_m are written in), so the product basis is
// orthogonal with a diagonal, not unit, Gram block.
TEST(Adjacent, SimplexBasisIsOrthogonalWithDiagonalGram) {
  for (const auto& kappa : std::vector<std::vector<Real>>{{0.5L, 0.5L, 0.5L}, {0, 1, 0.5L}, {0.5L, 0.5L, 0.5L, 0.5L}}) {
    const MomentFunctional u = simplex_functional(kappa);
    const PolySystem p = simplex_basis(kappa, 4);
    const GramBlocks h = gram_blocks(u, p);
    EXPECT_LE(orthogonality_defect(u, p), 1e-12L);
    for (int n = 0; n <= 4; ++n) {
      EXPECT_LE(max_abs(h[n] - Matrix(h[n].diagonal().asDiagonal())), 1e-12L * max_abs(h[n]));
      EXPECT_GT(h[n].diagonal().minCoeff(), 0);
    }
  }
}

TEST(Adjacent, SimplexFirstDirectionClosedForm) {
  const AdjacentFamily b = simplex_adjacent({0.5L, 0.5L, 0.5L}, 1, 5);
  EXPECT_TRUE(b.report.pass());
  EXPECT_LE(b.max_residual(), 1e-12L);
}

// For j >= 2 the printed a_l of the earlier directions depend on kappa_j,
// so the closed-form blocks do not describe the shifted basis. The pair
// itself is still a full-rank linear relation with lambda = x_j.
TEST(Adjacent, SimplexLaterDirectionsPairStillHolds) {
  const AdjacentFamily b = simplex_adjacent({0.5L, 0.5L, 0.5L}, 2, 5);
  EXPECT_TRUE(b.pair.report.pass());
  ASSERT_TRUE(b.pair.lambda.has_value());
  EXPECT_LE(direction_error(*b.pair.lambda, {{0, 1}, 0}), 1e-10L);
  EXPECT_GT(b.max_residual(), 1e-3L);
}

TEST(Chebyshev, VerdictFollowsRule) {
  for (int kind = 1; kind <= 4; ++kind)
    for (Real rho : {Real(-1), Real(0.5L), Real(1)}) {
      const ChebyshevKoornwinder b = chebyshev_koornwinder(kind, rho, 4);
      EXPECT_EQ(b.verdict(), ChebyshevKoornwinder::rule(kind, rho)) << kind << " " << rho;
      EXPECT_TRUE(b.report.pass()) << kind << " " << rho;
      EXPECT_TRUE(b.aligned);
    }
}

TEST(Chebyshev, ClosedFormQuantities) {
  const ChebyshevKoornwinder k2 = chebyshev_koornwinder(2, 0.5L, 4);
  for (int n = 2; n <= 4; ++n) {
    EXPECT_NEAR(k2.lambda_n[n], 0.5L, 1e-18L);
    EXPECT_NEAR(k2.scalar_condition[n], 0, 1e-18L);
  }
  const ChebyshevKoornwinder k1 = chebyshev_koornwinder(1, 2, 4);
  EXPECT_NEAR(k1.scalar_condition[2], 0.5L - 1 / std::sqrt(Real(2)), 1e-18L);
  EXPECT_FALSE(k1.verdict());
}

TEST(Chebyshev, KindThreeAtRhoOneLosesRankAtDegreeOne) {
  const ChebyshevKoornwinder b = chebyshev_koornwinder(3, 1, 3);
  int failed = 0;
  for (const auto& r : b.theorem4.report.records)
    if (r.degree == 1 && r.name.rfind("rank", 0) == 0) {
      EXPECT_FALSE(r.pass) << r.name;
      EXPECT_EQ(*r.rank, 0);
      ++failed;
    }
  EXPECT_EQ(failed, 3);
  EXPECT_THROW(chebyshev_koornwinder(5, 0, 3), std::invalid_argument);
}

TEST(Chebyshev, SignAlignment) {
  Matrix e(2, 2), g(2, 2);
  e << 1, 2, 0, 3;
  g << -1, 2, 0, -3;  // row 2 and column 1 flipped
  EXPECT_EQ(sign_aligned_residual(g, e, 1e-12L), 0);
  e << 1, 2, 3, 4;
  g << 1, 2, 3, -4;  // no pair of sign diagonals reaches this
  EXPECT_GT(sign_aligned_residual(g, e, 1e-12L), 0.5L);
}

TEST(Registry, NamesAndErrors) {
  for (const char* name : {"disk", "cheb-koornwinder", "koornwinder-chebyshev", "krall-laguerre", "krall-jacobi", "simplex",
                           "cube", "multi-laguerre"})
    EXPECT_NO_THROW(find_family(name));
  EXPECT_THROW(find_family("sphere"), ParseError);
  const FamilyReport r = run_family(parse_family_spec("cube:a=0,0,b=0,0,j=2,shift=1"), 3);
  EXPECT_TRUE(r.pass());
  EXPECT_EQ(r.family, "cube");
  const FamilyReport c = run_family(parse_family_spec("cheb-koornwinder:kind=3,rho=1"), 3);
  EXPECT_FALSE(c.pass());
  EXPECT_TRUE(c.as_expected());
}

TEST(Registry, SpecParsing) {
  const FamilySpec s = parse_family_spec("simplex:k=0.5,1,2,j=2");
  EXPECT_EQ(s.list("k"), (std::vector<Real>{0.5L, 1, 2}));
  EXPECT_EQ(s.integer("j", 1), 2);
  EXPECT_EQ(parse_family_spec("disk").params.size(), 0u);
  EXPECT_THROW(parse_family_spec(":mu=1"), ParseError);
  EXPECT_THROW(parse_family_spec("disk:mu=1,,"), ParseError);
  EXPECT_THROW(parse_family_spec("disk:1"), ParseError);
  EXPECT_THROW(parse_family_spec("disk:mu=1,mu=2"), ParseError);
  EXPECT_THROW(parse_family_spec("disk:mu=x"), ParseError);
  EXPECT_THROW(parse_family_spec("simplex:j=1.5").integer("j", 1), ParseError);
  EXPECT_THROW(parse_family_spec("simplex:k=1,2").scalar("k"), ParseError);
}

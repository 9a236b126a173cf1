#include "mvops/catalog.hpp"
#include "mvops/moments.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace mvops;

namespace {

constexpr Real kPi = std::numbers::pi_v<Real>;

Real binom(int n, int k) { return std::tgamma(Real(n + 1)) / (std::tgamma(Real(k + 1)) * std::tgamma(Real(n - k + 1))); }

// int_{-1}^{1} (1-t)^a (1+t)^b t^k dt by expanding t = 2s - 1 into Beta integrals.
// The alternating sum loses a few digits, hence the looser tolerance below.
Real jacobi_moment_beta(Real a, Real b, int k) {
  Real s = 0;
  for (int j = 0; j <= k; ++j)
    s += binom(k, j) * std::pow(Real(2), j) * ((k - j) % 2 ? -1 : 1) * beta_fn(a + 1, b + j + 1);
  return std::pow(Real(2), a + b + 1) * s;
}

std::vector<MultiIndex> indices_up_to(int d, int n) { return flat_indices(d, n); }

}  // namespace

TEST(Functional, RejectsWrongLengthAndNonFinite) {
  const MomentFunctional u = disk_functional(0);
  EXPECT_THROW(u.moment({1}), std::invalid_argument);
  const MomentFunctional bad(1, "bad", [](const MultiIndex&) { return std::nan(""); });
  EXPECT_THROW(bad.moment({0}), std::domain_error);
}

TEST(Functional, CopiesShareMemo) {
  int calls = 0;
  const MomentFunctional u(1, "count", [&calls](const MultiIndex& a) {
    ++calls;
    return Real(a[0]);
  });
  const MomentFunctional w = u;
  EXPECT_EQ(u.moment({3}), 3);
  EXPECT_EQ(w.moment({3}), 3);
  EXPECT_EQ(calls, 1);
}

TEST(Jacobi, QuadratureMatchesBetaIntegrals) {
  for (auto [a, b] : std::vector<std::pair<Real, Real>>{{0, 0}, {0.5L, -0.5L}, {1, 2}, {-0.5L, -0.5L}, {1.5L, 0}}) {
    const MomentFunctional u = jacobi_functional(a, b);
    for (int k = 0; k <= 12; ++k)
      EXPECT_NEAR(u.moment({k}), jacobi_moment_beta(a, b, k), 1e-11L * (1 + std::abs(jacobi_moment_beta(a, b, 0))))
          << "a=" << a << " b=" << b << " k=" << k;
  }
  EXPECT_NEAR(jacobi_functional(0, 0).moment({2}), Real(2) / 3, 1e-16L);
}

TEST(Chebyshev, NormalizedMomentsClosedForms) {
  const MomentFunctional t = chebyshev_functional(1), u = chebyshev_functional(2);
  for (int m = 0; m <= 6; ++m) {
    EXPECT_NEAR(t.moment({2 * m}), binom(2 * m, m) / std::pow(Real(4), m), 1e-15L);
    EXPECT_NEAR(u.moment({2 * m}), binom(2 * m, m) / (m + 1) / std::pow(Real(4), m), 1e-15L);
    EXPECT_NEAR(t.moment({2 * m + 1}), 0, 1e-15L);
  }
  for (int kind : {3, 4}) {
    const auto [a, b] = chebyshev_jacobi_params(kind);
    const MomentFunctional w = chebyshev_functional(kind);
    for (int k = 0; k <= 8; ++k)
      EXPECT_NEAR(w.moment({k}), jacobi_moment_beta(a, b, k) / jacobi_moment_beta(a, b, 0), 1e-11L);
  }
}

TEST(Laguerre, GammaMomentsAndQuadrature) {
  for (Real alpha : {Real(0), Real(0.5L), Real(2)}) {
    const MomentFunctional u = laguerre_functional(alpha);
    EXPECT_NEAR(u.moment({1}), std::tgamma(alpha + 2), 1e-15L);
    for (int m = 0; m <= 8; ++m) {
      const Real exact = std::tgamma(m + alpha + 1);
      EXPECT_LE(std::abs(laguerre_moment_quadrature(alpha, m) - exact), 1e-10L * exact) << m;
    }
  }
  EXPECT_THROW(laguerre_functional(-1), std::invalid_argument);
}

TEST(Algebra, LeftMultiplyByLinearPolynomial) {
  const MomentFunctional u = disk_functional(0.5L);
  const MomentFunctional w = left_multiply(LinearPoly{{-1, 0}, 1}, u);  // (1 - x) u
  for (const auto& a : indices_up_to(2, 6)) {
    MultiIndex ax = a;
    ++ax[0];
    EXPECT_NEAR(w.moment(a), u.moment(a) - u.moment(ax), 1e-17L);
    EXPECT_NEAR(w.moment(a), disk_moment_quadrature(0.5L, a) - disk_moment_quadrature(0.5L, ax), 1e-12L);
  }
  EXPECT_THROW(left_multiply(PolyVec::monomials(2, 1), u), ShapeError);
}

TEST(Algebra, TensorMultipliesMoments) {
  const MomentFunctional m = multi_laguerre_functional({0, 1});
  for (const auto& a : indices_up_to(2, 6))
    EXPECT_NEAR(m.moment(a), std::tgamma(Real(a[0] + 1)) * std::tgamma(Real(a[1] + 2)), 1e-12L * m.moment(a));
  const MomentFunctional p = product_chebyshev_functional(2, 2);
  for (const auto& a : indices_up_to(2, 6)) EXPECT_EQ(p.moment(a), p.moment({a[1], a[0]}));
  EXPECT_NEAR(p.moment({2, 2}), Real(1) / 16, 1e-16L);
}

TEST(Algebra, DividedDifferenceAndPointMass) {
  const MomentFunctional u = laguerre_functional(0);
  const MomentFunctional q = divided_difference(u, 0);
  for (int m = 1; m <= 6; ++m) EXPECT_NEAR(q.moment({m}), u.moment({m - 1}), 1e-15L);
  EXPECT_EQ(q.moment({0}), 0);
  const MomentFunctional delta = point_mass(2, 3);
  EXPECT_EQ(delta.moment({3}), 24);
}

TEST(KrallLaguerre, DefiningProperties) {
  for (auto [alpha, a1] : std::vector<std::pair<Real, Real>>{{0.5L, 2}, {0, 2}, {1, -1}}) {
    const MomentFunctional v = krall_laguerre_functional(alpha, a1);
    const MomentFunctional u = laguerre_functional(alpha);
    EXPECT_NEAR(v.moment({0}), std::tgamma(alpha + 1) / (alpha + 1 - a1), 1e-15L);
    for (int m = 1; m <= 10; ++m) EXPECT_NEAR(v.moment({m}), std::tgamma(m + alpha), 1e-12L * std::tgamma(m + alpha));
    const MomentFunctional xv = left_multiply(PolyVec::linear({1}, 0), v);
    for (int m = 0; m <= 10; ++m) EXPECT_NEAR(xv.moment({m}), u.moment({m}), 1e-12L * u.moment({m}));
  }
  EXPECT_THROW(krall_laguerre_functional(0.5L, 0), std::invalid_argument);
  EXPECT_THROW(krall_laguerre_functional(0.5L, 1.5L), std::invalid_argument);
}

TEST(KrallJacobi, DefiningProperties) {
  for (auto [alpha, beta, a1] : std::vector<std::tuple<Real, Real, Real>>{{0.5L, 0, 1}, {0, 0.5L, 1}, {1, 1, -0.5L}}) {
    const MomentFunctional v = krall_jacobi_functional(alpha, beta, a1);
    const MomentFunctional u = jacobi_functional(alpha, beta);
    const Real s0 = jacobi_moment_beta(alpha, beta, 0), s1 = jacobi_moment_beta(alpha, beta, 1);
    const Real mass = s0 * (alpha + beta + 2) / (2 * (alpha + 1) + a1 * (alpha + beta + 2));
    EXPECT_NEAR(v.moment({0}), mass, 1e-14L);
    EXPECT_NEAR(v.moment({2}), mass - (s0 + s1), 1e-14L);
    const MomentFunctional w = left_multiply(PolyVec::linear({-1}, 1), v);
    for (int m = 0; m <= 10; ++m) EXPECT_NEAR(w.moment({m}), u.moment({m}), 1e-14L);
  }
}

TEST(Simplex, UniformTriangleMoments) {
  const MomentFunctional s = simplex_functional({0.5L, 0.5L, 0.5L});
  EXPECT_NEAR(s.moment({0, 0}), 1, 1e-18L);
  EXPECT_NEAR(s.moment({1, 0}), Real(1) / 3, 1e-18L);
  EXPECT_NEAR(s.moment({1, 1}), Real(1) / 12, 1e-18L);
  EXPECT_NEAR(s.moment({2, 0}), Real(1) / 6, 1e-18L);
  EXPECT_THROW(simplex_functional({0.5L}), std::invalid_argument);
  EXPECT_THROW(simplex_functional({0.5L, -0.6L}), std::invalid_argument);
}

TEST(Disk, UnnormalizedAndNormalized) {
  const MomentFunctional raw = disk_functional(0, false);
  EXPECT_NEAR(raw.moment({0, 0}), kPi, 1e-17L);
  EXPECT_NEAR(raw.moment({2, 0}), kPi / 4, 1e-17L);
  EXPECT_NEAR(raw.moment({2, 2}), kPi / 24, 1e-17L);
  const MomentFunctional u = disk_functional(1.5L);
  EXPECT_NEAR(u.moment({0, 0}), 1, 1e-18L);
  EXPECT_EQ(u.moment({1, 2}), 0);
  // E[x^2] = 1/(2(mu+2)) for the normalized disk weight
  EXPECT_NEAR(u.moment({2, 0}), 1 / (2 * 3.5L), 1e-17L);
}

TEST(KoornwinderChebyshev, LowMoments) {
  const MomentFunctional u = koornwinder_chebyshev_functional(1);
  EXPECT_NEAR(u.moment({0, 0}), 1, 1e-17L);
  EXPECT_NEAR(u.moment({1, 0}), 0, 1e-17L);
  EXPECT_NEAR(u.moment({2, 0}), 1, 1e-17L);   // 2 E[x^2]
  EXPECT_NEAR(u.moment({0, 2}), 0.25L, 1e-17L);  // E[x^2]^2
  EXPECT_NEAR(u.moment({2, 1}), 0.5L, 1e-17L);  // 2 E[x^2]^2
}

TEST(ClosedFormVsQuadrature, AllMultiIndicesUpToEight) {
  const int n = 8;
  for (const auto& kappa : std::vector<std::vector<Real>>{{0.5L, 0.5L, 0.5L}, {0, 1, 2.5L}, {0.5L, 0.5L, 0.5L, 0.5L}}) {
    const MomentFunctional s = simplex_functional(kappa);
    const int d = static_cast<int>(kappa.size()) - 1;
    for (const auto& a : indices_up_to(d, n)) EXPECT_NEAR(s.moment(a), simplex_moment_quadrature(kappa, a), 1e-10L);
  }
  for (Real mu : {Real(0), Real(1.5L), Real(-0.5L)}) {
    const MomentFunctional u = disk_functional(mu);
    for (const auto& a : indices_up_to(2, n)) EXPECT_NEAR(u.moment(a), disk_moment_quadrature(mu, a), 1e-10L);
  }
}

TEST(Catalog, BuiltinsByName) {
  EXPECT_EQ(builtin("disk:mu=1.5").moment({2, 0}), disk_functional(1.5L).moment({2, 0}));
  EXPECT_EQ(builtin("simplex:k=0.5,0.5,0.5").dim(), 2);
  EXPECT_EQ(builtin("cube:a=0,0,b=1,1").dim(), 2);
  EXPECT_THROW(builtin("nope"), ParseError);
  EXPECT_THROW(builtin("disk"), ParseError);
}

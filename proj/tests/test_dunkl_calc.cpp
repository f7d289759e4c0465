#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dunkl/dunkl_ops.hpp"
#include "dunkl/scalar_field.hpp"
#include "test_util.hpp"

using namespace dunkl;
using dunkl::testing::random_point;
using dunkl::testing::random_poly;
using dunkl::testing::var;

namespace {

Polynomial x1() { return var(1, 0); }

Vector vec1(double a) { return Vector::Constant(1, a); }

std::vector<RootSystem> systems() {
  return {build_rank_one(1.5), build_type_a(3, 1.0), build_type_b(2, 1.0, 1.0), build_type_b(2, 0.5, 2.0)};
}

}  // namespace

TEST(DunklPoly, RankOneOnX) {
  for (double k : {0.0, 1.0, 2.5}) {
    const RootSystem rs = build_rank_one(k);
    EXPECT_EQ(apply_T_poly(rs, 0, x1()), Polynomial::constant(1, Rational(1) + 2 * *rationalize(k)));
  }
}

TEST(DunklPoly, RankOneOnXSquared) {
  const RootSystem rs = build_rank_one(1.0);
  EXPECT_EQ(apply_T_poly(rs, 0, x1() * x1()), Rational(2) * x1());
}

TEST(DunklPoly, TrivialMultiplicityIsPartialDerivative) {
  std::mt19937_64 rng(10);
  const RootSystem rs = build_type_a(3, 0.0);
  for (int t = 0; t < 20; ++t) {
    const Polynomial p = random_poly(rng, 3, 5);
    for (int i = 0; i < 3; ++i) EXPECT_EQ(apply_T_poly(rs, i, p), p.derivative(i));
  }
}

TEST(DunklPoly, LowersDegreeOfHomogeneous) {
  std::mt19937_64 rng(11);
  const RootSystem rs = build_type_b(2, 1.0, 2.0);
  for (int t = 0; t < 20; ++t) {
    Polynomial p(2);
    for (int a = 0; a <= 4; ++a) p.add_term({a, 4 - a}, Rational(static_cast<int>(rng() % 7) - 3));
    for (int i = 0; i < 2; ++i) {
      const Polynomial q = apply_T_poly(rs, i, p);
      EXPECT_TRUE(q.is_zero() || (q.is_homogeneous() && q.degree() == 3));
    }
  }
}

TEST(DunklPoly, OperatorsCommute) {
  std::mt19937_64 rng(12);
  for (const auto& rs : systems()) {
    if (rs.dim() < 2) continue;
    for (int t = 0; t < 5; ++t) {
      const Polynomial p = random_poly(rng, rs.dim(), 5);
      EXPECT_EQ(apply_T_poly(rs, 0, apply_T_poly(rs, 1, p)), apply_T_poly(rs, 1, apply_T_poly(rs, 0, p)));
    }
  }
}

TEST(DunklNumeric, RankOneSquareAtHalf) {
  const RootSystem rs = build_rank_one(1.0);
  const ScalarField f = field_from_polynomial(x1() * x1());
  EXPECT_NEAR(apply_T_numeric(rs, 0, f, vec1(0.5)), 1.0, 1e-12);
}

TEST(DunklNumeric, InvariantFieldReducesToPartial) {
  const RootSystem rs = build_type_a(3, 1.0);
  const Polynomial r2 = var(3, 0) * var(3, 0) + var(3, 1) * var(3, 1) + var(3, 2) * var(3, 2);
  const ScalarField f = field_from_polynomial(r2);
  std::mt19937_64 rng(13);
  for (int t = 0; t < 20; ++t) {
    const Vector x = random_point(rng, 3);
    EXPECT_LT((dunkl_gradient(rs, f, x) - 2.0 * x).norm(), 1e-9);
  }
}

TEST(DunklNumeric, WallBranchMatchesPolynomial) {
  const RootSystem rs = build_rank_one(1.0);
  const Polynomial cube = x1() * x1() * x1();
  const ScalarField f = field_from_polynomial(cube);
  const Polynomial exact = apply_T_poly(rs, 0, cube);
  EXPECT_NEAR(apply_T_numeric(rs, 0, f, vec1(0.0)), exact.evaluate(vec1(0.0)), 1e-7);
  const RootSystem a2 = build_type_a(3, 1.0);
  const Polynomial p = var(3, 0) * var(3, 0) * var(3, 1) - Rational(2) * var(3, 2);
  Vector x(3);
  x << 1.0, 1.0, -0.5;
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(apply_T_numeric(a2, i, field_from_polynomial(p), x), apply_T_poly(a2, i, p).evaluate(x), 1e-6);
  }
}

TEST(DunklNumeric, MatchesExactOnRandomPoints) {
  std::mt19937_64 rng(14);
  for (const auto& rs : systems()) {
    const Polynomial p = random_poly(rng, rs.dim(), 5, 8);
    const ScalarField f = field_from_polynomial(p);
    const std::vector<Polynomial> g = dunkl_gradient(rs, p);
    for (int t = 0; t < 100; ++t) {
      const Vector x = random_point(rng, rs.dim());
      const Vector num = dunkl_gradient(rs, f, x);
      for (int i = 0; i < rs.dim(); ++i) {
        const double e = g[static_cast<std::size_t>(i)].evaluate(x);
        EXPECT_NEAR(num(i), e, 1e-8 * (1.0 + std::abs(e)));
      }
    }
  }
}

TEST(DunklLaplacian, RankOneSquare) {
  for (double k : {0.0, 1.0, 2.5}) {
    const RootSystem rs = build_rank_one(k);
    const Polynomial l = dunkl_laplacian_poly(rs, x1() * x1(), LaplacianMethod::formula);
    EXPECT_EQ(l, Polynomial::constant(1, Rational(2) + 4 * *rationalize(k)));
  }
}

TEST(DunklLaplacian, ClassicalOnSquaredNorm) {
  const RootSystem rs = build_type_a(3, 0.0);
  const Polynomial r2 = var(3, 0) * var(3, 0) + var(3, 1) * var(3, 1) + var(3, 2) * var(3, 2);
  EXPECT_EQ(dunkl_laplacian_poly(rs, r2, LaplacianMethod::sum_of_squares), Polynomial::constant(3, Rational(6)));
}

TEST(DunklLaplacian, TwoWayAgreementExact) {
  std::mt19937_64 rng(15);
  for (const auto& rs : systems()) {
    for (int t = 0; t < 10; ++t) {
      const Polynomial p = random_poly(rng, rs.dim(), 5);
      EXPECT_EQ(dunkl_laplacian_poly(rs, p, LaplacianMethod::sum_of_squares), dunkl_laplacian_poly(rs, p, LaplacianMethod::formula));
    }
  }
}

TEST(DunklLaplacian, NormFieldIdentity) {
  std::mt19937_64 rng(16);
  const ScalarField f = norm_field();
  for (const auto& rs : {build_type_a(3, 1.0), build_type_b(2, 1.0, 1.0), build_rank_one(2.0)}) {
    for (int t = 0; t < 100; ++t) {
      const Vector x = random_point(rng, rs.dim());
      const double expected = (rs.homogeneous_dim() - 1.0) / x.norm();
      EXPECT_NEAR(dunkl_laplacian(rs, f, x), expected, 1e-8 * std::abs(expected));
    }
  }
}

TEST(Leibniz, RankOneXTimesX) {
  const RootSystem rs = build_rank_one(1.0);
  EXPECT_EQ(leibniz_rhs_poly(rs, 0, x1(), x1()), apply_T_poly(rs, 0, x1() * x1()));
  EXPECT_EQ(apply_T_poly(rs, 0, x1() * x1()), Rational(2) * x1());
}

TEST(Leibniz, ExactOnRandomPairs) {
  std::mt19937_64 rng(17);
  for (const auto& rs : systems()) {
    for (int t = 0; t < 10; ++t) {
      const Polynomial f = random_poly(rng, rs.dim(), 4), g = random_poly(rng, rs.dim(), 4);
      for (int i = 0; i < rs.dim(); ++i) EXPECT_EQ(leibniz_rhs_poly(rs, i, f, g), apply_T_poly(rs, i, f * g));
    }
  }
}

TEST(Leibniz, InvariantFactorGivesProductRule) {
  std::mt19937_64 rng(18);
  const RootSystem rs = build_type_b(2, 1.0, 2.0);
  const Polynomial inv = var(2, 0) * var(2, 0) + var(2, 1) * var(2, 1) + Polynomial::constant(2, Rational(3));
  for (int t = 0; t < 10; ++t) {
    const Polynomial f = random_poly(rng, 2, 4);
    for (int i = 0; i < 2; ++i) {
      EXPECT_EQ(apply_T_poly(rs, i, f * inv), apply_T_poly(rs, i, f) * inv + f * inv.derivative(i));
    }
  }
}

TEST(Leibniz, TrivialMultiplicityIsClassical) {
  std::mt19937_64 rng(19);
  const RootSystem rs = build_type_a(3, 0.0);
  const Polynomial f = random_poly(rng, 3, 4), g = random_poly(rng, 3, 4);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(leibniz_rhs_poly(rs, i, f, g), f.derivative(i) * g + f * g.derivative(i));
}

TEST(Leibniz, NumericMatchesExact) {
  std::mt19937_64 rng(20);
  const RootSystem rs = build_type_a(3, 1.0);
  const Polynomial f = random_poly(rng, 3, 3), g = random_poly(rng, 3, 3);
  const ScalarField ff = field_from_polynomial(f), gg = field_from_polynomial(g);
  for (int t = 0; t < 20; ++t) {
    const Vector x = random_point(rng, 3);
    const double e = apply_T_poly(rs, 1, f * g).evaluate(x);
    EXPECT_NEAR(leibniz_rhs(rs, 1, ff, gg, x), e, 1e-7 * (1.0 + std::abs(e)));
  }
}

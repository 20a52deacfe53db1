#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "twoac/polynomial.hpp"

using namespace twoac;

namespace {

bool contains_near(const std::vector<double>& xs, double x, double rel) {
  for (double v : xs)
    if (std::abs(v - x) <= rel * std::abs(x)) return true;
  return false;
}

// Leibniz expansion of a 3x3 determinant with exact polynomial products.
UnivariatePolynomial symbolic_det3(const MatrixPolynomial<3>& M) {
  auto c = [&](int r, int col) { return M.cell(r, col); };
  return c(0, 0) * (c(1, 1) * c(2, 2) - c(1, 2) * c(2, 1)) - c(0, 1) * (c(1, 0) * c(2, 2) - c(1, 2) * c(2, 0)) +
         c(0, 2) * (c(1, 0) * c(2, 1) - c(1, 1) * c(2, 0));
}

}  // namespace

TEST(UnivariatePolynomial, DegreeIgnoresNegligibleTail) {
  EXPECT_EQ(UnivariatePolynomial({1.0, 2.0, 1e-13}).degree(), 1);
  EXPECT_EQ(UnivariatePolynomial({1.0, 2.0, 1e-11}).degree(), 2);
  EXPECT_EQ(UnivariatePolynomial({0.0, 0.0}).degree(), -1);
  EXPECT_EQ(UnivariatePolynomial({}).size(), 1u);
}

TEST(UnivariatePolynomial, EvaluationAndCalculus) {
  const UnivariatePolynomial p{1.0, -3.0, 0.0, 2.0};  // 2x^3 - 3x + 1
  EXPECT_DOUBLE_EQ(p(2.0), 11.0);
  EXPECT_DOUBLE_EQ(p.derivative()(2.0), 21.0);
  EXPECT_DOUBLE_EQ(p.scaled(2.0)(1.0), p(2.0));
  EXPECT_EQ(p.truncated(1).size(), 2u);

  const UnivariatePolynomial q{-1.0, 1.0};
  EXPECT_DOUBLE_EQ((p * q)(3.0), p(3.0) * q(3.0));
  EXPECT_DOUBLE_EQ((p + q)(3.0), p(3.0) + q(3.0));
  EXPECT_DOUBLE_EQ((p - q)(3.0), p(3.0) - q(3.0));
}

// The 10x10 case runs in long double, as the solver does: the Chebyshev to
// monomial change of basis at degree 20 amplifies rounding by about 1e7.
TEST(DetPoly, ScaledIdentityGivesPower) {
  MatrixPolynomial<10, long double> M;
  M.linear.setIdentity();
  const UnivariatePolynomial p = det_poly(M);
  EXPECT_EQ(p.degree(), 10);
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(p[i], i == 10 ? 1.0 : 0.0, 1e-11) << "degree " << i;
}

TEST(DetPoly, ConstantIdentityGivesOne) {
  MatrixPolynomial<10, long double> M;
  M.constant.setIdentity();
  const UnivariatePolynomial p = det_poly(M);
  EXPECT_EQ(p.degree(), 0);
  EXPECT_NEAR(p[0], 1.0, 1e-13);
}

TEST(DetPoly, DoublePrecisionNoiseIsBounded) {
  MatrixPolynomial<10> M;
  M.linear.setIdentity();
  const UnivariatePolynomial p = det_poly(M);
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(p[i], i == 10 ? 1.0 : 0.0, 1e-7) << "degree " << i;
}

TEST(DetPoly, MatchesSymbolicExpansionOnRandom3x3) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    MatrixPolynomial<3> M;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) {
        M.constant(r, c) = u(rng);
        M.linear(r, c) = u(rng);
        M.quadratic(r, c) = u(rng);
      }
    const UnivariatePolynomial expected = symbolic_det3(M);
    const UnivariatePolynomial got = det_poly(M);
    ASSERT_EQ(got.size(), 7u);
    for (std::size_t i = 0; i < 7; ++i) {
      EXPECT_LE(std::abs(got[i] - expected[i]), 1e-10 * std::abs(expected[i]) + 1e-14) << "trial " << trial;
    }
  }
}

TEST(DetPoly, RadiusDoesNotChangeThePolynomial) {
  MatrixPolynomial<3> M;
  M.constant << 2, 0, 1, 0, 1, 0, 1, 0, 3;
  M.linear << 0, 1, 0, 1, 0, 0, 0, 0, 1;
  M.quadratic << 1, 0, 0, 0, 0, 1, 0, 1, 0;
  const UnivariatePolynomial a = det_poly(M, 1.0);
  const UnivariatePolynomial b = det_poly(M, 7.5);
  for (std::size_t i = 0; i < 7; ++i) EXPECT_NEAR(a[i], b[i], 1e-10 * a.max_abs_coefficient());
}

TEST(DetPoly, ExtendedPrecisionAgreesWithDouble) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MatrixPolynomial<4> Md;
  MatrixPolynomial<4, long double> Ml;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      Ml.constant(r, c) = Md.constant(r, c) = u(rng);
      Ml.linear(r, c) = Md.linear(r, c) = u(rng);
      Ml.quadratic(r, c) = Md.quadratic(r, c) = u(rng);
    }
  const UnivariatePolynomial a = det_poly(Md);
  const UnivariatePolynomial b = det_poly(Ml);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_NEAR(a[i], b[i], 1e-12 * a.max_abs_coefficient());
}

TEST(DetPoly, RejectsBadRadius) {
  MatrixPolynomial<3> M;
  EXPECT_THROW(det_poly(M, 0.0), Error);
  EXPECT_THROW(det_poly(M, -1.0), Error);
}

TEST(InterpolateChebyshev, NonFiniteSamplesAreIllConditioned) {
  auto nan_sampler = [](double t) { return t > 0 ? std::numeric_limits<double>::quiet_NaN() : 1.0; };
  try {
    interpolate_chebyshev<double>(nan_sampler, 4, 1.0);
    FAIL() << "expected InterpolationIllConditioned";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InterpolationIllConditioned);
  }
}

TEST(InterpolateChebyshev, CoefficientOverflowIsIllConditioned) {
  auto cubic = [](double t) { return t * t * t; };
  try {
    interpolate_chebyshev<double>(cubic, 20, 1e-300);
    FAIL() << "expected InterpolationIllConditioned";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InterpolationIllConditioned);
  }
}

TEST(InterpolateChebyshev, ReproducesKnownPolynomial) {
  const UnivariatePolynomial p{0.5, -1.0, 0.0, 3.0, 0.25};
  const UnivariatePolynomial got = interpolate_chebyshev<double>([&](double t) { return p(t); }, 6, 2.0);
  for (std::size_t i = 0; i < 7; ++i) EXPECT_NEAR(got[i], p[i], 1e-13);
}

TEST(RealPositiveRoots, DiscardsNegativeRoot) {
  const std::vector<double> r = real_positive_roots(UnivariatePolynomial{-1.0, 0.0, 1.0});
  ASSERT_EQ(r.size(), 1u);
  EXPECT_NEAR(r[0], 1.0, 1e-14);
}

TEST(RealPositiveRoots, DiscardsComplexPair) {
  // (t - 4)(t^2 + 1) = t^3 - 4t^2 + t - 4
  const std::vector<double> r = real_positive_roots(UnivariatePolynomial{-4.0, 1.0, -4.0, 1.0});
  ASSERT_EQ(r.size(), 1u);
  EXPECT_NEAR(r[0], 4.0, 1e-13);
}

TEST(RealPositiveRoots, ZeroPolynomialThrows) {
  try {
    real_positive_roots(UnivariatePolynomial{0.0, 0.0, 0.0});
    FAIL() << "expected ZeroPolynomial";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroPolynomial);
  }
}

TEST(RealPositiveRoots, ConstantHasNoRoots) { EXPECT_TRUE(real_positive_roots(UnivariatePolynomial{3.0}).empty()); }

TEST(RealPositiveRoots, SortedAndDeduplicated) {
  // (t - 1)^2 (t - 2)(t - 3)
  const UnivariatePolynomial p = UnivariatePolynomial{-1.0, 1.0} * UnivariatePolynomial{-1.0, 1.0} *
                                 UnivariatePolynomial{-2.0, 1.0} * UnivariatePolynomial{-3.0, 1.0};
  const std::vector<double> r = real_positive_roots(p);
  ASSERT_GE(r.size(), 2u);
  EXPECT_TRUE(std::is_sorted(r.begin(), r.end()));
  EXPECT_TRUE(contains_near(r, 2.0, 1e-10));
  EXPECT_TRUE(contains_near(r, 3.0, 1e-10));
  for (std::size_t i = 1; i < r.size(); ++i) EXPECT_GT(r[i] - r[i - 1], 1e-9 * r[i]);
}

TEST(RealPositiveRoots, ResidualBoundOnRandomPolynomials) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> c(16);
    for (double& x : c) x = u(rng);
    const UnivariatePolynomial p(c);
    const int deg = p.degree();
    for (double r : real_positive_roots(p)) {
      EXPECT_GT(r, 0.0);
      EXPECT_LE(std::abs(p(r)), 1e-6 * p.max_abs_coefficient() * std::pow(1.0 + r, deg)) << "trial " << trial;
    }
  }
}

// Small roots next to a leading coefficient at the rounding floor: an
// unbalanced companion matrix loses them.
TEST(RealPositiveRoots, SmallRootsSurviveTinyLeadingCoefficient) {
  UnivariatePolynomial p = UnivariatePolynomial{-0.05, 1.0} * UnivariatePolynomial{-0.07, 1.0} *
                           UnivariatePolynomial{-0.3, 1.0};
  std::vector<double> c = p.coefficients();
  c.resize(10, 0.0);
  c[9] = 2e-12;
  const std::vector<double> r = real_positive_roots(UnivariatePolynomial(c));
  EXPECT_TRUE(contains_near(r, 0.05, 1e-6));
  EXPECT_TRUE(contains_near(r, 0.07, 1e-6));
  EXPECT_TRUE(contains_near(r, 0.3, 1e-6));
}

#include <gtest/gtest.h>

#include <random>

#include "hsv/pfaffian.hpp"

using namespace hsv;
using Q = Rational;

namespace {

Matrix<Q> random_skew(std::mt19937_64& rng, int n) {
  return skew_from<Q>(n, [&](int, int) { return random_rational(rng, 19); });
}

}  // namespace

TEST(Pfaffian, SmallOrders) {
  const Q a(3, 7);
  EXPECT_EQ(pfaffian(skew_from<Q>(2, [&](int, int) { return a; })), a);
  const Q e[4][4] = {{0, 2, -3, 5}, {0, 0, 7, Q(1, 2)}, {0, 0, 0, 11}, {0, 0, 0, 0}};
  const auto m = skew_from<Q>(4, [&](int i, int j) { return e[i][j]; });
  EXPECT_EQ(pfaffian(m), e[0][1] * e[2][3] - e[0][2] * e[1][3] + e[0][3] * e[1][2]);
  EXPECT_EQ(pfaffian(Matrix<Q>(0, 0)), Q(1));
  std::mt19937_64 rng(1);
  EXPECT_EQ(pfaffian(random_skew(rng, 5)), Q(0));
}

// Integer matrix; reference det and Pf from an independent symbolic evaluation.
TEST(Pfaffian, FrozenSixBySix) {
  const int vals[15] = {3, -1, 4, 1, -5, 9, 2, -6, 5, 3, 5, -8, 9, 7, -9};
  int k = 0;
  Matrix<Q> m(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = i + 1; j < 6; ++j) {
      m(i, j) = Q(vals[k]);
      m(j, i) = Q(-vals[k]);
      ++k;
    }
  EXPECT_EQ(pfaffian(m), Q(-1108));
  EXPECT_EQ(determinant(m), Q(1227664));
}

TEST(Pfaffian, SquareIsDeterminant) {
  std::mt19937_64 rng(2);
  for (int n = 1; n <= 10; ++n)
    for (int t = 0; t < 3; ++t) {
      const auto m = random_skew(rng, n);
      const Q pf = pfaffian(m);
      EXPECT_EQ(pf * pf, determinant(m)) << "order " << n;
    }
}

TEST(Pfaffian, EliminationBeyondMemoOrder) {
  std::mt19937_64 rng(3);
  const auto m = random_skew(rng, 14);
  const Q pf = pfaffian(m);
  EXPECT_EQ(pf * pf, determinant(m));
}

TEST(Pfaffian, SwapNegates) {
  std::mt19937_64 rng(4);
  const auto m = random_skew(rng, 6);
  std::vector<int> perm{1, 0, 2, 3, 4, 5};
  EXPECT_EQ(pfaffian(m.principal(perm)), -pfaffian(m));
}

TEST(Pfaffian, ComplexHouseholder) {
  std::mt19937_64 rng(5);
  for (int n : {2, 4, 6, 8}) {
    const auto mq = random_skew(rng, n);
    Matrix<Complex> mc(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) mc(i, j) = to_complex(mq(i, j));
    const double ref = pfaffian(mq).to_double();
    EXPECT_NEAR(pfaffian(mc).real(), ref, 1e-10 * std::max(1.0, std::abs(ref)));
  }
}

TEST(Pfaffian, RejectsNonSkew) {
  Matrix<Q> m(2, 2);
  m(0, 1) = Q(1);
  m(1, 0) = Q(1);
  EXPECT_THROW(pfaffian(m), NotSkewSymmetric);
}

TEST(PfaffianSum, Degenerations) {
  std::mt19937_64 rng(6);
  for (int n : {2, 4, 6}) {
    const auto a = random_skew(rng, n);
    const Matrix<Q> zero(n, n);
    EXPECT_EQ(pfaffian(a + zero), pfaffian(a));
    EXPECT_TRUE(pfaffian_sum_check(a, zero));
    EXPECT_TRUE(pfaffian_sum_check(zero, a));
  }
}

TEST(PfaffianSum, RandomPairs) {
  std::mt19937_64 rng(7);
  for (int n = 2; n <= 7; ++n)
    for (int t = 0; t < 3; ++t) EXPECT_EQ(pfaffian_sum_residual(random_skew(rng, n), random_skew(rng, n)), 0.0);
}

TEST(Stembridge, Product) {
  EXPECT_EQ(stembridge_residual(std::vector<Q>{Q(1, 3), Q(-2, 5)}), 0.0);
  EXPECT_EQ(stembridge_residual(std::vector<Q>{Q(1, 3), Q(-2, 5), Q(7, 2), Q(4)}), 0.0);
  std::mt19937_64 rng(8);
  for (int n : {6, 8}) {
    std::vector<Q> x;
    for (int i = 0; i < n; ++i) x.push_back(random_rational(rng, 13) + Q(100 * i));
    EXPECT_TRUE(stembridge_check(x));
  }
}

TEST(Stembridge, CoincidingPointsVanish) {
  const std::vector<Q> x{Q(1, 3), Q(1, 3), Q(2, 5), Q(-4)};
  const auto m = skew_from<Q>(4, [&](int i, int j) { return kernel_s(x[i], x[j]); });
  EXPECT_EQ(pfaffian(m), Q(0));
  EXPECT_EQ(stembridge_residual(x), 0.0);
}

TEST(Stembridge, OddLengthRejected) {
  EXPECT_THROW(stembridge_residual(std::vector<Q>{Q(1, 2), Q(1, 3), Q(1, 5)}), ArityError);
}

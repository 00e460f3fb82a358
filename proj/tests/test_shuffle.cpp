#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "hsv/shuffle.hpp"
#include "hsv/triangular.hpp"

using namespace hsv;
using Q = Rational;

namespace {

ModelParams<Q> base() {
  ModelParams<Q> p;
  p.q = Q(1, 3);
  p.a = Q(2);
  p.c = Q(-5, 2);
  return p;
}

// Symmetric test functions of arity 1..3.
SymFun<Q> e1() {
  return SymFun<Q>(1, [](const std::vector<Q>& x) { return x[0] + Q(2); }, "e1");
}
SymFun<Q> p2() {
  return SymFun<Q>(2, [](const std::vector<Q>& x) { return x[0] * x[0] + x[1] * x[1] + x[0] * x[1]; }, "p2");
}
SymFun<Q> e3() {
  return SymFun<Q>(3, [](const std::vector<Q>& x) { return x[0] * x[1] * x[2] - Q(1, 2); }, "e3");
}

std::vector<Q> points(int n) {
  const std::vector<Q> pool{Q(1, 2), Q(-2, 3), Q(3, 7), Q(5, 4), Q(-7, 9), Q(2, 11), Q(9, 5), Q(-4, 13)};
  return std::vector<Q>(pool.begin(), pool.begin() + n);
}

}  // namespace

TEST(Shuffle, UnitIsIdentity) {
  const auto f = p2();
  const auto one = SymFun<Q>::constant(Q(1));
  EXPECT_EQ(shuffle_product(f, one)(points(2)), f(points(2)));
  EXPECT_EQ(shuffle_product(one, f)(points(2)), f(points(2)));
}

TEST(Shuffle, OddArityAnticommute) {
  const auto a = e1(), b = e3();
  const auto x = points(4);
  EXPECT_EQ(shuffle_product(a, b)(x), -shuffle_product(b, a)(x));
}

TEST(Shuffle, SignRule) {
  const auto x3 = points(3), x5 = points(5);
  EXPECT_EQ(shuffle_product(e1(), p2())(x3), shuffle_product(p2(), e1())(x3));
  EXPECT_EQ(shuffle_product(p2(), e3())(x5), shuffle_product(e3(), p2())(x5));
}

TEST(Shuffle, Associative) {
  const auto x = points(6);
  const auto lhs = shuffle_product(shuffle_product(e1(), p2()), e3());
  const auto rhs = shuffle_product(e1(), shuffle_product(p2(), e3()));
  EXPECT_EQ(lhs(x), rhs(x));
}

TEST(Shuffle, ResultIsSymmetric) {
  auto x = points(5);
  const auto f = shuffle_product(p2(), e3());
  const Q ref = f(x);
  std::mt19937_64 rng(3);
  for (int t = 0; t < 5; ++t) {
    std::shuffle(x.begin(), x.end(), rng);
    EXPECT_EQ(f(x), ref);
  }
}

TEST(Shuffle, Z1SquaredVanishes) {
  const auto z1 = z1_function(base());
  EXPECT_EQ(shuffle_product(z1, z1)(points(2)), Q(0));
}

TEST(Shuffle, PowersOfZ2) {
  const auto p = base();
  const auto z2 = z2_function(p);
  EXPECT_EQ(shuffle_power(z2, 0)(std::vector<Q>{}), Q(1));
  EXPECT_EQ(shuffle_power(z2, 1)(points(2)), z2(points(2)));
  const auto x = points(4);
  EXPECT_EQ(shuffle_power(z2, 2)(x), Q(2) * z_enumerate(make_spec(x, p)));
}

TEST(Shuffle, CapAndArityErrors) {
  EXPECT_THROW(shuffle_product(e3(), e3(), 5), CapExceeded);
  EXPECT_THROW(p2()(points(3)), ArityError);
  EXPECT_THROW(shuffle_kernel(Q(1, 2), Q(1, 2)), DegeneratePoint);
}

TEST(ShuffleExp, ReproducesZ) {
  const auto p = base();
  const Q v(3, 5);
  GradedSymFun<Q> f = graded_zero<Q>(2);
  f[1] = scale(z1_function(p), v);
  f[2] = scale(z2_function(p), v * v);
  const auto ex = shuffle_exp_truncated(f, 5);
  for (int m = 1; m <= 5; ++m) {
    const auto x = points(m);
    EXPECT_EQ(ex[m](x), power(v, m) * z_enumerate(make_spec(x, p))) << m;
  }
}

TEST(ShuffleExp, ParityOfEvenGenerator) {
  const auto ex = shuffle_exp_truncated(p2(), 3);
  ASSERT_EQ(ex.size(), 4u);
  EXPECT_EQ(ex[0](std::vector<Q>{}), Q(1));
  EXPECT_EQ(ex[1](points(1)), Q(0));
  EXPECT_EQ(ex[2](points(2)), p2()(points(2)));
  EXPECT_EQ(ex[3](points(3)), Q(0));
}

TEST(ShuffleExp, OddGeneratorIsNilpotent) {
  const auto ex = shuffle_exp_truncated(e1(), 3);
  EXPECT_EQ(ex[1](points(1)), e1()(points(1)));
  EXPECT_EQ(ex[2](points(2)), Q(0));
  EXPECT_EQ(ex[3](points(3)), Q(0));
}

TEST(SymFun, MemoizesOnSortedArguments) {
  int calls = 0;
  SymFun<Q> f(2, [&](const std::vector<Q>& x) {
    ++calls;
    return x[0] * x[1];
  });
  f({Q(1, 2), Q(3)});
  f({Q(3), Q(1, 2)});
  EXPECT_EQ(calls, 1);
  EXPECT_EQ(f.memo_size(), 1u);
}

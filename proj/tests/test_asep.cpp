#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numeric>

#include "hsv/asep.hpp"

using namespace hsv;

namespace {

AsepParams standard(double t) { return AsepParams{0.25, 0.5, 0.0, t, 8}; }

}  // namespace

TEST(MapParams, DerivedPoint) {
  const auto [alpha, gamma] = map_params(-1.0, 2.0, 0.5);
  EXPECT_DOUBLE_EQ(alpha, 0.5);
  EXPECT_DOUBLE_EQ(gamma, 0.25);
  const auto [a1, g1] = map_params(Rational(-1), Rational(2), Rational(1));
  EXPECT_EQ(a1, Rational(0));
  EXPECT_EQ(g1, Rational(0));
}

TEST(MapParams, CInfiniteLimit) {
  const double a = -3.0, q = 0.25;
  const auto [alpha, gamma] = map_params_c_infinite(a, q);
  EXPECT_DOUBLE_EQ(gamma, 0.0);
  EXPECT_DOUBLE_EQ(alpha, a * (1.0 - q) / (a - 1.0));
  const auto [af, gf] = map_params(a, 1e9, q);
  EXPECT_NEAR(af, alpha, 1e-8);
  EXPECT_NEAR(gf, 0.0, 1e-8);
  EXPECT_NEAR(a, alpha / (alpha + q - 1.0), 1e-12);
}

TEST(Generator, InjectionFromEmpty) {
  AsepParams p{0.25, 0.5, 0.0, 1.0, 4};
  std::vector<double> f(16, 0.0);
  f[0] = 1.0;
  const auto g = generator_apply(f, p);
  EXPECT_DOUBLE_EQ(g[0], -0.5);
  EXPECT_DOUBLE_EQ(g[Config{1}.mask()], 0.5);
  EXPECT_DOUBLE_EQ(std::accumulate(g.begin(), g.end(), 0.0), 0.0);
}

TEST(Generator, Exclusion) {
  // From (2,1) only the right hop of particle 2 and the exit from site 1 remain.
  AsepParams p{0.25, 0.5, 0.3, 1.0, 4};
  std::map<Config, double> moves;
  for (const auto& m : transitions_from(static_cast<std::uint32_t>(Config{2, 1}.mask()), p))
    moves[Config::from_mask(m.to)] = m.rate;
  EXPECT_EQ(moves, (std::map<Config, double>{{Config{3, 1}, 1.0}, {Config{2}, 0.3}}));
}

TEST(Generator, ColumnsSumToZero) {
  AsepParams p{0.4, 0.5, 0.2, 1.0, 6};
  const auto g = generator_matrix(p);
  for (std::size_t j = 0; j < g.size(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += g[i][j];
    EXPECT_NEAR(s, 0.0, 1e-14);
  }
}

TEST(Exact, TimeZeroIsDelta) {
  const auto p = standard(0.0);
  EXPECT_DOUBLE_EQ(transition_prob_exact(Config{2}, Config{2}, p).value, 1.0);
  EXPECT_DOUBLE_EQ(transition_prob_exact(Config{2}, Config{1}, p).value, 0.0);
}

TEST(Exact, EmptyStaysWithExponentialProbability) {
  for (double t : {0.1, 0.5, 1.0}) {
    const auto p = standard(t);
    EXPECT_NEAR(transition_prob_exact(Config{}, Config{}, p).value, std::exp(-p.alpha * t), 1e-15);
  }
}

TEST(Exact, SmallTimeFirstOrder) {
  const double t = 1e-4;
  const auto p = standard(t);
  EXPECT_NEAR(transition_prob_exact(Config{}, Config{1}, p).value, p.alpha * t, 1e-7);
}

// Reference values from a dense matrix exponential of the same truncated chain.
TEST(Exact, FrozenValues) {
  const struct {
    double t;
    Config nu;
    double value;
  } cases[] = {{0.5, Config{1}, 0.17381747212135276},  {0.5, Config{2, 1}, 0.003111838572865352},
               {0.5, Config{2}, 0.037007405995825374}, {1.0, Config{1}, 0.24615003670647034},
               {1.0, Config{2, 1}, 0.015294489058631833}, {1.0, Config{2}, 0.09043545047038724}};
  for (const auto& c : cases) EXPECT_NEAR(transition_prob_exact(Config{}, c.nu, standard(c.t)).value, c.value, 1e-13);
}

TEST(Exact, ConservesProbability) {
  const auto p = standard(1.0);
  const auto ev = evolve_exact(Config{2}, p);
  EXPECT_NEAR(std::accumulate(ev.prob.begin(), ev.prob.end(), 0.0), 1.0, 1e-12);
  EXPECT_LT(ev.leakage_bound, 1e-4);
}

TEST(Exact, MonotoneTruncation) {
  const auto small = evolve_exact(Config{}, AsepParams{0.25, 0.5, 0.0, 1.0, 8});
  const auto large = evolve_exact(Config{}, AsepParams{0.25, 0.5, 0.0, 1.0, 10});
  for (const auto& c : configs_up_to(8)) EXPECT_GE(large.prob[c.mask()], small.prob[c.mask()] - small.leakage_bound);
}

TEST(Exact, CutoffTooSmall) {
  EXPECT_THROW(evolve_exact(Config{}, AsepParams{0.25, 0.5, 0.0, 20.0, 4}), CutoffTooSmall);
}

TEST(Formula, EmptyIsExponential) {
  const auto p = standard(1.0);
  EXPECT_NEAR(transition_prob_formula(Config{}, p), std::exp(-0.5), 1e-16);
}

TEST(Formula, MatchesExact) {
  const auto p = standard(0.5);
  EXPECT_NEAR(transition_prob_formula(Config{1}, p), transition_prob_exact(Config{}, Config{1}, p).value, 1e-6);
  EXPECT_NEAR(transition_prob_formula(Config{2, 1}, p), transition_prob_exact(Config{}, Config{2, 1}, p).value, 1e-5);
  EXPECT_NEAR(transition_prob_formula(Config{4, 2}, standard(1.0)),
              transition_prob_exact(Config{}, Config{4, 2}, standard(1.0)).value, 1e-5);
}

TEST(Formula, RejectsGamma) {
  AsepParams p = standard(1.0);
  p.gamma = 0.1;
  EXPECT_THROW(transition_prob_formula(Config{1}, p), std::invalid_argument);
}

TEST(Gillespie, FrozenStateWithoutRates) {
  // Both particles are jammed against the right end and nothing enters or leaves.
  const auto r = simulate_gillespie(Config{3, 2}, AsepParams{0.0, 0.0, 0.0, 1.0, 3}, 1000, 1);
  ASSERT_EQ(r.estimates.size(), 1u);
  EXPECT_EQ(r.estimates.begin()->first, (Config{3, 2}));
  EXPECT_EQ(r.estimates.begin()->second.count, 1000);
}

TEST(Gillespie, EmptyStateWithinThreeSigma) {
  const auto p = standard(1.0);
  const long n = 100000;
  const auto r = simulate_gillespie(Config{}, p, n, 42);
  const double pe = std::exp(-0.5);
  const double sigma = std::sqrt(pe * (1.0 - pe) / n);
  EXPECT_LT(std::abs(r.estimates.at(Config{}).p - pe), 3.0 * sigma);
}

TEST(Gillespie, IndependentOfThreadCount) {
  const auto p = standard(1.0);
  set_max_threads(1);
  const auto a = simulate_gillespie(Config{}, p, 5000, 9);
  set_max_threads(4);
  const auto b = simulate_gillespie(Config{}, p, 5000, 9);
  set_max_threads(0);
  ASSERT_EQ(a.estimates.size(), b.estimates.size());
  for (const auto& [c, e] : a.estimates) EXPECT_EQ(b.estimates.at(c).count, e.count);
}

TEST(Gillespie, WilsonInterval) {
  const auto e = wilson(50, 100, 1.96);
  EXPECT_DOUBLE_EQ(e.p, 0.5);
  EXPECT_LT(e.lo, 0.5);
  EXPECT_GT(e.hi, 0.5);
  EXPECT_NEAR(e.hi - 0.5, 0.5 - e.lo, 1e-12);
}

TEST(VertexLimit, TimeZeroExact) {
  for (int L : {4, 16}) EXPECT_DOUBLE_EQ(vertex_propagator(Config{}, Config{}, 0.5, -1.0, 2.0, 0.0, L, 6), 1.0);
}

TEST(VertexLimit, FirstOrderConvergence) {
  const auto r = vertex_limit_check(Config{}, Config{}, 0.5, -1.0, 2.0, 1.0, {32, 64, 128, 256});
  EXPECT_DOUBLE_EQ(r.alpha, 0.5);
  EXPECT_DOUBLE_EQ(r.gamma, 0.25);
  for (double o : r.orders) EXPECT_NEAR(o, 1.0, 0.1);
  const auto s = vertex_limit_check(Config{}, Config{1}, 0.5, -1.0, 2.0, 1.0, {256});
  EXPECT_LE(s.rows[0].abs_error, 0.01 * s.rows[0].reference);
}

#pragma once

#include <boost/math/distributions/poisson.hpp>

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "config.hpp"
#include "field.hpp"
#include "parallel.hpp"
#include "rowops.hpp"
#include "symfun.hpp"
#include "weights.hpp"

namespace hsv {

inline constexpr int kMaxAsepSites = 20;

struct AsepParams {
  double q = 0.0;      // left hop rate (right hops at rate 1)
  double alpha = 0.0;  // injection at site 1
  double gamma = 0.0;  // ejection at site 1
  double t = 0.0;
  int sites = 8;  // truncation S of the half-line

  void validate() const {
    if (q < 0.0 || alpha < 0.0 || gamma < 0.0) throw std::invalid_argument("ASEP rates must be nonnegative");
    if (t < 0.0) throw std::invalid_argument("time must be nonnegative");
    if (sites < 1 || sites > kMaxAsepSites) throw std::invalid_argument("sites out of range");
  }
};

using AsepDistribution = std::map<Config, double>;

// alpha = ac(1-q)/((1-a)(1-c)), gamma = -(1-q)/((1-a)(1-c)).
template <class F>
std::pair<F, F> map_params(const F& a, const F& c, const F& q) {
  const F d = (F(1) - a) * (F(1) - c);
  return {quot(a * c * (F(1) - q), d, "(1 - a)(1 - c)"), quot(-(F(1) - q), d, "(1 - a)(1 - c)")};
}

// c -> infinity: alpha = a(1-q)/(a-1), gamma = 0.
template <class F>
std::pair<F, F> map_params_c_infinite(const F& a, const F& q) {
  return {quot(a * (F(1) - q), a - F(1), "a - 1"), F(0)};
}

// ---------------------------------------------------------------------------
// Generator of the chain truncated to sites [1, S]; states are occupation
// masks, bit s-1 for site s. Right hops out of site S are suppressed.

struct Transition {
  std::uint32_t from = 0;
  std::uint32_t to = 0;
  double rate = 0.0;
};

inline std::vector<Transition> transitions_from(std::uint32_t m, const AsepParams& p) {
  std::vector<Transition> out;
  const int S = p.sites;
  if (!(m & 1u)) {
    if (p.alpha > 0.0) out.push_back({m, m | 1u, p.alpha});
  } else if (p.gamma > 0.0) {
    out.push_back({m, m & ~1u, p.gamma});
  }
  for (int s = 1; s <= S; ++s) {
    const std::uint32_t b = 1u << (s - 1);
    if (!(m & b)) continue;
    if (s < S && !(m & (b << 1))) out.push_back({m, (m & ~b) | (b << 1), 1.0});
    if (s > 1 && !(m & (b >> 1)) && p.q > 0.0) out.push_back({m, (m & ~b) | (b >> 1), p.q});
  }
  return out;
}

inline std::vector<Transition> generator_transitions(const AsepParams& p) {
  p.validate();
  std::vector<Transition> all;
  for (std::uint32_t m = 0; m < (1u << p.sites); ++m) {
    auto t = transitions_from(m, p);
    all.insert(all.end(), t.begin(), t.end());
  }
  return all;
}

// Forward action on a probability vector: (L f)(nu) = sum over moves
// mu -> nu of rate * f(mu) - (exit rate of nu) f(nu).
inline std::vector<double> generator_apply(const std::vector<double>& f, const AsepParams& p) {
  p.validate();
  if (f.size() != (std::size_t{1} << p.sites)) throw std::invalid_argument("vector size must be 2^sites");
  std::vector<double> out(f.size(), 0.0);
  for (std::uint32_t m = 0; m < f.size(); ++m) {
    if (f[m] == 0.0) continue;
    for (const auto& t : transitions_from(m, p)) {
      out[t.to] += t.rate * f[m];
      out[m] -= t.rate * f[m];
    }
  }
  return out;
}

// Dense generator, column = source state; for small S only.
inline std::vector<std::vector<double>> generator_matrix(const AsepParams& p) {
  if (p.sites > 12) throw CapExceeded("dense generator limited to 12 sites");
  const std::size_t n = std::size_t{1} << p.sites;
  std::vector<std::vector<double>> g(n, std::vector<double>(n, 0.0));
  for (const auto& t : generator_transitions(p)) {
    g[t.to][t.from] += t.rate;
    g[t.from][t.from] -= t.rate;
  }
  return g;
}

inline AsepDistribution to_distribution(const std::vector<double>& v, double floor = 0.0) {
  AsepDistribution d;
  for (std::uint32_t m = 0; m < v.size(); ++m)
    if (v[m] > floor) d.emplace(Config::from_mask(m), v[m]);
  return d;
}

// ---------------------------------------------------------------------------
// Exact transition probabilities by uniformization.

// P(the truncated and the infinite chain differ before t). The front only
// advances on rings of a rate-1 clock, so a suppressed move at site S needs
// at least S - max(mu_1, 1) + 1 rings.
inline double leakage_bound(const Config& mu, const AsepParams& p) {
  const int need = p.sites - std::max(mu.max_part(), 1) + 1;
  if (p.t == 0.0) return 0.0;
  if (need <= 0) return 1.0;
  const boost::math::poisson_distribution<double> pois(p.t);
  return boost::math::cdf(boost::math::complement(pois, static_cast<double>(need - 1)));
}

struct AsepEvolution {
  std::vector<double> prob;  // indexed by occupation mask
  double leakage_bound = 0.0;
  double series_tail = 0.0;  // Poisson mass dropped from the uniformization series
  int terms = 0;
};

inline AsepEvolution evolve_exact(const Config& mu, const AsepParams& p, double leak_tol = 1e-4) {
  p.validate();
  if (mu.max_part() > p.sites) throw CutoffTooSmall("initial configuration exceeds the site cutoff");
  AsepEvolution ev;
  ev.leakage_bound = leakage_bound(mu, p);
  if (ev.leakage_bound > leak_tol)
    throw CutoffTooSmall("truncation leakage bound " + std::to_string(ev.leakage_bound) + " exceeds tolerance");
  const std::size_t n = std::size_t{1} << p.sites;
  std::vector<double> v(n, 0.0);
  v[mu.mask()] = 1.0;
  const double lambda = p.sites * (1.0 + p.q) + p.alpha + p.gamma;
  if (p.t == 0.0 || lambda == 0.0) {
    ev.prob = v;
    return ev;
  }
  const auto trans = generator_transitions(p);
  const boost::math::poisson_distribution<double> pois(lambda * p.t);
  std::vector<double> acc(n, 0.0), next(n);
  double mass = 0.0;
  const double target = 1.0 - 1e-16;
  const int k_max = static_cast<int>(lambda * p.t + 40.0 * std::sqrt(lambda * p.t + 1.0) + 60.0);
  int k = 0;
  for (; k <= k_max; ++k) {
    const double w = boost::math::pdf(pois, static_cast<double>(k));
    mass += w;
    for (std::size_t i = 0; i < n; ++i) acc[i] += w * v[i];
    if (mass >= target && static_cast<double>(k) > lambda * p.t) break;
    // v <- (I + Q/lambda) v
    next = v;
    for (const auto& t : trans) {
      const double f = t.rate / lambda * v[t.from];
      next[t.to] += f;
      next[t.from] -= f;
    }
    std::swap(v, next);
  }
  ev.prob = std::move(acc);
  ev.series_tail = std::max(0.0, 1.0 - mass);
  ev.terms = k + 1;
  return ev;
}

struct TransitionProb {
  double value = 0.0;
  double leakage_bound = 0.0;
  double series_tail = 0.0;
};

inline TransitionProb transition_prob_exact(const Config& mu, const Config& nu, const AsepParams& p,
                                            double leak_tol = 1e-4) {
  if (nu.max_part() > p.sites) throw CutoffTooSmall("target configuration exceeds the site cutoff");
  const auto ev = evolve_exact(mu, p, leak_tol);
  return {ev.prob[nu.mask()], ev.leakage_bound, ev.series_tail};
}

// ---------------------------------------------------------------------------
// Gillespie simulation with counter-based random streams.

// Stateless stream: the k-th draw of stream s is a hash of (seed, s, k).
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(mix(seed ^ mix(stream + 0x632BE59BD9B4E019ull))) {}

  std::uint64_t next() { return mix(key_ + 0x9E3779B97F4A7C15ull * ++counter_); }
  // Uniform on (0, 1).
  double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }
  std::uint64_t counter() const { return counter_; }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

struct Estimate {
  double p = 0.0;
  double lo = 0.0;  // Wilson interval
  double hi = 0.0;
  double stderr_ = 0.0;
  long count = 0;
};

inline Estimate wilson(long count, long n, double z) {
  Estimate e;
  e.count = count;
  if (n <= 0) return e;
  const double nn = static_cast<double>(n);
  const double p = count / nn;
  const double z2 = z * z;
  const double den = 1.0 + z2 / nn;
  const double mid = (p + z2 / (2.0 * nn)) / den;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / den;
  e.p = p;
  e.lo = std::max(0.0, mid - half);
  e.hi = std::min(1.0, mid + half);
  e.stderr_ = std::sqrt(p * (1.0 - p) / nn);
  return e;
}

struct SimulationResult {
  std::map<Config, Estimate> estimates;
  long samples = 0;
  std::uint64_t seed = 0;
};

// Final state of one trajectory started at mu_mask.
inline std::uint32_t gillespie_trajectory(std::uint32_t state, const AsepParams& p, CounterRng& rng) {
  double now = 0.0;
  while (true) {
    const auto moves = transitions_from(state, p);
    double total = 0.0;
    for (const auto& m : moves) total += m.rate;
    if (total <= 0.0) return state;
    now += -std::log(rng.uniform()) / total;
    if (now > p.t) return state;
    double u = rng.uniform() * total;
    std::size_t pick = 0;
    for (; pick + 1 < moves.size(); ++pick) {
      if (u < moves[pick].rate) break;
      u -= moves[pick].rate;
    }
    state = moves[pick].to;
  }
}

// Replica r draws from stream (seed, r), so the result is independent of the
// worker count.
inline SimulationResult simulate_gillespie(const Config& mu, const AsepParams& p, long samples, std::uint64_t seed,
                                           double z = 3.0) {
  p.validate();
  if (samples < 1) throw std::invalid_argument("samples must be >= 1");
  if (mu.max_part() > p.sites) throw CutoffTooSmall("initial configuration exceeds the site cutoff");
  std::vector<std::uint32_t> final_state(static_cast<std::size_t>(samples));
  const std::uint32_t start = static_cast<std::uint32_t>(mu.mask());
  constexpr std::size_t kChunk = 1024;
  const std::size_t chunks = (final_state.size() + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t end = std::min(final_state.size(), (c + 1) * kChunk);
    for (std::size_t r = c * kChunk; r < end; ++r) {
      CounterRng rng(seed, r);
      final_state[r] = gillespie_trajectory(start, p, rng);
    }
  });
  std::map<std::uint32_t, long> counts;
  for (auto s : final_state) ++counts[s];
  SimulationResult res;
  res.samples = samples;
  res.seed = seed;
  for (const auto& [m, c] : counts) res.estimates.emplace(Config::from_mask(m), wilson(c, samples, z));
  return res;
}

// ---------------------------------------------------------------------------
// Contour formula for P_t(empty -> nu) when gamma = 0.

inline ContourConstraints asep_constraints(const AsepParams& p) {
  ContourConstraints k;
  k.q = Complex(p.q, 0.0);
  k.enclose = {Complex(1.0, 0.0)};
  k.exclude = {Complex(0.0, 0.0)};
  if (p.q > 0.0) k.exclude.push_back(Complex(1.0 / p.q, 0.0));
  if (p.alpha > 0.0) k.exclude.push_back(Complex((p.q + p.alpha - 1.0) / p.alpha, 0.0));
  k.reciprocal = true;
  return k;
}

// Circles around 1 with radii r0 * ratio^k; r0 is the largest valid start
// found by bisection, scaled back by 0.8.
inline ContourSpec asep_contours(const AsepParams& p, int n, int nodes = 256) {
  ContourSpec s;
  s.nodes = nodes;
  s.nested = true;
  if (n == 0) return s;
  const auto k = asep_constraints(p);
  auto ladder = [&](double r0, double ratio) {
    ContourSpec f = s;
    double r = r0;
    for (int i = 0; i < n; ++i, r *= ratio) f.circles.push_back({Complex(1.0, 0.0), r});
    return f;
  };
  auto valid = [&](const ContourSpec& f) {
    try {
      validate_contours(f, k);
      return true;
    } catch (const ContourInvalid&) {
      return false;
    }
  };
  for (double ratio : {1.6, 2.0, 2.5, 3.0, 1.3}) {
    double lo = 1e-3, hi = 1.0;
    if (!valid(ladder(lo, ratio))) continue;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (valid(ladder(mid, ratio)) ? lo : hi) = mid;
    }
    auto f = ladder(0.8 * lo, ratio);
    if (valid(f)) return f;
  }
  throw ContourInvalid("no nested circle ladder around 1 satisfies the contour conditions");
}

inline Complex asep_integrand(const Config& nu, const AsepParams& p, const std::vector<Complex>& w) {
  const Complex q(p.q, 0.0);
  Complex r = detail::pair_factor(w, q);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Complex wi = w[i];
    const Complex one_qw = 1.0 - q * wi;
    r *= (1.0 - q * wi * wi) / (wi * (q + p.alpha - 1.0 - p.alpha * wi) * one_qw);
    r *= std::pow((1.0 - wi) / one_qw, nu.parts()[i] - 1);
    r *= std::exp((1.0 - q) * (1.0 - q) * wi * p.t / ((1.0 - wi) * one_qw));
  }
  return r;
}

inline QuadratureResult transition_prob_formula_result(const Config& nu, const AsepParams& p,
                                                       const ContourSpec& contours, double tol = 1e-9) {
  p.validate();
  if (p.gamma != 0.0) throw std::invalid_argument("contour formula requires gamma = 0");
  if (std::abs(p.alpha + p.q - 1.0) < 1e-14) throw DegeneratePoint("alpha + q = 1");
  const int n = nu.size();
  const double pre = std::pow(p.alpha, n) * std::exp(-p.alpha * p.t);
  if (static_cast<int>(contours.circles.size()) != n) throw ContourInvalid("need one contour per particle");
  if (n == 0) return {Complex(pre, 0.0), 0, 0.0};
  validate_contours(contours, asep_constraints(p));
  auto r = contour_integral(contours, [&](const std::vector<Complex>& w) { return asep_integrand(nu, p, w); }, tol);
  r.value *= pre;
  r.change *= pre;
  return r;
}

inline double transition_prob_formula(const Config& nu, const AsepParams& p, const ContourSpec& contours,
                                      double tol = 1e-9) {
  return transition_prob_formula_result(nu, p, contours, tol).value.real();
}

inline double transition_prob_formula(const Config& nu, const AsepParams& p, int nodes = 256, double tol = 1e-9) {
  return transition_prob_formula(nu, p, asep_contours(p, nu.size(), nodes), tol);
}

// ---------------------------------------------------------------------------
// Vertex model -> ASEP limit.

struct LimitRow {
  int L = 0;
  double value = 0.0;
  double reference = 0.0;
  double abs_error = 0.0;
};

struct LimitReport {
  std::vector<LimitRow> rows;
  std::vector<double> orders;  // log2(err(L_k)/err(L_{k+1})) for doubling steps
  double alpha = 0.0;
  double gamma = 0.0;
};

// G_{nu/mu}(x, ..., x) with x = 1 - (1-q)t/(2L), y = 1, by L applications of
// the dense row operator on `sites` columns.
inline double vertex_propagator(const Config& mu, const Config& nu, double q, double a, double c, double t, int L,
                                int sites) {
  if (sites > kMaxAsepSites) throw CapExceeded("too many sites for dense propagation");
  ModelParams<Complex> p;
  p.q = q;
  p.a = a;
  p.c = c;
  const Complex x(1.0 - (1.0 - q) * t / (2.0 * L), 0.0);
  std::vector<Complex> v(std::size_t{1} << sites, Complex(0.0, 0.0));
  v[mu.mask()] = 1.0;
  for (int i = 0; i < L; ++i) v = apply_double_row_dense(v, RowKind::A, x, sites, p);
  return v[nu.mask()].real();
}

inline LimitReport vertex_limit_check(const Config& mu, const Config& nu, double q, double a, double c, double t,
                                      const std::vector<int>& L_list, int sites = 10) {
  LimitReport rep;
  std::tie(rep.alpha, rep.gamma) = map_params(a, c, q);
  AsepParams ap{q, rep.alpha, rep.gamma, t, sites};
  const double ref = transition_prob_exact(mu, nu, ap, 1.0).value;
  for (int L : L_list) {
    const double g = vertex_propagator(mu, nu, q, a, c, t, L, sites);
    rep.rows.push_back({L, g, ref, std::abs(g - ref)});
  }
  for (std::size_t i = 0; i + 1 < rep.rows.size(); ++i) {
    const double ratio = static_cast<double>(rep.rows[i + 1].L) / rep.rows[i].L;
    rep.orders.push_back(std::log(rep.rows[i].abs_error / rep.rows[i + 1].abs_error) / std::log(ratio));
  }
  return rep;
}

}  // namespace hsv

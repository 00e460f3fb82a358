#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "config.hpp"
#include "field.hpp"
#include "parallel.hpp"
#include "rowops.hpp"
#include "triangular.hpp"
#include "weights.hpp"

namespace hsv {

// ---------------------------------------------------------------------------
// Closed form of G_nu from the empty state.

namespace detail {

template <class F>
F z_or_one(const std::vector<F>& x, const ModelParams<F>& p) {
  return x.empty() ? F(1) : z_pfaffian(make_spec(x, p));
}

// (1-q) x y_k/(1 - q x y_k) prod_{j<k} (1 - x y_j)/(1 - q x y_j)
template <class F>
F column_factor(const F& x, int k, const ModelParams<F>& p) {
  const F yk = p.y_at(k);
  F r = quot((F(1) - p.q) * x * yk, F(1) - p.q * x * yk, "1 - q x y");
  for (int j = 1; j < k; ++j) {
    const F yj = p.y_at(j);
    r *= quot(F(1) - x * yj, F(1) - p.q * x * yj, "1 - q x y");
  }
  return r;
}

}  // namespace detail

// Sum over n-subsets K of [L] and orderings of K; Z_{L-n} on the complement.
template <class F>
F g_subset(const Config& nu, const std::vector<F>& x, const ModelParams<F>& p) {
  const int n = nu.size(), L = static_cast<int>(x.size());
  if (L < n) throw ArityError("g_subset needs at least |nu| spectral parameters");
  for (int i = 0; i < L; ++i)
    for (int j = i + 1; j < L; ++j)
      if (is_zero(x[i] - x[j])) throw DegeneratePoint("coinciding x_i in g_subset");
  if (n == 0) return detail::z_or_one(x, p);
  const F& q = p.q;
  F total(0);
  std::vector<int> k, kc;
  for (std::uint32_t set = 0; set < (1u << L); ++set) {
    if (__builtin_popcount(set) != n) continue;
    k.clear();
    kc.clear();
    for (int i = 0; i < L; ++i) (set >> i & 1u ? k : kc).push_back(i);
    F pre(1);
    for (int i : k) {
      pre *= h_func(x[i], p);
      for (int j : kc)
        pre *= quot((x[j] - q * x[i]) * (F(1) - x[i] * x[j]), (x[j] - x[i]) * (F(1) - q * x[i] * x[j]),
                    "1 - q x_i x_j");
    }
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        pre *= quot(F(1) - x[k[a]] * x[k[b]], F(1) - q * x[k[a]] * x[k[b]], "1 - q x_i x_j");
    if (is_zero(pre)) continue;
    std::vector<F> comp;
    for (int j : kc) comp.push_back(x[j]);
    pre *= detail::z_or_one(comp, p);
    if (is_zero(pre)) continue;

    std::vector<int> sigma(n);
    for (int i = 0; i < n; ++i) sigma[i] = k[i];
    F perm_sum(0);
    do {
      F t(1);
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) t *= (x[sigma[j]] - q * x[sigma[i]]) / (x[sigma[j]] - x[sigma[i]]);
      for (int i = 0; i < n; ++i) t *= detail::column_factor(x[sigma[i]], nu.parts()[i], p);
      perm_sum += t;
    } while (std::next_permutation(sigma.begin(), sigma.end()));
    total += pre * perm_sum;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Contours and quadrature.

struct Circle {
  Complex center;
  double radius = 0.0;
};

struct ContourSpec {
  std::vector<Circle> circles;  // C_1, ..., C_n
  int nodes = 256;              // trapezoid nodes per circle
  bool nested = true;           // C_i strictly inside C_{i+1}
};

// Points every circle must surround and points no circle may surround.
struct ContourConstraints {
  std::vector<Complex> enclose;
  std::vector<Complex> exclude;
  Complex q;
  bool reciprocal = true;     // integrand has poles on w_i w_j = 1
  bool q_reciprocal = false;  // and on w_i w_j = q
};

namespace detail {

inline constexpr double kContourMargin = 1e-9;

inline bool strictly_inside(const Complex& z, const Circle& c) {
  return std::abs(z - c.center) < c.radius * (1.0 - kContourMargin);
}
inline bool strictly_outside(const Complex& z, const Circle& c) {
  return std::abs(z - c.center) > c.radius * (1.0 + kContourMargin);
}

// Image of a circle under w -> k w.
inline Circle scaled(const Circle& c, const Complex& k) { return {k * c.center, std::abs(k) * c.radius}; }

// Image of a circle not through 0 under w -> 1/w.
inline Circle inverted(const Circle& c) {
  const double d = std::norm(c.center) - c.radius * c.radius;
  if (std::abs(d) <= kContourMargin) throw ContourInvalid("circle passes through 0");
  return {std::conj(c.center) / d, c.radius / std::abs(d)};
}

// True when the curve `img` lies in the closed exterior of the disc `c`.
inline bool curve_outside(const Circle& img, const Circle& c) {
  const double d = std::abs(img.center - c.center);
  const double m = kContourMargin * std::max(1.0, c.radius);
  return d >= img.radius + c.radius + m || img.radius >= d + c.radius + m;
}

inline bool circle_inside(const Circle& inner, const Circle& outer) {
  return std::abs(inner.center - outer.center) + inner.radius < outer.radius * (1.0 - kContourMargin);
}

}  // namespace detail

// Throws ContourInvalid naming the first violated condition.
inline void validate_contours(const ContourSpec& s, const ContourConstraints& k) {
  const int n = static_cast<int>(s.circles.size());
  if (s.nodes < 2) throw ContourInvalid("need at least two quadrature nodes");
  const Complex one(1.0, 0.0);
  for (int i = 0; i < n; ++i) {
    const Circle& c = s.circles[i];
    const std::string tag = "contour " + std::to_string(i + 1);
    if (!(c.radius > 0.0) || !std::isfinite(c.radius)) throw ContourInvalid(tag + ": bad radius");
    for (const auto& z : k.enclose)
      if (!detail::strictly_inside(z, c)) throw ContourInvalid(tag + " does not surround " + to_string(z));
    for (const auto& z : k.exclude)
      if (!detail::strictly_outside(z, c)) throw ContourInvalid(tag + " surrounds or touches " + to_string(z));
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const Circle& ci = s.circles[i];
      const Circle& cj = s.circles[j];
      const std::string tag = "contours " + std::to_string(i + 1) + "," + std::to_string(j + 1);
      if (!detail::curve_outside(detail::scaled(cj, k.q), ci))
        throw ContourInvalid(tag + ": q-image of the later contour meets the interior of the earlier");
      if (s.nested && !detail::circle_inside(ci, cj)) throw ContourInvalid(tag + ": not nested");
      if (detail::strictly_inside(one, ci) && !detail::circle_inside(ci, cj))
        throw ContourInvalid(tag + ": contour around 1 is not inside the later contour");
      if (k.reciprocal && !detail::curve_outside(detail::inverted(cj), ci))
        throw ContourInvalid(tag + ": 1/w image of the later contour meets the interior of the earlier");
      if (k.q_reciprocal && (!detail::curve_outside(detail::scaled(detail::inverted(cj), k.q), ci) ||
                             !detail::curve_outside(detail::scaled(detail::inverted(ci), k.q), cj)))
        throw ContourInvalid(tag + ": q/w image of one contour meets the interior of the other");
    }
}

// Circles centred at the centroid of the enclosed points. Nested radii are
// spread over (r_in, R) with the outer radius R found by bisection; when no
// nested family validates and 1 is not enclosed, a common circle is tried.
inline ContourSpec make_contours(const ContourConstraints& k, int n, int nodes = 256) {
  ContourSpec s;
  s.nodes = nodes;
  if (n == 0) return s;
  if (k.enclose.empty()) throw ContourInvalid("nothing to enclose");
  Complex center(0.0, 0.0);
  for (const auto& z : k.enclose) center += z;
  center /= static_cast<double>(k.enclose.size());
  double r_in = 0.0, r_out = std::numeric_limits<double>::infinity();
  for (const auto& z : k.enclose) r_in = std::max(r_in, std::abs(z - center));
  for (const auto& z : k.exclude) r_out = std::min(r_out, std::abs(z - center));
  if (!std::isfinite(r_out)) r_out = 2.0 * r_in + 1.0;
  if (!(r_in < r_out)) throw ContourInvalid("an excluded point lies among the enclosed points");

  auto family = [&](double R, bool nested) {
    ContourSpec f;
    f.nodes = nodes;
    f.nested = nested;
    for (int i = 0; i < n; ++i) {
      const double r = nested ? r_in + (R - r_in) * (i + 1) / n : R;
      f.circles.push_back({center, r});
    }
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
  // Keep the outer circle a fixed fraction of the way to the nearest
  // excluded point once the largest valid radius is known.
  auto search = [&](bool nested, ContourSpec& out) {
    const double gap = r_out - r_in;
    double lo = r_in + gap * 1e-3, hi = r_in + gap * (1.0 - 1e-3);
    if (!valid(family(lo, nested))) return false;
    if (valid(family(hi, nested))) {
      lo = hi;
    } else {
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (valid(family(mid, nested)) ? lo : hi) = mid;
      }
    }
    const double R = r_in + 0.8 * (lo - r_in);
    out = family(R, nested);
    return valid(out) || (out = family(lo, nested), valid(out));
  };
  if (search(true, s)) return s;
  const bool one_enclosed = std::abs(Complex(1.0, 0.0) - center) <= r_in;
  if (!one_enclosed && search(false, s)) return s;
  throw ContourInvalid("no circle family satisfies the contour conditions");
}

struct QuadratureResult {
  Complex value;
  int nodes = 0;
  double change = 0.0;  // |I(nodes) - I(nodes/2)|
};

// prod_k (1/2 pi i) oint_{C_k} dw_k f(w_1, ..., w_n) by the product trapezoid
// rule; circle k is sampled at angles 2 pi (j + k/(n+1))/nodes so that nodes of
// coinciding circles never collide. The outermost index runs in parallel.
template <class Fn>
Complex contour_trapezoid(const std::vector<Circle>& circles, int nodes, Fn f) {
  const int n = static_cast<int>(circles.size());
  if (n == 0) return f(std::vector<Complex>{});
  std::vector<std::vector<Complex>> w(n, std::vector<Complex>(nodes)), jac(n, std::vector<Complex>(nodes));
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < nodes; ++j) {
      const double th = 2.0 * std::numbers::pi * (j + static_cast<double>(k) / (n + 1)) / nodes;
      const Complex e = circles[k].radius * Complex(std::cos(th), std::sin(th));
      w[k][j] = circles[k].center + e;
      jac[k][j] = e / static_cast<double>(nodes);
    }
  std::vector<Complex> partial(nodes);
  parallel_for(static_cast<std::size_t>(nodes), [&](std::size_t j0) {
    std::vector<Complex> pt(n);
    std::vector<int> idx(n, 0);
    idx[0] = static_cast<int>(j0);
    Complex acc(0.0, 0.0);
    while (true) {
      Complex weight(1.0, 0.0);
      for (int k = 0; k < n; ++k) {
        pt[k] = w[k][idx[k]];
        weight *= jac[k][idx[k]];
      }
      acc += weight * f(pt);
      int k = n - 1;
      while (k >= 1 && ++idx[k] == nodes) idx[k--] = 0;
      if (k < 1) break;
    }
    partial[j0] = acc;
  });
  Complex total(0.0, 0.0);
  for (const auto& v : partial) total += v;
  return total;
}

// Value at spec.nodes, with the change from half as many nodes as the error
// estimate.
template <class Fn>
QuadratureResult contour_integral(const ContourSpec& spec, Fn f, double tol) {
  QuadratureResult r;
  r.nodes = spec.nodes;
  r.value = contour_trapezoid(spec.circles, spec.nodes, f);
  if (spec.circles.empty()) return r;
  const Complex coarse = contour_trapezoid(spec.circles, std::max(2, spec.nodes / 2), f);
  r.change = std::abs(r.value - coarse);
  if (r.change > tol * std::max(1.0, std::abs(r.value)))
    throw QuadratureNotConverged("quadrature changed by " + std::to_string(r.change) + " under node doubling");
  return r;
}

// ---------------------------------------------------------------------------
// G_nu as an n-fold contour integral.

namespace detail {

// y_{k}/(1 - q w y_k) prod_{j<k} (1 - w y_j)/(1 - q w y_j)
inline Complex y_factor(const Complex& w, int k, const ModelParams<Complex>& p) {
  const Complex yk = p.y_at(k);
  Complex r = yk / (1.0 - p.q * w * yk);
  for (int j = 1; j < k; ++j) {
    const Complex yj = p.y_at(j);
    r *= (1.0 - w * yj) / (1.0 - p.q * w * yj);
  }
  return r;
}

// prod_{i<j} (w_j - w_i)/(q w_j - w_i) (1 - q w_i w_j)/(1 - w_i w_j)
inline Complex pair_factor(const std::vector<Complex>& w, const Complex& q) {
  Complex r(1.0, 0.0);
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = i + 1; j < w.size(); ++j)
      r *= (w[j] - w[i]) / (q * w[j] - w[i]) * (1.0 - q * w[i] * w[j]) / (1.0 - w[i] * w[j]);
  return r;
}

inline int largest_column(const Config& nu, const ModelParams<Complex>& p) {
  return std::max(nu.max_part(), static_cast<int>(p.y.size()));
}

}  // namespace detail

// Poles the contours of the G integral must avoid.
inline ContourConstraints g_contour_constraints(const Config& nu, const std::vector<Complex>& x,
                                                const ModelParams<Complex>& p) {
  ContourConstraints k;
  k.q = p.q;
  k.q_reciprocal = true;
  k.enclose = x;
  for (const auto& xj : x) {
    k.exclude.push_back(p.q * xj);
    if (std::abs(p.q * xj) > 0.0) k.exclude.push_back(1.0 / (p.q * xj));
  }
  for (int j = 1; j <= std::max(1, detail::largest_column(nu, p)); ++j) {
    const Complex qy = p.q * p.y_at(j);
    if (std::abs(qy) > 0.0) k.exclude.push_back(1.0 / qy);
  }
  k.exclude.push_back(p.a);
  if (std::abs(p.a) > 0.0) k.exclude.push_back(1.0 / p.a);
  if (!p.c_infinite) {
    k.exclude.push_back(p.c);
    if (std::abs(p.c) > 0.0) k.exclude.push_back(1.0 / p.c);
  }
  return k;
}

// Integrand of the n-fold formula: Z_{L+n}(x, 1/w) times the explicit factors.
inline Complex g_integrand(const Config& nu, const std::vector<Complex>& x, const ModelParams<Complex>& p,
                           const std::vector<Complex>& w) {
  const Complex q = p.q;
  Complex r = detail::pair_factor(w, q);
  for (std::size_t i = 0; i < w.size(); ++i) {
    for (const auto& xj : x) r *= (q * w[i] - xj) / (w[i] - xj) * (1.0 - w[i] * xj) / (1.0 - q * w[i] * xj);
    const Complex bw = p.c_infinite ? p.a * (1.0 - q * w[i] * w[i]) / (w[i] - p.a)
                                    : p.a * p.c * (q * w[i] * w[i] - 1.0) / ((w[i] - p.a) * (w[i] - p.c));
    r *= bw * detail::y_factor(w[i], nu.parts()[i], p);
  }
  std::vector<Complex> all = x;
  for (const auto& wi : w) all.push_back(1.0 / wi);
  return r * z_subset_kuperberg(make_spec(all, p));
}

inline QuadratureResult g_contour_result(const Config& nu, const std::vector<Complex>& x,
                                         const ModelParams<Complex>& p, const ContourSpec& contours,
                                         double tol = 1e-9) {
  const int n = nu.size();
  if (static_cast<int>(contours.circles.size()) != n) throw ContourInvalid("need one contour per particle");
  if (n == 0) return {z_subset_kuperberg(make_spec(x, p)), 0, 0.0};
  validate_contours(contours, g_contour_constraints(nu, x, p));
  return contour_integral(contours, [&](const std::vector<Complex>& w) { return g_integrand(nu, x, p, w); }, tol);
}

inline Complex g_contour(const Config& nu, const std::vector<Complex>& x, const ModelParams<Complex>& p,
                         const ContourSpec& contours, double tol = 1e-9) {
  return g_contour_result(nu, x, p, contours, tol).value;
}

inline Complex g_contour(const Config& nu, const std::vector<Complex>& x, const ModelParams<Complex>& p,
                         int nodes = 256, double tol = 1e-9) {
  return g_contour(nu, x, p, make_contours(g_contour_constraints(nu, x, p), nu.size(), nodes), tol);
}

// ---------------------------------------------------------------------------
// Recursion properties of G_nu(x | Y^{-1}).

struct GCheck {
  std::string name;
  bool holds = false;
  double residual = 0.0;
};

struct GRecursionReport {
  std::vector<GCheck> checks;
  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const GCheck& c) { return c.holds; });
  }
};

namespace detail {

// G_nu(x | Y^{-1}) with Y = (Y_1, ..., Y_K) and the tail value repeated.
inline Complex g_inverted(const Config& nu, const std::vector<Complex>& x, ModelParams<Complex> p,
                          const std::vector<Complex>& Y) {
  p.y.clear();
  for (const auto& v : Y) p.y.push_back(1.0 / v);
  return partition_G(nu, Config{}, x, p);
}

}  // namespace detail

// p.y holds the alphabet Y; the substitution y -> 1/y is applied here.
inline GRecursionReport verify_g_recursion_suite(const Config& nu, const std::vector<Complex>& x,
                                                 const ModelParams<Complex>& p, double tol = 1e-6) {
  GRecursionReport rep;
  if (nu.empty()) return rep;
  const int L = static_cast<int>(x.size());
  if (L < nu.size()) throw ArityError("need at least |nu| spectral parameters");
  const int k1 = nu.max_part();
  std::vector<Complex> Y;
  for (int j = 1; j <= k1 + 1; ++j) Y.push_back(p.y_at(j));
  const Complex q = p.q;
  auto G = [&](const Complex& yk) {
    auto Yk = Y;
    Yk[k1 - 1] = yk;
    return detail::g_inverted(nu, x, p, Yk);
  };

  // Residue at Y_{nu_1} = q x_1 as a small-circle average of (Y - q x_1) G.
  const Complex pole = q * x[0];
  double sep = std::abs(pole);
  for (int i = 1; i < L; ++i) sep = std::min(sep, std::abs(q * x[i] - pole));
  for (int j = 1; j <= k1; ++j)
    if (j != k1) sep = std::min(sep, std::abs(Y[j - 1] - pole));
  const double eps = 1e-2 * std::max(sep, 1e-12);
  const int m = 16;
  Complex res(0.0, 0.0), second(0.0, 0.0);
  for (int t = 0; t < m; ++t) {
    const Complex e = eps * std::polar(1.0, 2.0 * std::numbers::pi * t / m);
    const Complex g = G(pole + e);
    res += e * g / static_cast<double>(m);
    second += e * e * g / static_cast<double>(m);
  }
  Complex rhs = (1.0 - q) * x[0] * h_func(x[0], p);
  for (int j = 1; j < L; ++j)
    rhs *= (x[j] - q * x[0]) / (x[j] - x[0]) * (1.0 - x[0] * x[j]) / (1.0 - q * x[0] * x[j]);
  for (int j = 1; j < k1; ++j) rhs *= (Y[j - 1] - x[0]) / (Y[j - 1] - q * x[0]);
  const Config rest(std::vector<int>(nu.parts().begin() + 1, nu.parts().end()));
  rhs *= detail::g_inverted(rest, std::vector<Complex>(x.begin() + 1, x.end()), p, Y);
  const double res_err = std::abs(res - rhs) / std::max(std::abs(rhs), 1e-300);
  rep.checks.push_back({"residue_at_qx1", res_err <= tol, res_err});
  const double order = std::abs(second) / std::max(eps * std::abs(res), 1e-300);
  rep.checks.push_back({"pole_is_simple", order <= tol, order});

  // Decay as Y_{nu_1} grows, measured against a generic value.
  const Complex generic = G(Y[k1 - 1]);
  const double scale = std::max(std::abs(generic), std::abs(rhs / (Y[k1 - 1] - pole)));
  const double far = std::abs(G(Complex(1e6, 0.0))) / std::max(scale, 1e-300);
  rep.checks.push_back({"decay_at_infinity", far <= 1e-4, far});

  // Symmetry in the x alphabet.
  std::vector<Complex> rev(x.rbegin(), x.rend());
  const double sym = residual_of(detail::g_inverted(nu, rev, p, Y), generic) / std::max(1.0, std::abs(generic));
  rep.checks.push_back({"x_symmetry", sym <= 1e-10, sym});
  return rep;
}

// ---------------------------------------------------------------------------
// Cauchy identity.

template <class F>
struct CauchyReport {
  ConvergenceGuard guard;
  F lhs = F(0);
  F rhs = F(0);
  std::vector<double> residuals;  // residuals[k-1]: LHS truncated at max part <= k
  double residual = 0.0;
  double decay_rate = 0.0;  // geometric mean ratio of successive residuals over the second half
  bool decays = false;
  bool holds(double tol) const { return residual <= tol && decays; }
};

// Sum over kappa with max part <= cutoff of G_{kappa/mu}(x) F_{kappa/nu}(z)
// against the closed right-hand side.
template <class F>
CauchyReport<F> cauchy_check(const Config& mu, const Config& nu, const std::vector<F>& x, const std::vector<F>& z,
                             const ModelParams<F>& p, int cutoff, double rho = 0.95) {
  CauchyReport<F> rep;
  rep.guard = cauchy_guard(x, z, p, cutoff, rho);
  if (!rep.guard.passes())
    throw GuardViolated("Cauchy convergence condition fails (max ratio " + std::to_string(rep.guard.max_ratio) + ")");
  if (cutoff < std::max(mu.max_part(), nu.max_part())) throw CutoffTooSmall("cutoff below max(mu_1, nu_1)");

  F cross(1);
  for (const auto& zi : z)
    for (const auto& xj : x)
      cross *= quot((xj - p.q * zi) * (F(1) - zi * xj), (xj - zi) * (F(1) - p.q * zi * xj), "x_j - z_i");
  if (mu.empty()) {
    F hz(1);
    for (const auto& zi : z) hz *= h_func(zi, p);
    rep.rhs = hz * cross * g_subset(nu, x, p);
  } else {
    F sum(0);
    for (const auto& lam : configs_up_to(mu.max_part())) {
      const F f = partition_F(mu, lam, z, p);
      if (is_zero(f)) continue;
      sum += f * partition_G(nu, lam, x, p);
    }
    rep.rhs = cross * sum;
  }

  std::vector<F> by_front(cutoff + 1, F(0));
  for (const auto& kappa : configs_up_to(cutoff)) {
    const F g = partition_G(kappa, mu, x, p);
    if (is_zero(g)) continue;
    by_front[kappa.max_part()] += g * partition_F(kappa, nu, z, p);
  }
  F running(0);
  for (int k = 0; k <= cutoff; ++k) {
    running += by_front[k];
    if (k >= 1) rep.residuals.push_back(residual_of(running, rep.rhs) / std::max(1.0, magnitude(rep.rhs)));
  }
  rep.lhs = running;
  rep.residual = rep.residuals.back();
  const int half = cutoff / 2;
  const double r_hi = rep.residuals.back(), r_lo = rep.residuals[std::max(0, half - 1)];
  if (r_lo <= 1e-14) {
    rep.decay_rate = 0.0;
    rep.decays = r_hi <= 1e-13;
  } else {
    rep.decay_rate = std::pow(std::max(r_hi, 1e-300) / r_lo, 1.0 / std::max(1, cutoff - half));
    rep.decays = rep.decay_rate < 1.0 || r_hi <= 1e-13;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Orthogonality conjecture at c = infinity.

namespace detail {

inline int orth_columns(const Config& kappa, const Config& nu) { return std::max(kappa.max_part(), nu.max_part()); }

}  // namespace detail

// Poles to avoid: the contour surrounds 1/y_j and nothing else.
inline ContourConstraints orthogonality_constraints(const Config& kappa, const Config& nu,
                                                    const ModelParams<Complex>& p) {
  ContourConstraints k;
  k.q = p.q;
  const int cols = std::max(1, detail::orth_columns(kappa, nu));
  for (int j = 1; j <= cols; ++j) {
    const Complex y = p.y_at(j);
    k.enclose.push_back(1.0 / y);
    if (std::abs(p.q) > 0.0) k.exclude.push_back(y / p.q);
    if (std::abs(p.q * y) > 0.0) k.exclude.push_back(1.0 / (p.q * y));
  }
  k.exclude.push_back(Complex(0.0, 0.0));
  k.exclude.push_back(Complex(1.0, 0.0));
  k.exclude.push_back(Complex(-1.0, 0.0));
  k.exclude.push_back(p.a);
  if (std::abs(p.a) > 0.0) k.exclude.push_back(1.0 / p.a);
  return k;
}

// A single circle shared by all variables, as the conjecture prescribes.
inline ContourSpec orthogonality_contours(const Config& kappa, const Config& nu, const ModelParams<Complex>& p,
                                          int nodes = 128) {
  auto k = orthogonality_constraints(kappa, nu, p);
  Complex center(0.0, 0.0);
  for (const auto& z : k.enclose) center += z;
  center /= static_cast<double>(k.enclose.size());
  double r_in = 0.0, r_out = std::numeric_limits<double>::infinity();
  for (const auto& z : k.enclose) r_in = std::max(r_in, std::abs(z - center));
  for (const auto& z : k.exclude) r_out = std::min(r_out, std::abs(z - center));
  // q C outside C and 1/C outside C bound the radius as well
  r_out = std::min(r_out, std::abs(1.0 - p.q) * std::abs(center) / (1.0 + std::abs(p.q)));
  if (!(r_in < r_out)) throw ContourInvalid("no common circle around the points 1/y_j");
  ContourSpec s;
  s.nodes = nodes;
  s.nested = false;
  for (int i = 0; i < std::max(1, nu.size()); ++i) s.circles.push_back({center, 0.5 * (r_in + r_out)});
  s.circles.resize(nu.size());
  return s;
}

// The n-fold integral of the conjecture; conjecturally delta_{kappa, nu}.
// p.c_infinite must be set; F_kappa uses the c -> infinity weights.
// The one-variable factor is (a - w)(1 - q w^2)/(w (1 - a w)(1 - w^2)), the
// ratio of the c = infinity integrand of G to the Cauchy kernel. With
// as_printed the factor (w - a) is used instead, which yields
// (-1)^n delta_{kappa, nu}.
inline QuadratureResult orthogonality_result(const Config& kappa, const Config& nu, const ModelParams<Complex>& p,
                                             const ContourSpec& contours, double tol = 1e-9,
                                             bool as_printed = false) {
  if (!p.c_infinite) throw std::invalid_argument("orthogonality_check requires c_infinite");
  const int n = nu.size();
  if (kappa.size() > n) throw ArityError("|kappa| must not exceed |nu|");
  if (static_cast<int>(contours.circles.size()) != n) throw ContourInvalid("need one contour per particle");
  if (n == 0) return {Complex(kappa.empty() ? 1.0 : 0.0, 0.0), 0, 0.0};
  validate_contours(contours, orthogonality_constraints(kappa, nu, p));
  const int cols = detail::orth_columns(kappa, nu);
  auto f = [&, as_printed](const std::vector<Complex>& w) {
    Complex r = detail::pair_factor(w, p.q);
    for (int i = 0; i < n; ++i)
      r *= (as_printed ? w[i] - p.a : p.a - w[i]) / (w[i] * (1.0 - p.a * w[i])) * (1.0 - p.q * w[i] * w[i]) / (1.0 - w[i] * w[i]) *
           detail::y_factor(w[i], nu.parts()[i], p);
    return r * partition_F(kappa, Config{}, w, p, cols);
  };
  return contour_integral(contours, f, tol);
}

inline Complex orthogonality_check(const Config& kappa, const Config& nu, const ModelParams<Complex>& p,
                                   const ContourSpec& contours, double tol = 1e-9) {
  return orthogonality_result(kappa, nu, p, contours, tol).value;
}

inline Complex orthogonality_check(const Config& kappa, const Config& nu, const ModelParams<Complex>& p,
                                   int nodes = 128, double tol = 1e-9) {
  return orthogonality_check(kappa, nu, p, orthogonality_contours(kappa, nu, p, nodes), tol);
}

}  // namespace hsv

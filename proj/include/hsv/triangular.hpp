#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "field.hpp"
#include "matrix.hpp"
#include "pfaffian.hpp"
#include "shuffle.hpp"
#include "weights.hpp"

namespace hsv {

inline constexpr int kEnumerationCap = 7;

template <class F>
struct TriangularSpec {
  std::vector<F> x;
  ModelParams<F> params;
  F u = F(1);

  int m() const { return static_cast<int>(x.size()); }
};

template <class F>
TriangularSpec<F> make_spec(std::vector<F> x, const ModelParams<F>& p, F u = F(1)) {
  return TriangularSpec<F>{std::move(x), p, u};
}

// ---------------------------------------------------------------------------
// Kernels.

// M(x, y) = (1-q)(x-y)/((1-xy)(1-qxy))
template <class F>
F kernel_m(const F& x, const F& y, const F& q) {
  return quot((F(1) - q) * (x - y), (F(1) - x * y) * (F(1) - q * x * y), "(1 - x_i x_j)(1 - q x_i x_j)");
}

// Q(x, y) = (1-h(x))(1-h(y)) - h(x)h(y)/(ac) (1-q)xy/(1-qxy)
template <class F>
F kernel_q(const F& x, const F& y, const ModelParams<F>& p) {
  const F hx = h_func(x, p), hy = h_func(y, p);
  return (F(1) - hx) * (F(1) - hy) -
         hx * hy * p.inv_ac() * quot((F(1) - p.q) * x * y, F(1) - p.q * x * y, "1 - q x_i x_j");
}

// Q^e(x, y) = S(x, y) + u^2 q/(ac) xy h(x)h(y) (x-y)/(1-qxy)
template <class F>
F kernel_qe(const F& x, const F& y, const ModelParams<F>& p, const F& u) {
  return kernel_s(x, y) + u * u * p.q * p.inv_ac() * x * y * h_func(x, p) * h_func(y, p) *
                              quot(x - y, F(1) - p.q * x * y, "1 - q x_i x_j");
}

// Q^o(x, y) = xy S(x, y) + u^2/(ac) h(x)h(y) (x-y)/(1-qxy)
template <class F>
F kernel_qo(const F& x, const F& y, const ModelParams<F>& p, const F& u) {
  return x * y * kernel_s(x, y) +
         u * u * p.inv_ac() * h_func(x, p) * h_func(y, p) * quot(x - y, F(1) - p.q * x * y, "1 - q x_i x_j");
}

namespace detail {

// prod_{i<j} (1 - x_i x_j)/(x_i - x_j)
template <class F>
F cross_prefactor(const std::vector<F>& x) {
  F r(1);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      if (is_zero(x[i] - x[j])) throw DegeneratePoint("x_i = x_j in Pfaffian prefactor");
      if (is_zero(F(1) - x[i] * x[j])) throw DegeneratePoint("x_i x_j = 1 in Pfaffian prefactor");
      r *= (F(1) - x[i] * x[j]) / (x[i] - x[j]);
    }
  return r;
}

template <class F>
std::vector<F> pick(const std::vector<F>& x, std::uint32_t set, bool inside = true) {
  std::vector<F> r;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (static_cast<bool>(set >> i & 1u) == inside) r.push_back(x[i]);
  return r;
}

// Column transfer over the triangle: line i rises in column i to its
// boundary vertex at height i and runs right; the state is the set of
// occupied horizontal lines to the right of the current column.
template <class F, class Bulk, class Bound>
F triangle_sum(const std::vector<F>& x, Bulk bulk, Bound bound) {
  const int m = static_cast<int>(x.size());
  std::map<std::uint32_t, F> cur{{0u, F(1)}};
  for (int k = 0; k < m; ++k) {
    // partial states: (horizontal bits, vertical occupation)
    std::map<std::pair<std::uint32_t, int>, F> part;
    for (const auto& [s, w] : cur) part[{s, 0}] += w;
    for (int i = 0; i < k; ++i) {
      const F z = x[i] * x[k];
      std::array<F, 16> tab;
      for (int e = 0; e < 16; ++e) tab[e] = bulk(e >> 3 & 1, e >> 2 & 1, e >> 1 & 1, e & 1, z);
      std::map<std::pair<std::uint32_t, int>, F> nxt;
      for (const auto& [key, w] : part) {
        const auto [s, v] = key;
        const int h = s >> i & 1u;
        for (int vo = 0; vo < 2; ++vo) {
          const int ho = v + h - vo;
          if (ho < 0 || ho > 1) continue;
          const F& wt = tab[v << 3 | h << 2 | vo << 1 | ho];
          if (is_zero(wt)) continue;
          const std::uint32_t s2 = ho ? (s | 1u << i) : (s & ~(1u << i));
          nxt[{s2, vo}] += w * wt;
        }
      }
      part = std::move(nxt);
    }
    std::array<F, 4> kb;
    for (int e = 0; e < 4; ++e) kb[e] = bound(e >> 1, e & 1, x[k]);
    std::map<std::uint32_t, F> next_cur;
    for (const auto& [key, w] : part) {
      const auto [s, v] = key;
      for (int ho = 0; ho < 2; ++ho) {
        const F& wk = kb[v << 1 | ho];
        if (is_zero(wk)) continue;
        next_cur[ho ? (s | 1u << k) : s] += w * wk;
      }
    }
    cur = std::move(next_cur);
  }
  auto it = cur.find(0u);
  return it == cur.end() ? F(0) : it->second;
}

}  // namespace detail

// Z_m by summing over all path configurations of the triangle.
template <class F>
F z_enumerate(const TriangularSpec<F>& s, int cap = kEnumerationCap) {
  if (s.m() > cap) throw CapExceeded("z_enumerate: m exceeds enumeration cap");
  const auto& p = s.params;
  return detail::triangle_sum(
      s.x, [&](int i, int j, int k, int l, const F& z) { return bulk_weight(i, j, k, l, z, Variant::stochastic, p.q); },
      [&](int i, int j, const F& x) { return boundary_weight(i, j, x, p); });
}

// The cleared numerator prod (a-x_i)(c-x_i) prod_{i<j} (1-q x_i x_j) Z_m,
// summed with polynomial weights so it stays finite at 1 = q x_i x_j.
template <class F>
F z_numerator(const TriangularSpec<F>& s, int cap = kEnumerationCap) {
  if (s.m() > cap) throw CapExceeded("z_numerator: m exceeds enumeration cap");
  const auto& p = s.params;
  return detail::triangle_sum(
      s.x, [&](int i, int j, int k, int l, const F& z) { return bulk_numerator(i, j, k, l, z, p.q); },
      [&](int i, int j, const F& x) { return boundary_numerator(i, j, x, p); });
}

// Z_m at a = -c = 1 by the Kuperberg Pfaffian; zero for odd m.
template <class F>
F z_kuperberg(const std::vector<F>& x, const F& q) {
  const int m = static_cast<int>(x.size());
  F pre = detail::cross_prefactor(x);
  if (m % 2) return F(0);
  for (const F& xi : x) pre *= xi;
  const auto mat = skew_from<F>(m, [&](int i, int j) { return kernel_m(x[i], x[j], q); });
  return pre * pfaffian(mat);
}

namespace detail {

// Coefficients of the interpolating polynomial through (t_k, v_k), Newton form
// converted to the monomial basis.
template <class F>
std::vector<F> interpolate(const std::vector<F>& t, std::vector<F> v) {
  const int n = static_cast<int>(t.size());
  for (int j = 1; j < n; ++j)
    for (int i = n - 1; i >= j; --i) v[i] = (v[i] - v[i - 1]) / (t[i] - t[i - j]);
  std::vector<F> c(n, F(0));
  for (int k = n - 1; k >= 0; --k) {
    // c <- c * (T - t_k) + v_k
    for (int d = n - 1; d >= 1; --d) c[d] = c[d - 1] - t[k] * c[d];
    c[0] = v[k] - t[k] * c[0];
  }
  return c;
}


template <class F>
F z_pfaffian_direct(std::vector<F> x, const ModelParams<F>& p) {
  if (x.size() % 2) x.push_back(F(1));
  const F pre = cross_prefactor(x);
  const auto mat = skew_from<F>(static_cast<int>(x.size()), [&](int i, int j) {
    return kernel_s(x[i], x[j]) * kernel_q(x[i], x[j], p);
  });
  return pre * pfaffian(mat);
}

}  // namespace detail

// Single Pfaffian with kernel S Q; odd m appends x = 1.
//
// When a = 1 (or c = 1) the appended point is a pole of h, although Z_m
// itself is regular there. prod_i (a - x_i) Z_m is a polynomial of degree
// at most m in a, so it is interpolated from m + 1 other values of a and
// evaluated at a = 1.
template <class F>
F z_pfaffian(const TriangularSpec<F>& s) {
  const auto& p = s.params;
  const bool a_hit = is_zero(p.a - F(1));
  const bool c_hit = !p.c_infinite && is_zero(p.c - F(1));
  if (s.m() % 2 == 0 || (!a_hit && !c_hit)) return detail::z_pfaffian_direct(s.x, p);
  if (a_hit && c_hit) throw DegeneratePoint("a = c = 1");
  const int m = s.m();
  std::vector<F> t, v;
  for (int k = 0; static_cast<int>(t.size()) < m + 1; ++k) {
    const F tk = F(3 * k + 7) / F(3);
    bool clash = false;
    for (const F& xi : s.x) clash = clash || is_zero(tk - xi);
    if (clash) continue;
    ModelParams<F> q = p;
    (a_hit ? q.a : q.c) = tk;
    F pre(1);
    for (const F& xi : s.x) pre *= tk - xi;
    t.push_back(tk);
    v.push_back(pre * detail::z_pfaffian_direct(s.x, q));
  }
  const auto c = detail::interpolate(t, v);
  F at_one(0);
  for (int d = m; d >= 0; --d) at_one = at_one * F(1) + c[d];
  F den(1);
  for (const F& xi : s.x) den *= F(1) - xi;
  return quot(at_one, den, "1 - x_i");
}

// H_m sum_r (-1/(ac))^r sum_{|S|=2r} prod_S h/(1-h) prod_{S x S^c} (1-x_i x_j)/(x_i-x_j) Z^K_{2r}(x_S).
template <class F>
F z_subset_kuperberg(const TriangularSpec<F>& s) {
  const auto& p = s.params;
  const auto& x = s.x;
  const int m = s.m();
  std::vector<F> h(m), ratio(m);
  F H(1);
  for (int i = 0; i < m; ++i) {
    h[i] = h_func(x[i], p);
    if (is_zero(F(1) - h[i])) throw DegeneratePoint("1 - h(x_i) = 0 in subset form");
    ratio[i] = h[i] / (F(1) - h[i]);
    H *= F(1) - h[i];
  }
  const F coef = -p.inv_ac();
  F total(0);
  for (std::uint32_t set = 0; set < (1u << m); ++set) {
    const int sz = __builtin_popcount(set);
    if (sz % 2) continue;
    if (sz > 0 && is_zero(coef)) continue;
    F term = power(coef, sz / 2);
    for (int i = 0; i < m; ++i) {
      if (!(set >> i & 1u)) continue;
      term *= ratio[i];
      for (int j = 0; j < m; ++j) {
        if (set >> j & 1u) continue;
        if (is_zero(x[i] - x[j])) throw DegeneratePoint("x_i = x_j in subset form");
        term *= (F(1) - x[i] * x[j]) / (x[i] - x[j]);
      }
    }
    if (is_zero(term)) continue;
    total += term * z_kuperberg(detail::pick(x, set), p.q);
  }
  return H * total;
}

// Z_1 and Z_2 as symmetric functions.
template <class F>
SymFun<F> z1_function(const ModelParams<F>& p) {
  return SymFun<F>(1, [p](const std::vector<F>& x) { return F(1) - h_func(x[0], p); }, "Z1");
}

template <class F>
SymFun<F> z2_function(const ModelParams<F>& p) {
  return SymFun<F>(2, [p](const std::vector<F>& x) { return kernel_q(x[0], x[1], p); }, "Z2");
}

// Z_{2k} = Z_2^{*k}/k!, Z_{2k+1} = Z_1 * Z_2^{*k}/k!.
template <class F>
F z_shuffle(const TriangularSpec<F>& s, int cap = kShuffleArityCap) {
  const int m = s.m();
  if (m > cap) throw CapExceeded("z_shuffle: m exceeds shuffle cap");
  const int k = m / 2;
  SymFun<F> f = shuffle_power(z2_function(s.params), k, cap);
  if (m % 2) f = shuffle_product(z1_function(s.params), f, cap);
  F fact(1);
  for (int i = 2; i <= k; ++i) fact *= from_int<F>(i);
  return f(s.x) / fact;
}

namespace detail {

template <class F>
F alt_even(std::vector<F> x, const ModelParams<F>& p, const F& u) {
  if (x.size() % 2) x.push_back(F(1));
  const F pre = cross_prefactor(x);
  const auto mat = skew_from<F>(static_cast<int>(x.size()), [&](int i, int j) { return kernel_qe(x[i], x[j], p, u); });
  return pre * pfaffian(mat);
}

template <class F>
F alt_odd(std::vector<F> x, const ModelParams<F>& p, const F& u) {
  if (x.size() % 2 == 0) x.push_back(F(1));
  const int n = static_cast<int>(x.size());
  const F pre = cross_prefactor(x);
  Matrix<F> mat(n + 1, n + 1);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      mat(i, j) = kernel_qo(x[i], x[j], p, u);
      mat(j, i) = -mat(i, j);
    }
    mat(i, n) = -u * h_func(x[i], p);
    mat(n, i) = -mat(i, n);
  }
  return pre * pfaffian(mat);
}

}  // namespace detail

// Z_m(u; x) = Z^e_m + Z^o_m by the even and bordered odd Pfaffians.
template <class F>
F z_altform(const TriangularSpec<F>& s) {
  return detail::alt_even(s.x, s.params, s.u) + detail::alt_odd(s.x, s.params, s.u);
}

// Z_m(u; x) as the sum over subsets S of factorized terms.
template <class F>
F z_altform_subset(const TriangularSpec<F>& s) {
  const auto& p = s.params;
  const auto& x = s.x;
  const int m = s.m();
  std::vector<F> h(m);
  for (int i = 0; i < m; ++i) h[i] = h_func(x[i], p);
  F total(0);
  for (std::uint32_t set = 0; set < (1u << m); ++set) {
    const int sz = __builtin_popcount(set);
    const int r = sz / 2;
    if (r > 0 && is_zero(p.inv_ac())) continue;
    F term = power(-s.u, sz) * power(p.q, r * r) * power(p.inv_ac(), r);
    for (int i = 0; i < m; ++i) {
      const bool in = set >> i & 1u;
      if (in == (sz % 2 == 0)) term *= x[i];
    }
    for (int i = 0; i < m; ++i) {
      if (!(set >> i & 1u)) continue;
      term *= h[i];
      for (int j = 0; j < m; ++j) {
        if (set >> j & 1u) {
          if (j > i) term *= quot(F(1) - x[i] * x[j], F(1) - p.q * x[i] * x[j], "1 - q x_i x_j");
        } else {
          if (is_zero(x[i] - x[j])) throw DegeneratePoint("x_i = x_j in subset form");
          term *= (x[i] * x[j] - F(1)) / (x[i] - x[j]);
        }
      }
    }
    total += term;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Property suite.

struct ZCheck {
  std::string name;
  bool holds = false;
  double residual = 0.0;
};

struct ZPropertyReport {
  std::vector<ZCheck> checks;
  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const ZCheck& c) { return c.holds; });
  }
};

namespace detail {

template <class F>
bool close(double r) {
  return field_traits<F>::exact ? r == 0.0 : r <= 1e-9;
}

template <class F>
std::vector<F> without(const std::vector<F>& x, std::initializer_list<int> drop) {
  std::vector<F> r;
  for (int i = 0; i < static_cast<int>(x.size()); ++i)
    if (std::find(drop.begin(), drop.end(), i) == drop.end()) r.push_back(x[i]);
  return r;
}

}  // namespace detail

// Symmetry, the three specializations, the freezing relation of the cleared
// numerator at x_i = 1/(q x_j), and its degree in one variable.
// `sample_points` supplies generic values for the degree check.
template <class F>
ZPropertyReport verify_z_properties(const TriangularSpec<F>& s, const std::vector<F>& sample_points = {}) {
  ZPropertyReport rep;
  const int m = s.m();
  const auto& p = s.params;
  auto Z = [&](const std::vector<F>& x) { return z_enumerate(make_spec(x, p)); };
  auto Zt = [&](const std::vector<F>& x) { return z_numerator(make_spec(x, p)); };
  const F base = Z(s.x);

  {  // (i) every ordering of the alphabet
    double r = 0.0;
    std::vector<int> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    while (std::next_permutation(perm.begin(), perm.end())) {
      std::vector<F> y;
      for (int i : perm) y.push_back(s.x[i]);
      r = std::max(r, residual_of(Z(y), base));
    }
    rep.checks.push_back({"symmetry", detail::close<F>(r), r});
  }
  {  // (ii) x_i = 0
    double r = 0.0;
    for (int i = 0; i < m; ++i) {
      auto y = s.x;
      y[i] = F(0);
      r = std::max(r, residual_of(Z(y), F(0)));
    }
    rep.checks.push_back({"x_zero", detail::close<F>(r), r});
  }
  {  // (iii) x_i = +-1 drops x_i
    double r = 0.0;
    for (int i = 0; i < m; ++i)
      for (const F& sgn : {F(1), F(-1)}) {
        auto y = s.x;
        y[i] = sgn;
        r = std::max(r, residual_of(Z(y), Z(detail::without(s.x, {i}))));
      }
    rep.checks.push_back({"x_unit", detail::close<F>(r), r});
  }
  {  // (iv) x_i = 1/x_j drops both
    double r = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        if (i == j) continue;
        auto y = s.x;
        y[i] = quot(F(1), s.x[j], "x_j");
        r = std::max(r, residual_of(Z(y), Z(detail::without(s.x, {i, j}))));
      }
    rep.checks.push_back({"x_inverse_pair", detail::close<F>(r), r});
  }
  if (!p.c_infinite && m >= 2) {  // (v) freezing at x_i = 1/(q x_j)
    double r = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        if (i == j) continue;
        const F xj = s.x[j];
        auto y = s.x;
        y[i] = quot(F(1), p.q * xj, "q x_j");
        F rhs = -p.a * p.c * (F(1) - p.q) * power(p.q, m - 3) * (F(1) - xj * xj) *
                (F(1) - quot(F(1), p.q * p.q * xj * xj, "q x_j"));
        for (int k = 0; k < m; ++k) {
          if (k == i || k == j) continue;
          rhs *= (F(1) - s.x[k] / (p.q * xj)) * (F(1) - s.x[k] * xj);
        }
        rhs *= Zt(detail::without(s.x, {i, j}));
        r = std::max(r, residual_of(Zt(y), rhs));
      }
    rep.checks.push_back({"numerator_freezing", detail::close<F>(r), r});
  }
  if (m >= 1) {  // (vi) degree in x_1 of the numerator is at most m + 1
    std::vector<F> t = sample_points;
    for (int k = static_cast<int>(t.size()); k < m + 3; ++k) t.push_back(F(k + 2) / F(k + 3) + F(k));
    t.resize(m + 3);
    std::vector<F> v;
    for (const F& tk : t) {
      auto y = s.x;
      y[0] = tk;
      v.push_back(Zt(y));
    }
    const auto c = detail::interpolate(t, v);
    double r = residual_of(c[m + 2], F(0));
    double scale = 0.0;
    for (const F& ck : c) scale = std::max(scale, magnitude(ck));
    if (!field_traits<F>::exact && scale > 0.0) r /= scale;
    rep.checks.push_back({"numerator_degree", detail::close<F>(r), r});
  }
  return rep;
}

}  // namespace hsv

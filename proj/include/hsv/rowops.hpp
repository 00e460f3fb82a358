#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "config.hpp"
#include "field.hpp"
#include "weights.hpp"

namespace hsv {

enum class RowKind { A, Bdot };

template <class F>
struct RowSpec {
  RowKind kind = RowKind::A;
  F spectral = F(0);
};

template <class F>
std::vector<RowSpec<F>> a_rows(const std::vector<F>& xs) {
  std::vector<RowSpec<F>> r;
  for (const F& x : xs) r.push_back({RowKind::A, x});
  return r;
}

template <class F>
std::vector<RowSpec<F>> b_rows(const std::vector<F>& zs) {
  std::vector<RowSpec<F>> r;
  for (const F& z : zs) r.push_back({RowKind::Bdot, z});
  return r;
}

namespace detail {

// Weight tables of one double row at one column.
//   bot[vin][rin][lout][vout]: bottom row (paths run leftward), z = s / y_j
//   top[vin][tl][vout][tr]:    top row (paths run rightward),  z = s * y_j
template <class F>
struct ColumnTables {
  std::array<F, 16> bot;
  std::array<F, 16> top;
};

inline int idx4(int a, int b, int c, int d) { return a << 3 | b << 2 | c << 1 | d; }

template <class F>
ColumnTables<F> column_tables(const RowSpec<F>& row, int col, const ModelParams<F>& p) {
  ColumnTables<F> t;
  const F y = p.y_at(col);
  const F zb = quot(row.spectral, y, "y_j");
  const F zt = row.spectral * y;
  const Variant tv = row.kind == RowKind::A ? Variant::stochastic : Variant::dotted;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) {
          if (a + b != c + d) {
            t.bot[idx4(a, b, c, d)] = F(0);
            t.top[idx4(a, b, c, d)] = F(0);
            continue;
          }
          // physical labels of the bottom vertex: bottom vin, left lout, top vout, right rin
          t.bot[idx4(a, b, c, d)] = bulk_weight(a, c, d, b, zb, Variant::rotated, p.q);
          t.top[idx4(a, b, c, d)] = bulk_weight(a, b, c, d, zt, tv, p.q);
        }
  return t;
}

inline int nominal_top_edge(RowKind k) { return k == RowKind::A ? 0 : 1; }

}  // namespace detail

// ---------------------------------------------------------------------------
// Single double-row operator on a bra.

// <mu| -> sum_nu <mu|X(s)|nu> <nu| with X = A or Bdot on n_columns columns.
// The sweep carries (output bits so far, input bits still to read, channel).
template <class F>
SparseState<F> apply_double_row(const SparseState<F>& bra, RowKind kind, const F& spectral, int n_columns,
                                const ModelParams<F>& p) {
  if (n_columns > kMaxSites) throw TruncationTooSmall("n_columns beyond supported range");
  for (const auto& [mu, w] : bra)
    if (mu.max_part() > n_columns)
      throw TruncationTooSmall("bra support " + mu.str() + " exceeds n_columns");
  const RowSpec<F> row{kind, spectral};
  std::unordered_map<std::uint64_t, F> cur, nxt;
  for (int b = 0; b < 2; ++b)
    for (int t = 0; t < 2; ++t) {
      const F k = boundary_weight(b, t, spectral, p);
      if (is_zero(k)) continue;
      for (const auto& [mu, w] : bra) {
        auto key = mu.mask() << 2 | static_cast<std::uint64_t>(b | t << 1);
        auto [it, fresh] = cur.emplace(key, w * k);
        if (!fresh) it->second += w * k;
      }
    }
  for (int j = 1; j <= n_columns; ++j) {
    const auto tab = detail::column_tables(row, j, p);
    nxt.clear();
    const std::uint64_t bit = std::uint64_t{1} << (j - 1);
    for (const auto& [key, w] : cur) {
      if (is_zero(w)) continue;
      const std::uint64_t mask = key >> 2;
      const int bl = key & 1, tl = key >> 1 & 1;
      const int vin = (mask & bit) ? 1 : 0;
      for (int rin = 0; rin < 2; ++rin) {
        const int vmid = vin + rin - bl;
        if (vmid < 0 || vmid > 1) continue;
        const F& wb = tab.bot[detail::idx4(vin, rin, bl, vmid)];
        if (is_zero(wb)) continue;
        for (int vout = 0; vout < 2; ++vout) {
          const int tr = vmid + tl - vout;
          if (tr < 0 || tr > 1) continue;
          const F& wt = tab.top[detail::idx4(vmid, tl, vout, tr)];
          if (is_zero(wt)) continue;
          const std::uint64_t m2 = vout ? (mask | bit) : (mask & ~bit);
          const std::uint64_t k2 = m2 << 2 | static_cast<std::uint64_t>(rin | tr << 1);
          auto [it, fresh] = nxt.emplace(k2, w * wb * wt);
          if (!fresh) it->second += w * wb * wt;
        }
      }
    }
    std::swap(cur, nxt);
  }
  const std::uint64_t want = static_cast<std::uint64_t>(detail::nominal_top_edge(kind)) << 1;
  SparseState<F> out;
  for (const auto& [key, w] : cur)
    if ((key & 3) == want) add_to(out, Config::from_mask(key >> 2), w);
  return out;
}

// Dense variant over all 2^n_columns configurations (index = occupation mask),
// used for float Markov-chain propagation.
template <class F>
std::vector<F> apply_double_row_dense(const std::vector<F>& in, RowKind kind, const F& spectral, int n_columns,
                                      const ModelParams<F>& p) {
  const std::size_t n_conf = std::size_t{1} << n_columns;
  if (in.size() != n_conf) throw std::invalid_argument("dense state has wrong size");
  const RowSpec<F> row{kind, spectral};
  std::vector<F> cur(n_conf * 4, F(0)), nxt(n_conf * 4, F(0));
  for (int ch = 0; ch < 4; ++ch) {
    const F k = boundary_weight(ch & 1, ch >> 1, spectral, p);
    for (std::size_t m = 0; m < n_conf; ++m) cur[m << 2 | ch] = in[m] * k;
  }
  for (int j = 1; j <= n_columns; ++j) {
    const auto tab = detail::column_tables(row, j, p);
    std::fill(nxt.begin(), nxt.end(), F(0));
    const std::size_t bit = std::size_t{1} << (j - 1);
    for (std::size_t key = 0; key < cur.size(); ++key) {
      const F w = cur[key];
      if (is_zero(w)) continue;
      const std::size_t mask = key >> 2;
      const int bl = key & 1, tl = key >> 1 & 1;
      const int vin = (mask & bit) ? 1 : 0;
      for (int rin = 0; rin < 2; ++rin) {
        const int vmid = vin + rin - bl;
        if (vmid < 0 || vmid > 1) continue;
        const F wb = w * tab.bot[detail::idx4(vin, rin, bl, vmid)];
        for (int vout = 0; vout < 2; ++vout) {
          const int tr = vmid + tl - vout;
          if (tr < 0 || tr > 1) continue;
          const std::size_t m2 = vout ? (mask | bit) : (mask & ~bit);
          nxt[m2 << 2 | static_cast<std::size_t>(rin | tr << 1)] += wb * tab.top[detail::idx4(vmid, tl, vout, tr)];
        }
      }
    }
    std::swap(cur, nxt);
  }
  const int want = detail::nominal_top_edge(kind) << 1;
  std::vector<F> out(n_conf, F(0));
  for (std::size_t m = 0; m < n_conf; ++m) out[m] = cur[m << 2 | static_cast<std::size_t>(want)];
  return out;
}

// ---------------------------------------------------------------------------
// Stacks of double rows: matrix elements by column transfer.
//
// The horizontal state at a column boundary of an R-row stack is a 2R-bit
// word: bit 2r is the bottom-row edge of row r, bit 2r+1 its top-row edge.
// Row 0 is the first operator applied to the bra.

namespace detail {

inline int bit_of(std::uint32_t s, int k) { return static_cast<int>(s >> k & 1u); }

template <class F>
std::vector<F> left_vector(const std::vector<RowSpec<F>>& rows, const ModelParams<F>& p) {
  const int R = static_cast<int>(rows.size());
  std::vector<F> v(std::size_t{1} << (2 * R), F(1));
  for (int r = 0; r < R; ++r) {
    std::array<F, 4> k;
    for (int b = 0; b < 2; ++b)
      for (int t = 0; t < 2; ++t) k[b | t << 1] = boundary_weight(b, t, rows[r].spectral, p);
    for (std::size_t s = 0; s < v.size(); ++s) v[s] *= k[s >> (2 * r) & 3];
  }
  return v;
}

// One column of the stack; bottom occupation vin0, top occupation vtop
// (vtop < 0 sums over both).
template <class F>
std::vector<F> column_step(const std::vector<F>& in, const std::vector<ColumnTables<F>>& tabs, int vin0, int vtop) {
  const int R = static_cast<int>(tabs.size());
  std::vector<F> out(in.size(), F(0));
  struct Partial {
    std::uint32_t s;
    int v;
    F w;
  };
  std::vector<Partial> cur, nxt;
  for (std::uint32_t s = 0; s < in.size(); ++s) {
    if (is_zero(in[s])) continue;
    cur.clear();
    cur.push_back({0u, vin0, in[s]});
    for (int r = 0; r < R; ++r) {
      nxt.clear();
      const int bl = bit_of(s, 2 * r), tl = bit_of(s, 2 * r + 1);
      for (const auto& pa : cur) {
        for (int rin = 0; rin < 2; ++rin) {
          const int vmid = pa.v + rin - bl;
          if (vmid < 0 || vmid > 1) continue;
          const F& wb = tabs[r].bot[idx4(pa.v, rin, bl, vmid)];
          if (is_zero(wb)) continue;
          for (int vout = 0; vout < 2; ++vout) {
            const int tr = vmid + tl - vout;
            if (tr < 0 || tr > 1) continue;
            const F& wt = tabs[r].top[idx4(vmid, tl, vout, tr)];
            if (is_zero(wt)) continue;
            nxt.push_back({pa.s | static_cast<std::uint32_t>(rin) << (2 * r) |
                               static_cast<std::uint32_t>(tr) << (2 * r + 1),
                           vout, pa.w * wb * wt});
          }
        }
      }
      std::swap(cur, nxt);
    }
    for (const auto& pa : cur)
      if (vtop < 0 || pa.v == vtop) out[pa.s] += pa.w;
  }
  return out;
}

}  // namespace detail

// Right boundary that fixes every row to its nominal edges (bottom 0, top 0
// for A and top 1 for Bdot).
template <class F>
std::vector<F> nominal_boundary(const std::vector<RowSpec<F>>& rows) {
  const int R = static_cast<int>(rows.size());
  std::vector<F> v(std::size_t{1} << (2 * R), F(0));
  std::uint32_t s = 0;
  for (int r = 0; r < R; ++r) s |= static_cast<std::uint32_t>(detail::nominal_top_edge(rows[r].kind)) << (2 * r + 1);
  v[s] = F(1);
  return v;
}

// Right boundary in which every row's top-row edge is summed over and the
// bottom-row edges are empty.
template <class F>
std::vector<F> free_top_boundary(int n_rows) {
  std::vector<F> v(std::size_t{1} << (2 * n_rows), F(0));
  for (std::uint32_t s = 0; s < v.size(); ++s) {
    bool ok = true;
    for (int r = 0; r < n_rows; ++r) ok = ok && detail::bit_of(s, 2 * r) == 0;
    if (ok) v[s] = F(1);
  }
  return v;
}

// Triangular cap of R-vertices closing the stack on the right.
//
// Beyond the last column the lines are reordered from (b_0..b_{R-1},
// t_{R-1}..t_0), where they carry their nominal values, to the lattice order
// (b_0,t_0,b_1,t_1,...). Each swap is one crossing: t_i with b_j (i<j) has
// spectral parameter s_i s_j and b_j as the vertical line; t_i with t_j (i<j)
// has parameter s_j/s_i and t_i as the vertical line. `reverse_scan` picks a
// different sequence of adjacent swaps; the result must not depend on it.
template <class F>
std::vector<F> cap_boundary(const std::vector<RowSpec<F>>& rows, const ModelParams<F>& p, bool reverse_scan = false) {
  if (rows.size() > 12) throw CapExceeded("too many stacked rows");
  const int R = static_cast<int>(rows.size());
  const int n = 2 * R;
  // line id: 2r for b_r, 2r+1 for t_r; the id is also the target rank.
  std::vector<int> order;
  for (int r = 0; r < R; ++r) order.push_back(2 * r);
  for (int r = R - 1; r >= 0; --r) order.push_back(2 * r + 1);
  std::vector<std::pair<int, int>> crossings;  // (upper-moving X, lower-moving Y)
  bool swapped = true;
  while (swapped) {
    swapped = false;
    for (int step = 0; step + 1 < n; ++step) {
      const int pos = reverse_scan ? n - 2 - step : step;
      if (order[pos] > order[pos + 1]) {
        crossings.emplace_back(order[pos], order[pos + 1]);
        std::swap(order[pos], order[pos + 1]);
        swapped = true;
      }
    }
  }
  std::vector<F> v(std::size_t{1} << n, F(0));
  std::uint32_t s0 = 0;
  for (int r = 0; r < R; ++r) s0 |= static_cast<std::uint32_t>(detail::nominal_top_edge(rows[r].kind)) << (2 * r + 1);
  v[s0] = F(1);
  for (const auto& [X, Y] : crossings) {
    const int ti = Y / 2;
    const int j = X / 2;
    const bool x_is_b = (X % 2) == 0;
    const F z = x_is_b ? rows[ti].spectral * rows[j].spectral : quot(rows[j].spectral, rows[ti].spectral);
    std::vector<F> w(v.size(), F(0));
    for (std::uint32_t s = 0; s < v.size(); ++s) {
      if (is_zero(v[s])) continue;
      const int xo = detail::bit_of(s, X), yo = detail::bit_of(s, Y);
      for (int xi = 0; xi < 2; ++xi)
        for (int yi = 0; yi < 2; ++yi) {
          F r = x_is_b ? detail::stochastic_weight(xo, yi, xi, yo, z, p.q)   // b_j vertical
                       : detail::stochastic_weight(yi, xi, yo, xo, z, p.q);  // t_i vertical
          if (is_zero(r)) continue;
          std::uint32_t s2 = (s & ~(1u << X) & ~(1u << Y)) | static_cast<std::uint32_t>(xi) << X |
                             static_cast<std::uint32_t>(yi) << Y;
          w[s2] += v[s] * r;
        }
    }
    v = std::move(w);
  }
  return v;
}

// <mu| X_0 X_1 ... |nu> on n_columns columns contracted with `right`.
// top_free sums over the top occupations instead of fixing them to nu.
template <class F>
F stack_value(const std::vector<RowSpec<F>>& rows, const Config& mu, const Config& nu, int n_columns,
              const ModelParams<F>& p, const std::vector<F>& right, bool top_free = false) {
  if (rows.size() > 12) throw CapExceeded("too many stacked rows");
  if (mu.max_part() > n_columns || (!top_free && nu.max_part() > n_columns))
    throw TruncationTooSmall("configuration exceeds n_columns");
  std::vector<F> v = detail::left_vector(rows, p);
  std::vector<detail::ColumnTables<F>> tabs(rows.size());
  for (int j = 1; j <= n_columns; ++j) {
    for (std::size_t r = 0; r < rows.size(); ++r) tabs[r] = detail::column_tables(rows[r], j, p);
    v = detail::column_step(v, tabs, mu.occupation(j), top_free ? -1 : nu.occupation(j));
  }
  F total(0);
  for (std::size_t s = 0; s < v.size(); ++s)
    if (!is_zero(right[s])) total += v[s] * right[s];
  return total;
}

// G_{nu/mu}(x) = <mu|A(x_1)...A(x_L)|nu>, exact: the finite lattice closed by
// the R-vertex cap, which accounts for paths leaving and re-entering between
// rows beyond the last column.
template <class F>
F partition_G(const Config& nu, const Config& mu, const std::vector<F>& xs, const ModelParams<F>& p,
              int n_columns = 0) {
  if (xs.empty()) return nu == mu ? F(1) : F(0);
  const auto rows = a_rows(xs);
  const int N = std::max({n_columns, mu.max_part(), nu.max_part()});
  return stack_value(rows, mu, nu, N, p, cap_boundary(rows, p));
}

// Product of truncated operators: every row closed by its own empty right
// edge. Converges to partition_G as n_columns grows (when the guard holds).
template <class F>
F partition_G_truncated(const Config& nu, const Config& mu, const std::vector<F>& xs, const ModelParams<F>& p,
                        int n_columns) {
  if (xs.empty()) return nu == mu ? F(1) : F(0);
  const auto rows = a_rows(xs);
  return stack_value(rows, mu, nu, n_columns, p, nominal_boundary(rows));
}

// F_{mu/nu}(z) = <mu|Bdot(z_1)...Bdot(z_M)|nu>; every intermediate state is
// supported inside [1, max(mu_1, nu_1)], so the truncation is exact.
template <class F>
F partition_F(const Config& mu, const Config& nu, const std::vector<F>& zs, const ModelParams<F>& p,
              int n_columns = 0) {
  if (zs.empty()) return nu == mu ? F(1) : F(0);
  const auto rows = b_rows(zs);
  const int N = std::max({n_columns, mu.max_part(), nu.max_part()});
  return stack_value(rows, mu, nu, N, p, nominal_boundary(rows));
}

// ---------------------------------------------------------------------------
// Convergence guard.

struct ConvergenceGuard {
  double rho = 0.0;
  double max_ratio = 0.0;
  std::vector<double> ratios;
  bool passes() const { return rho < 1.0 && max_ratio <= rho; }
};

namespace detail {

// Distinct y values in use: the listed ones plus the constant tail.
template <class F>
std::vector<F> y_values(const ModelParams<F>& p, int n_columns) {
  std::vector<F> ys;
  const int n = std::max<int>(n_columns, static_cast<int>(p.y.size())) + 1;
  for (int k = 1; k <= n; ++k) ys.push_back(p.y_at(k));
  return ys;
}

template <class F>
double ratio_first(const F& x, const F& z, const F& y, const F& q) {
  // (1-xy)/(1-qxy) * q(1-z/y)/(1-qz/y)
  Complex xc = to_complex(x), zc = to_complex(z), yc = to_complex(y), qc = to_complex(q);
  return std::abs((1.0 - xc * yc) / (1.0 - qc * xc * yc) * qc * (1.0 - zc / yc) / (1.0 - qc * zc / yc));
}

template <class F>
double ratio_second(const F& x, const F& z, const F& y, const F& q) {
  // (1-xy)/(1-qxy) * (1-qzy)/(1-zy)
  Complex xc = to_complex(x), zc = to_complex(z), yc = to_complex(y), qc = to_complex(q);
  return std::abs((1.0 - xc * yc) / (1.0 - qc * xc * yc) * (1.0 - qc * zc * yc) / (1.0 - zc * yc));
}

}  // namespace detail

// Condition for A(x_i)A(x_j) products: all ordered pairs i != j.
template <class F>
ConvergenceGuard commutation_guard(const std::vector<F>& xs, const ModelParams<F>& p, int n_columns,
                                   double rho = 0.95) {
  ConvergenceGuard g;
  g.rho = rho;
  for (const F& y : detail::y_values(p, n_columns))
    for (std::size_t i = 0; i < xs.size(); ++i)
      for (std::size_t j = 0; j < xs.size(); ++j) {
        if (i == j) continue;
        double r = detail::ratio_first(xs[i], xs[j], y, p.q);
        g.ratios.push_back(r);
        g.max_ratio = std::max(g.max_ratio, r);
      }
  return g;
}

// Condition for A(x)Bdot(z) products and the Cauchy identity.
template <class F>
ConvergenceGuard cauchy_guard(const std::vector<F>& xs, const std::vector<F>& zs, const ModelParams<F>& p,
                              int n_columns, double rho = 0.95) {
  ConvergenceGuard g;
  g.rho = rho;
  for (const F& y : detail::y_values(p, n_columns))
    for (const F& x : xs)
      for (const F& z : zs) {
        for (double r : {detail::ratio_first(x, z, y, p.q), detail::ratio_second(x, z, y, p.q)}) {
          g.ratios.push_back(r);
          g.max_ratio = std::max(g.max_ratio, r);
        }
      }
  return g;
}

// Condition under which A(x)A(1/x) = id.
template <class F>
ConvergenceGuard inverse_guard(const F& x, const ModelParams<F>& p, int n_columns, double rho = 0.95) {
  ConvergenceGuard g;
  g.rho = rho;
  const F xi = quot(F(1), x, "x");
  for (const F& y : detail::y_values(p, n_columns)) {
    double r = detail::ratio_first(x, xi, y, p.q);
    g.ratios.push_back(r);
    g.max_ratio = std::max(g.max_ratio, r);
  }
  return g;
}

// True when every bulk and boundary weight met by the rows on n_columns
// columns is real and in [0, 1].
template <class F>
bool weights_stochastic_at(const std::vector<F>& xs, const ModelParams<F>& p, int n_columns) {
  auto ok = [](const F& w) {
    const Complex c = to_complex(w);
    return c.imag() == 0.0 && c.real() >= 0.0 && c.real() <= 1.0;
  };
  for (const F& x : xs) {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        if (!ok(boundary_weight(i, j, x, p))) return false;
    for (int col = 1; col <= n_columns; ++col) {
      const auto t = detail::column_tables(RowSpec<F>{RowKind::A, x}, col, p);
      for (int e = 0; e < 16; ++e)
        if (!ok(t.bot[e]) || !ok(t.top[e])) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Operator identities on matrix elements.

enum class OperatorIdentity {
  aa_commute,
  bb_commute,
  ab_exchange,
  a_at_zero,
  a_at_one,
  a_inverse_pair,
  stochastic_rows,
  branching
};

inline const char* identity_name(OperatorIdentity id) {
  switch (id) {
    case OperatorIdentity::aa_commute: return "aa_commute";
    case OperatorIdentity::bb_commute: return "bb_commute";
    case OperatorIdentity::ab_exchange: return "ab_exchange";
    case OperatorIdentity::a_at_zero: return "a_at_zero";
    case OperatorIdentity::a_at_one: return "a_at_one";
    case OperatorIdentity::a_inverse_pair: return "a_inverse_pair";
    case OperatorIdentity::stochastic_rows: return "stochastic_rows";
    case OperatorIdentity::branching: return "branching";
  }
  return "?";
}

struct IdentityOptions {
  int n_small = 3;     // matrix elements between configurations on [1, n_small]
  double tol = 1e-8;   // for the parts that are limits in n_columns
  double rho = 0.95;
};

// `exact_residual` covers the finite-N statements (0 in the rational backend
// when they hold). `tail_residual` is the distance of the truncated infinite
// sum from its limit at n_columns, and `tail_residual_prev` the same at
// n_columns - 1; both stay 0 for identities without an infinite sum.
struct IdentityReport {
  std::string identity;
  bool holds = false;
  double exact_residual = 0.0;
  double tail_residual = 0.0;
  double tail_residual_prev = 0.0;
  std::size_t elements = 0;
};

namespace detail {

template <class F>
F capped(const std::vector<RowSpec<F>>& rows, const Config& mu, const Config& nu, int n, const ModelParams<F>& p) {
  return stack_value(rows, mu, nu, std::max({n, mu.max_part(), nu.max_part()}), p, cap_boundary(rows, p));
}

template <class F>
F nominal(const std::vector<RowSpec<F>>& rows, const Config& mu, const Config& nu, int n, const ModelParams<F>& p) {
  return stack_value(rows, mu, nu, n, p, nominal_boundary(rows));
}

inline void require(const ConvergenceGuard& g, const char* what) {
  if (!g.passes())
    throw GuardViolated(std::string(what) + ": max ratio " + std::to_string(g.max_ratio) + " exceeds rho " +
                        std::to_string(g.rho));
}

template <class F>
void need(const std::vector<F>& v, std::size_t n, const char* what) {
  if (v.size() < n) throw ArityError(std::string(what) + " alphabet too short");
}

}  // namespace detail

// Identities about infinite sums are checked in two layers: the exact
// finite-N statement that the proof rests on, and the convergence of the
// truncated sum at n_columns.
template <class F>
IdentityReport verify_operator_identity(OperatorIdentity id, const ModelParams<F>& p, int n_columns,
                                        const IdentityOptions& opt = {}) {
  IdentityReport rep;
  rep.identity = identity_name(id);
  const int ns = std::min(opt.n_small, n_columns);
  const auto configs = configs_up_to(ns);
  const F one(1), zero(0);
  auto track = [&](const F& a, const F& b) {
    rep.exact_residual = std::max(rep.exact_residual, residual_of(a, b));
    ++rep.elements;
  };
  auto tail = [&](double now, double prev) {
    rep.tail_residual = std::max(rep.tail_residual, now);
    rep.tail_residual_prev = std::max(rep.tail_residual_prev, prev);
  };
  const int N = std::max(n_columns, ns);

  switch (id) {
    case OperatorIdentity::aa_commute: {
      detail::need(p.x, 2, "x");
      detail::require(commutation_guard(std::vector<F>{p.x[0], p.x[1]}, p, N, opt.rho), rep.identity.c_str());
      const auto r12 = a_rows(std::vector<F>{p.x[0], p.x[1]});
      const auto r21 = a_rows(std::vector<F>{p.x[1], p.x[0]});
      for (const auto& mu : configs)
        for (const auto& nu : configs) track(detail::capped(r12, mu, nu, ns, p), detail::capped(r21, mu, nu, ns, p));
      break;
    }
    case OperatorIdentity::bb_commute: {
      detail::need(p.z, 2, "z");
      const auto r12 = b_rows(std::vector<F>{p.z[0], p.z[1]});
      const auto r21 = b_rows(std::vector<F>{p.z[1], p.z[0]});
      for (const auto& mu : configs)
        for (const auto& nu : configs) track(detail::nominal(r12, mu, nu, N, p), detail::nominal(r21, mu, nu, N, p));
      break;
    }
    case OperatorIdentity::ab_exchange: {
      detail::need(p.x, 1, "x");
      detail::need(p.z, 1, "z");
      const F x = p.x[0], z = p.z[0];
      detail::require(cauchy_guard(std::vector<F>{x}, std::vector<F>{z}, p, N, opt.rho), rep.identity.c_str());
      const F pre = quot((x - p.q * z) * (one - x * z), (x - z) * (one - p.q * x * z), "exchange factor");
      const std::vector<RowSpec<F>> ab{{RowKind::A, x}, {RowKind::Bdot, z}};
      const auto cap = cap_boundary(ab, p);
      for (const auto& mu : configs) {
        SparseState<F> bra{{mu, one}};
        const auto after_b = apply_double_row(bra, RowKind::Bdot, z, std::max(ns, 1), p);
        for (const auto& nu : configs) {
          F ba(0);
          for (const auto& [k, w] : after_b) ba += w * partition_G(nu, k, std::vector<F>{x}, p);
          const F rhs = pre * ba;
          // finite N: the capped lattice equals (1-xz)/(1-qxz) <B A>
          const F capped = stack_value(ab, mu, nu, std::max(ns, 1), p, cap);
          track(capped * (x - p.q * z), rhs * (x - z));
          const double now = residual_of(detail::nominal(ab, mu, nu, N, p), rhs);
          const double prev = residual_of(detail::nominal(ab, mu, nu, N - 1, p), rhs);
          tail(now, prev);
        }
      }
      break;
    }
    case OperatorIdentity::a_at_zero: {
      for (const auto& mu : configs)
        for (const auto& nu : configs) track(partition_G(nu, mu, std::vector<F>{zero}, p, N), zero);
      break;
    }
    case OperatorIdentity::a_at_one: {
      for (const F& s : {one, -one})
        for (const auto& mu : configs)
          for (const auto& nu : configs) track(partition_G(nu, mu, std::vector<F>{s}, p, N), mu == nu ? one : zero);
      break;
    }
    case OperatorIdentity::a_inverse_pair: {
      detail::need(p.x, 1, "x");
      const F x = p.x[0];
      detail::require(inverse_guard(x, p, N, opt.rho), rep.identity.c_str());
      const auto rows = a_rows(std::vector<F>{x, quot(one, x, "x")});
      for (const auto& mu : configs)
        for (const auto& nu : configs) track(detail::capped(rows, mu, nu, ns, p), mu == nu ? one : zero);
      break;
    }
    case OperatorIdentity::stochastic_rows: {
      if (p.x.empty()) throw ArityError("x alphabet empty");
      const auto rows = a_rows(p.x);
      const auto free_right = free_top_boundary<F>(static_cast<int>(rows.size()));
      const auto cap = cap_boundary(rows, p);
      for (const auto& mu : configs) {
        // finite N: summing the top-row edges freely leaves total weight 1
        track(stack_value(rows, mu, Config{}, ns, p, free_right, true), one);
        // sum over nu on [1, N] of the exact G
        const double now = residual_of(stack_value(rows, mu, Config{}, N, p, cap, true), one);
        const double prev = residual_of(stack_value(rows, mu, Config{}, N - 1, p, cap, true), one);
        tail(now, prev);
      }
      break;
    }
    case OperatorIdentity::branching: {
      detail::need(p.x, 2, "x");
      detail::require(commutation_guard(p.x, p, N, opt.rho), rep.identity.c_str());
      const std::size_t m = p.x.size() / 2;
      const std::vector<F> first(p.x.begin(), p.x.begin() + m), second(p.x.begin() + m, p.x.end());
      const auto mids = configs_up_to(N);
      for (const auto& mu : configs) {
        std::vector<F> left(mids.size());
        for (std::size_t k = 0; k < mids.size(); ++k) left[k] = partition_G(mids[k], mu, first, p);
        for (const auto& nu : configs) {
          const F whole = partition_G(nu, mu, p.x, p);
          F sum(0), sum_prev(0);
          for (std::size_t k = 0; k < mids.size(); ++k) {
            if (is_zero(left[k])) continue;
            const F term = left[k] * partition_G(nu, mids[k], second, p);
            sum += term;
            if (mids[k].max_part() < N) sum_prev += term;
          }
          ++rep.elements;
          tail(residual_of(sum, whole), residual_of(sum_prev, whole));
        }
      }
      break;
    }
  }
  bool exact_ok = field_traits<F>::exact ? rep.exact_residual == 0.0 : rep.exact_residual <= 1e-10;
  rep.holds = exact_ok && rep.tail_residual <= opt.tol;
  return rep;
}

// Sum over kappa on [1, n_columns] of G_{nu/kappa}(1/x) G_{kappa/mu}(x),
// which tends to delta_{mu,nu}. Returns the largest deviation over mu, nu on
// [1, n_small].
template <class F>
double unitarity_residual(const std::vector<F>& xs, const ModelParams<F>& p, int n_columns, int n_small = 2) {
  std::vector<F> inv;
  for (const F& x : xs) inv.push_back(quot(F(1), x, "x"));
  const auto configs = configs_up_to(n_small);
  const auto mids = configs_up_to(n_columns);
  double worst = 0.0;
  for (const auto& mu : configs)
    for (const auto& nu : configs) {
      F sum(0);
      for (const auto& k : mids) {
        const F g = partition_G(k, mu, xs, p);
        if (!is_zero(g)) sum += partition_G(nu, k, inv, p) * g;
      }
      worst = std::max(worst, residual_of(sum, mu == nu ? F(1) : F(0)));
    }
  return worst;
}

}  // namespace hsv

#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "field.hpp"
#include "matrix.hpp"

namespace hsv {

template <class F>
void require_skew(const Matrix<F>& m) {
  if (m.rows() != m.cols()) throw NotSkewSymmetric("matrix is not square");
  for (int i = 0; i < m.rows(); ++i) {
    if (!is_zero(m(i, i))) throw NotSkewSymmetric("nonzero diagonal entry");
    for (int j = i + 1; j < m.rows(); ++j)
      if (!nearly_equal(m(i, j), -m(j, i), 1e-12)) throw NotSkewSymmetric("a_ij != -a_ji");
  }
}

// Builds a skew matrix from an upper-triangle entry function entry(i, j), i < j.
template <class F, class Fn>
Matrix<F> skew_from(int n, Fn entry) {
  Matrix<F> m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      m(i, j) = entry(i, j);
      m(j, i) = -m(i, j);
    }
  return m;
}

namespace detail {

// First-row expansion over index subsets, memoized on the bitmask.
template <class F>
F pf_expand(const Matrix<F>& m, std::uint32_t set, std::unordered_map<std::uint32_t, F>& memo) {
  if (set == 0) return F(1);
  if (auto it = memo.find(set); it != memo.end()) return it->second;
  const int i = __builtin_ctz(set);
  const std::uint32_t rest = set & ~(1u << i);
  F total(0);
  int sign = 1;
  for (int j = i + 1; j < m.rows(); ++j) {
    if (!(rest >> j & 1u)) continue;
    if (!is_zero(m(i, j))) {
      F t = m(i, j) * pf_expand(m, rest & ~(1u << j), memo);
      if (sign > 0) total += t;
      else total -= t;
    }
    sign = -sign;
  }
  memo.emplace(set, total);
  return total;
}

// Skew elimination: pivot on a nonzero (k, k+1) entry after a symmetric swap,
// then clear rows and columns k+2.. against the pair (k, k+1).
template <class F>
F pf_eliminate(Matrix<F> a) {
  const int n = a.rows();
  F pf(1);
  auto swap_both = [&](int r, int s) {
    for (int j = 0; j < n; ++j) std::swap(a(r, j), a(s, j));
    for (int i = 0; i < n; ++i) std::swap(a(i, r), a(i, s));
  };
  for (int k = 0; k < n; k += 2) {
    int piv = -1;
    double best = -1.0;
    for (int j = k + 1; j < n; ++j) {
      if (is_zero(a(k, j))) continue;
      if constexpr (field_traits<F>::exact) {
        piv = j;
        break;
      } else {
        if (std::abs(a(k, j)) > best) best = std::abs(a(k, j)), piv = j;
      }
    }
    if (piv < 0) return F(0);
    if (piv != k + 1) {
      swap_both(k + 1, piv);
      pf = -pf;
    }
    const F p = a(k, k + 1);
    pf *= p;
    for (int i = k + 2; i < n; ++i) {
      // row_i += (a(k+1,i)/p) row_k - (a(k,i)/p) row_{k+1}, same on columns
      const F f1 = a(k + 1, i) / p;
      const F f2 = a(k, i) / p;
      for (int j = k; j < n; ++j) a(i, j) = a(i, j) + f1 * a(k, j) - f2 * a(k + 1, j);
      for (int j = k; j < n; ++j) a(j, i) = -a(i, j);
    }
  }
  return pf;
}

// Householder skew-tridiagonalization; Pf(T) is the product of T(2i, 2i+1).
inline Complex pf_householder(Matrix<Complex> a) {
  const int n = a.rows();
  Complex pf(1.0, 0.0);
  for (int k = 0; k + 2 < n; ++k) {
    const int len = n - k - 1;
    std::vector<Complex> v(len);
    double norm2 = 0.0;
    for (int i = 0; i < len; ++i) {
      v[i] = a(k + 1 + i, k);
      norm2 += std::norm(v[i]);
    }
    if (norm2 - std::norm(v[0]) <= 0.0) continue;
    const double norm = std::sqrt(norm2);
    const Complex phase = std::abs(v[0]) > 0.0 ? v[0] / std::abs(v[0]) : Complex(1.0, 0.0);
    v[0] += phase * norm;
    double vv = 0.0;
    for (const auto& e : v) vv += std::norm(e);
    // a <- P a P^T, P = I - 2 v v^H / (v^H v) acting on indices k+1..n-1
    for (int j = 0; j < n; ++j) {
      Complex s(0.0, 0.0);
      for (int i = 0; i < len; ++i) s += std::conj(v[i]) * a(k + 1 + i, j);
      s *= 2.0 / vv;
      for (int i = 0; i < len; ++i) a(k + 1 + i, j) -= v[i] * s;
    }
    for (int i = 0; i < n; ++i) {
      Complex s(0.0, 0.0);
      for (int j = 0; j < len; ++j) s += a(i, k + 1 + j) * std::conj(v[j]);
      s *= 2.0 / vv;
      for (int j = 0; j < len; ++j) a(i, k + 1 + j) -= s * v[j];
    }
    // Pf(P A P^T) = det(P) Pf(A) and det P = -1
    pf = -pf;
  }
  for (int i = 0; i + 1 < n; i += 2) pf *= a(i, i + 1);
  return pf;
}

}  // namespace detail

inline constexpr int kPfaffianMemoOrder = 12;

// Pf of an even skew matrix; odd order gives 0.
template <class F>
F pfaffian(const Matrix<F>& m) {
  require_skew(m);
  const int n = m.rows();
  if (n == 0) return F(1);
  if (n % 2) return F(0);
  if constexpr (field_traits<F>::exact) {
    if (n <= kPfaffianMemoOrder) {
      std::unordered_map<std::uint32_t, F> memo;
      return detail::pf_expand(m, (1u << n) - 1, memo);
    }
    return detail::pf_eliminate(m);
  } else {
    return detail::pf_householder(m);
  }
}

// Pf(A + B) against the subset expansion; returns the residual.
template <class F>
double pfaffian_sum_residual(const Matrix<F>& a, const Matrix<F>& b) {
  require_skew(a);
  require_skew(b);
  const int n = a.rows();
  if (b.rows() != n) throw NotSkewSymmetric("orders differ");
  F rhs(0);
  for (std::uint32_t s = 0; s < (1u << n); ++s) {
    const int r = __builtin_popcount(s);
    if (r % 2) continue;
    std::vector<int> in, out;
    int idx_sum = 0;
    for (int i = 0; i < n; ++i) {
      if (s >> i & 1u) in.push_back(i), idx_sum += i + 1;
      else out.push_back(i);
    }
    if ((n - r) % 2) continue;
    F term = pfaffian(a.principal(in)) * pfaffian(b.principal(out));
    if (((r / 2) + idx_sum) % 2) term = -term;
    rhs += term;
  }
  return residual_of(pfaffian(a + b), rhs);
}

template <class F>
bool pfaffian_sum_check(const Matrix<F>& a, const Matrix<F>& b, double tol = 1e-9) {
  const double r = pfaffian_sum_residual(a, b);
  return field_traits<F>::exact ? r == 0.0 : r <= tol;
}

// S(x, y) = (x - y)/(1 - x y).
template <class F>
F kernel_s(const F& x, const F& y) {
  return quot(x - y, F(1) - x * y, "1 - x_i x_j");
}

// Pf[S(x_i, x_j)] = prod_{i<j} S(x_i, x_j) for an even alphabet.
template <class F>
double stembridge_residual(const std::vector<F>& xs) {
  const int n = static_cast<int>(xs.size());
  if (n % 2) throw ArityError("alphabet length must be even");
  const auto m = skew_from<F>(n, [&](int i, int j) { return kernel_s(xs[i], xs[j]); });
  F prod(1);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) prod *= kernel_s(xs[i], xs[j]);
  return residual_of(pfaffian(m), prod);
}

template <class F>
bool stembridge_check(const std::vector<F>& xs, double tol = 1e-9) {
  const double r = stembridge_residual(xs);
  return field_traits<F>::exact ? r == 0.0 : r <= tol;
}

}  // namespace hsv

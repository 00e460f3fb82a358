#pragma once

#include <array>
#include <string>
#include <vector>

#include "field.hpp"
#include "matrix.hpp"

namespace hsv {

template <class F>
struct ModelParams {
  F q = F(0);
  F a = F(2);
  F c = F(3);
  bool c_infinite = false;
  std::vector<F> x;  // horizontal spectral parameters of A rows
  std::vector<F> z;  // spectral parameters of dotted B rows
  std::vector<F> y;  // vertical (column) parameters; constant tail

  // 1-based column parameter; beyond the list the last value repeats, and an
  // empty list means y = 1 everywhere.
  F y_at(int j) const {
    if (y.empty()) return F(1);
    return j <= static_cast<int>(y.size()) ? y[j - 1] : y.back();
  }
  // 1/(ac), which vanishes in the c -> infinity degeneration.
  F inv_ac() const { return c_infinite ? F(0) : quot(F(1), a * c, "ac"); }
};

enum class Variant { stochastic, dotted, rotated };

template <class F>
F h_func(const F& x, const ModelParams<F>& p) {
  if (p.c_infinite) return quot(p.a * (F(1) - x * x), p.a - x, "a - x");
  return quot(p.a * p.c * (F(1) - x * x), (p.a - x) * (p.c - x), "(a - x)(c - x)");
}

namespace detail {

inline bool ice(int i, int j, int k, int l) { return i + j == k + l; }

// R_z(i,j;k,l): i bottom, j left, k top, l right; paths run up and right.
template <class F>
F stochastic_weight(int i, int j, int k, int l, const F& z, const F& q) {
  const F den = F(1) - q * z;
  if (is_zero(den)) throw DivisionByZero("1 - q z in bulk weight");
  if (!ice(i, j, k, l)) return F(0);
  if (i == j) return F(1);
  if (i == 1 && k == 1) return q * (F(1) - z) / den;
  if (i == 1) return (F(1) - q) / den;
  if (l == 1) return (F(1) - z) / den;
  return z * (F(1) - q) / den;
}

template <class F>
F dotted_weight(int i, int j, int k, int l, const F& z, const F& q) {
  const F den = F(1) - z;
  if (is_zero(den)) throw DivisionByZero("1 - z in dotted weight");
  if (!ice(i, j, k, l)) return F(0);
  if (i == j) return (F(1) - q * z) / den;
  if (i == 1 && k == 1) return q;
  if (i == 1) return (F(1) - q) / den;
  if (l == 1) return F(1);
  return z * (F(1) - q) / den;
}

}  // namespace detail

// Bulk vertex weight. For Variant::rotated the labels are the physical edges
// of a bottom-row vertex (i bottom in, j left out, k top out, l right in):
// the stochastic table turned a quarter counterclockwise.
template <class F>
F bulk_weight(int i, int j, int k, int l, const F& z, Variant v, const F& q) {
  switch (v) {
    case Variant::stochastic:
      return detail::stochastic_weight(i, j, k, l, z, q);
    case Variant::dotted:
      return detail::dotted_weight(i, j, k, l, z, q);
    case Variant::rotated:
      return detail::stochastic_weight(l, i, j, k, z, q);
  }
  return F(0);
}

// (1 - q z) R_z: polynomial numerators used for the cleared partition function.
template <class F>
F bulk_numerator(int i, int j, int k, int l, const F& z, const F& q) {
  if (!detail::ice(i, j, k, l)) return F(0);
  if (i == j) return F(1) - q * z;
  if (i == 1 && k == 1) return q * (F(1) - z);
  if (i == 1) return F(1) - q;
  if (l == 1) return F(1) - z;
  return z * (F(1) - q);
}

// K_x(i;j): i enters from the bottom row, j leaves into the top row.
template <class F>
F boundary_weight(int i, int j, const F& x, const ModelParams<F>& p) {
  const F h = h_func(x, p);
  if (i == 0) return j == 0 ? F(1) - h : h;
  if (p.c_infinite) return j == 0 ? F(0) : F(1);
  const F t = h * p.inv_ac();
  return j == 0 ? -t : F(1) + t;
}

// (a - x)(c - x) K_x(i;j), polynomial in x; (a - x) K_x(i;j) when c is infinite.
template <class F>
F boundary_numerator(int i, int j, const F& x, const ModelParams<F>& p) {
  if (p.c_infinite) {
    const F n = p.a * (F(1) - x * x);
    if (i == 0) return j == 0 ? p.a - x - n : n;
    return j == 0 ? F(0) : p.a - x;
  }
  const F d = (p.a - x) * (p.c - x);
  const F n = p.a * p.c * (F(1) - x * x);
  if (i == 0) return j == 0 ? d - n : n;
  const F m = F(1) - x * x;
  return j == 0 ? -m : d + m;
}

// ---------------------------------------------------------------------------
// Local relations as matrix identities.

enum class LocalRelation { ybe, reflection, r_unitarity, k_unitarity, factorization };

inline const char* relation_name(LocalRelation r) {
  switch (r) {
    case LocalRelation::ybe: return "ybe";
    case LocalRelation::reflection: return "reflection";
    case LocalRelation::r_unitarity: return "r_unitarity";
    case LocalRelation::k_unitarity: return "k_unitarity";
    case LocalRelation::factorization: return "factorization";
  }
  return "?";
}

template <class F>
struct LocalPoint {
  F q = F(0), a = F(2), c = F(3);
  bool c_infinite = false;
  F x = F(0), y = F(0), z = F(0);

  ModelParams<F> params() const {
    ModelParams<F> p;
    p.q = q, p.a = a, p.c = c, p.c_infinite = c_infinite;
    return p;
  }
};

struct RelationReport {
  std::string relation;
  bool holds = false;
  double residual = 0.0;
};

namespace detail {

// Operator R_{ab}(z) on a tensor product of n two-state spaces: space a is the
// vertical line, space b the horizontal one. Columns are inputs, rows outputs.
template <class F>
Matrix<F> embed_r(int n, int a, int b, const F& z, const F& q) {
  const int dim = 1 << n;
  Matrix<F> m(dim, dim);
  for (int in = 0; in < dim; ++in) {
    const int i = in >> (n - 1 - a) & 1;
    const int j = in >> (n - 1 - b) & 1;
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l) {
        F w = stochastic_weight(i, j, k, l, z, q);
        if (is_zero(w)) continue;
        int out = in;
        out = (out & ~(1 << (n - 1 - a))) | (k << (n - 1 - a));
        out = (out & ~(1 << (n - 1 - b))) | (l << (n - 1 - b));
        m(out, in) += w;
      }
  }
  return m;
}

template <class F>
Matrix<F> embed_k(int n, int a, const F& x, const ModelParams<F>& p) {
  const int dim = 1 << n;
  Matrix<F> m(dim, dim);
  for (int in = 0; in < dim; ++in) {
    const int i = in >> (n - 1 - a) & 1;
    for (int j = 0; j < 2; ++j) {
      F w = boundary_weight(i, j, x, p);
      if (is_zero(w)) continue;
      int out = (in & ~(1 << (n - 1 - a))) | (j << (n - 1 - a));
      m(out, in) += w;
    }
  }
  return m;
}

}  // namespace detail

// Contracts both sides over all internal edges for every boundary assignment.
template <class F>
RelationReport verify_local_relation(LocalRelation rel, const LocalPoint<F>& pt, double tol = 1e-10) {
  using detail::embed_k;
  using detail::embed_r;
  const F& q = pt.q;
  Matrix<F> lhs, rhs;
  switch (rel) {
    case LocalRelation::ybe: {
      const F zxy = quot(pt.y, pt.x), zxz = quot(pt.z, pt.x), zyz = quot(pt.z, pt.y);
      lhs = embed_r(3, 0, 1, zxy, q) * embed_r(3, 0, 2, zxz, q) * embed_r(3, 1, 2, zyz, q);
      rhs = embed_r(3, 1, 2, zyz, q) * embed_r(3, 0, 2, zxz, q) * embed_r(3, 0, 1, zxy, q);
      break;
    }
    case LocalRelation::reflection: {
      const auto p = pt.params();
      const F xy = pt.x * pt.y, x_over_y = quot(pt.x, pt.y);
      lhs = embed_r(2, 1, 0, x_over_y, q) * embed_k(2, 0, pt.x, p) * embed_r(2, 0, 1, xy, q) *
            embed_k(2, 1, pt.y, p);
      rhs = embed_k(2, 1, pt.y, p) * embed_r(2, 1, 0, xy, q) * embed_k(2, 0, pt.x, p) *
            embed_r(2, 0, 1, x_over_y, q);
      break;
    }
    case LocalRelation::r_unitarity: {
      lhs = embed_r(2, 1, 0, quot(pt.x, pt.y), q) * embed_r(2, 0, 1, quot(pt.y, pt.x), q);
      rhs = Matrix<F>::identity(4);
      break;
    }
    case LocalRelation::k_unitarity: {
      const auto p = pt.params();
      lhs = embed_k(1, 0, pt.x, p) * embed_k(1, 0, quot(F(1), pt.x), p);
      rhs = Matrix<F>::identity(2);
      break;
    }
    case LocalRelation::factorization: {
      lhs = Matrix<F>(16, 1);
      rhs = Matrix<F>(16, 1);
      for (int t = 0; t < 16; ++t) {
        const int i = t >> 3 & 1, j = t >> 2 & 1, k = t >> 1 & 1, l = t & 1;
        lhs(t, 0) = detail::stochastic_weight(i, j, k, l, F(1), q);
        rhs(t, 0) = (i == l && j == k) ? F(1) : F(0);
      }
      break;
    }
  }
  RelationReport r;
  r.relation = relation_name(rel);
  r.residual = max_residual(lhs, rhs);
  if constexpr (field_traits<F>::exact) {
    r.holds = r.residual == 0.0;
  } else {
    r.holds = r.residual <= tol;
  }
  return r;
}

template <class F>
std::string describe(const LocalPoint<F>& pt) {
  return "q=" + to_string(pt.q) + " a=" + to_string(pt.a) + " c=" + to_string(pt.c) +
         " x=" + to_string(pt.x) + " y=" + to_string(pt.y) + " z=" + to_string(pt.z);
}

struct RelationTrial {
  RelationReport report;
  std::string point;
};

// Random rational points with small entries; points where any weight in the
// relation has a vanishing denominator are redrawn.
template <class Rng>
std::vector<RelationTrial> verify_local_relation_random(LocalRelation rel, int trials, Rng& rng) {
  std::vector<RelationTrial> out;
  while (static_cast<int>(out.size()) < trials) {
    LocalPoint<Rational> pt;
    pt.q = random_rational(rng);
    pt.a = random_rational(rng);
    pt.c = random_rational(rng);
    pt.x = random_rational(rng);
    pt.y = random_rational(rng);
    pt.z = random_rational(rng);
    try {
      out.push_back({verify_local_relation(rel, pt), describe(pt)});
    } catch (const DivisionByZero&) {
    }
  }
  return out;
}

}  // namespace hsv

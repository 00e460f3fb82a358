#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include "field.hpp"

namespace hsv {

inline constexpr int kShuffleArityCap = 8;

// Symmetric function given by an evaluator. Values are memoized on the
// sorted argument tuple; the table is shared between copies.
template <class F>
class SymFun {
 public:
  using Eval = std::function<F(const std::vector<F>&)>;

  SymFun() : SymFun(0, [](const std::vector<F>&) { return F(1); }) {}
  SymFun(int arity, Eval eval, std::string name = "")
      : arity_(arity), eval_(std::move(eval)), name_(std::move(name)), memo_(std::make_shared<Memo>()) {}

  static SymFun constant(const F& c) {
    return SymFun(0, [c](const std::vector<F>&) { return c; }, "const");
  }
  static SymFun zero(int arity) {
    return SymFun(arity, [](const std::vector<F>&) { return F(0); }, "<zero>");
  }

  int arity() const { return arity_; }
  const std::string& name() const { return name_; }

  F operator()(const std::vector<F>& args) const {
    if (static_cast<int>(args.size()) != arity_)
      throw ArityError("function of arity " + std::to_string(arity_) + " called with " +
                       std::to_string(args.size()) + " arguments");
    std::vector<F> key = args;
    std::sort(key.begin(), key.end(), scalar_less{});
    {
      std::shared_lock lock(memo_->mutex);
      if (auto it = memo_->table.find(key); it != memo_->table.end()) return it->second;
    }
    F v = eval_(key);
    std::unique_lock lock(memo_->mutex);
    memo_->table.emplace(std::move(key), v);
    return v;
  }

  std::size_t memo_size() const {
    std::shared_lock lock(memo_->mutex);
    return memo_->table.size();
  }

 private:
  struct KeyLess {
    bool operator()(const std::vector<F>& a, const std::vector<F>& b) const {
      return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), scalar_less{});
    }
  };
  struct Memo {
    mutable std::shared_mutex mutex;
    std::map<std::vector<F>, F, KeyLess> table;
  };

  int arity_ = 0;
  Eval eval_;
  std::string name_;
  std::shared_ptr<Memo> memo_;
};

template <class F>
SymFun<F> scale(const SymFun<F>& f, const F& c) {
  return SymFun<F>(f.arity(), [f, c](const std::vector<F>& x) { return c * f(x); }, f.name());
}

template <class F>
SymFun<F> add(const SymFun<F>& f, const SymFun<F>& g) {
  if (f.arity() != g.arity()) throw ArityError("sum of functions with different arity");
  return SymFun<F>(f.arity(), [f, g](const std::vector<F>& x) { return f(x) + g(x); },
                   "(" + f.name() + "+" + g.name() + ")");
}

// (1 - x y)/(x - y), the shuffle kernel.
template <class F>
F shuffle_kernel(const F& x, const F& y) {
  if (is_zero(x - y)) throw DegeneratePoint("coinciding arguments in shuffle kernel");
  return (F(1) - x * y) / (x - y);
}

// f * g = sum over |S| = k of f(x_S) g(x_{S^c}) prod_{i in S, j notin S} (1 - x_i x_j)/(x_i - x_j).
template <class F>
SymFun<F> shuffle_product(const SymFun<F>& f, const SymFun<F>& g, int cap = kShuffleArityCap) {
  const int k = f.arity(), l = g.arity(), n = k + l;
  if (n > cap) throw CapExceeded("shuffle product arity " + std::to_string(n) + " exceeds cap");
  if (k == 0) return scale(g, f({}));
  if (l == 0) return scale(f, g({}));
  auto eval = [f, g, k, n](const std::vector<F>& x) {
    F total(0);
    std::vector<F> xs, xc;
    for (unsigned s = 0; s < (1u << n); ++s) {
      if (__builtin_popcount(s) != k) continue;
      xs.clear();
      xc.clear();
      for (int i = 0; i < n; ++i) (s >> i & 1u ? xs : xc).push_back(x[i]);
      F term = f(xs);
      if (is_zero(term)) continue;
      term *= g(xc);
      if (is_zero(term)) continue;
      for (int i = 0; i < n; ++i)
        if (s >> i & 1u)
          for (int j = 0; j < n; ++j)
            if (!(s >> j & 1u)) term *= shuffle_kernel(x[i], x[j]);
      total += term;
    }
    return total;
  };
  return SymFun<F>(n, eval, f.name() + "*" + g.name());
}

template <class F>
SymFun<F> shuffle_power(const SymFun<F>& f, int j, int cap = kShuffleArityCap) {
  if (j < 0) throw std::invalid_argument("negative shuffle power");
  if (j * f.arity() > cap) throw CapExceeded("shuffle power arity exceeds cap");
  SymFun<F> r = SymFun<F>::constant(F(1));
  for (int i = 0; i < j; ++i) r = shuffle_product(r, f, cap);
  return r;
}

// A sum of functions of different arities, indexed by arity.
template <class F>
using GradedSymFun = std::vector<SymFun<F>>;

template <class F>
GradedSymFun<F> graded_zero(int max_arity) {
  GradedSymFun<F> g;
  for (int n = 0; n <= max_arity; ++n) g.push_back(SymFun<F>::zero(n));
  return g;
}

namespace detail {

template <class F>
bool is_zero_fun(const SymFun<F>& f) {
  return f.name() == "<zero>";
}

template <class F>
GradedSymFun<F> graded_product(const GradedSymFun<F>& a, const GradedSymFun<F>& b, int max_arity, int cap) {
  GradedSymFun<F> out = graded_zero<F>(max_arity);
  for (int i = 0; i < static_cast<int>(a.size()); ++i)
    for (int j = 0; j < static_cast<int>(b.size()) && i + j <= max_arity; ++j) {
      if (is_zero_fun(a[i]) || is_zero_fun(b[j])) continue;
      auto p = shuffle_product(a[i], b[j], cap);
      out[i + j] = is_zero_fun(out[i + j]) ? p : add(out[i + j], p);
    }
  return out;
}

}  // namespace detail

// Arity components 0..max_arity of exp_*(f) = 1 + f + f^{*2}/2! + ...
// f may mix arities; its arity-0 part must vanish.
template <class F>
GradedSymFun<F> shuffle_exp_truncated(const GradedSymFun<F>& f, int max_arity, int cap = kShuffleArityCap) {
  if (max_arity > cap) throw CapExceeded("max_arity exceeds shuffle cap");
  if (!f.empty() && !detail::is_zero_fun(f[0])) throw ArityError("exponent must have no arity-0 part");
  GradedSymFun<F> result = graded_zero<F>(max_arity);
  result[0] = SymFun<F>::constant(F(1));
  GradedSymFun<F> power = result;
  for (int j = 1; j <= max_arity; ++j) {
    power = detail::graded_product(power, f, max_arity, cap);
    const F inv = F(1) / from_int<F>(j);
    bool any = false;
    for (int n = 0; n <= max_arity; ++n) {
      if (detail::is_zero_fun(power[n])) continue;
      power[n] = scale(power[n], inv);  // power now holds f^{*j}/j!
      result[n] = detail::is_zero_fun(result[n]) ? power[n] : add(result[n], power[n]);
      any = true;
    }
    if (!any) break;
  }
  return result;
}

template <class F>
GradedSymFun<F> shuffle_exp_truncated(const SymFun<F>& f, int max_arity, int cap = kShuffleArityCap) {
  if (f.arity() < 1) throw ArityError("exponent must have positive arity");
  GradedSymFun<F> g = graded_zero<F>(f.arity());
  g[f.arity()] = f;
  return shuffle_exp_truncated(g, max_arity, cap);
}

}  // namespace hsv

#pragma once

#include <cstdlib>
#include <stdexcept>
#include <utility>
#include <vector>

#include "field.hpp"

namespace hsv {

// Small dense row-major matrix over a field.
template <class F>
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols) : r_(rows), c_(cols), a_(static_cast<std::size_t>(rows) * cols, F(0)) {}
  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = F(1);
    return m;
  }

  int rows() const { return r_; }
  int cols() const { return c_; }
  F& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * c_ + j]; }
  const F& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * c_ + j]; }

  friend Matrix operator*(const Matrix& x, const Matrix& y) {
    if (x.c_ != y.r_) throw std::invalid_argument("matrix shape mismatch");
    Matrix z(x.r_, y.c_);
    for (int i = 0; i < x.r_; ++i)
      for (int k = 0; k < x.c_; ++k) {
        if (is_zero(x(i, k))) continue;
        for (int j = 0; j < y.c_; ++j) z(i, j) += x(i, k) * y(k, j);
      }
    return z;
  }
  friend Matrix operator+(Matrix x, const Matrix& y) {
    for (std::size_t i = 0; i < x.a_.size(); ++i) x.a_[i] += y.a_[i];
    return x;
  }
  friend Matrix operator-(Matrix x, const Matrix& y) {
    for (std::size_t i = 0; i < x.a_.size(); ++i) x.a_[i] -= y.a_[i];
    return x;
  }
  Matrix transpose() const {
    Matrix t(c_, r_);
    for (int i = 0; i < r_; ++i)
      for (int j = 0; j < c_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }
  // Principal submatrix on the given (sorted) index list.
  Matrix principal(const std::vector<int>& idx) const {
    int n = static_cast<int>(idx.size());
    Matrix s(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s(i, j) = (*this)(idx[i], idx[j]);
    return s;
  }

 private:
  int r_ = 0, c_ = 0;
  std::vector<F> a_;
};

// Largest entrywise residual |x - y|; 0 means exact equality in the rational backend.
template <class F>
double max_residual(const Matrix<F>& x, const Matrix<F>& y) {
  double r = 0.0;
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < x.cols(); ++j) r = std::max(r, residual_of(x(i, j), y(i, j)));
  return r;
}

template <class F>
F determinant(Matrix<F> m) {
  const int n = m.rows();
  if (n != m.cols()) throw std::invalid_argument("determinant of non-square matrix");
  F det(1);
  for (int k = 0; k < n; ++k) {
    int piv = -1;
    double best = -1.0;
    for (int i = k; i < n; ++i) {
      if (is_zero(m(i, k))) continue;
      if constexpr (field_traits<F>::exact) {
        piv = i;
        break;
      } else {
        double v = std::abs(m(i, k));
        if (v > best) best = v, piv = i;
      }
    }
    if (piv < 0) return F(0);
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(m(k, j), m(piv, j));
      det = -det;
    }
    det *= m(k, k);
    for (int i = k + 1; i < n; ++i) {
      if (is_zero(m(i, k))) continue;
      F f = m(i, k) / m(k, k);
      for (int j = k; j < n; ++j) m(i, j) -= f * m(k, j);
    }
  }
  return det;
}

}  // namespace hsv

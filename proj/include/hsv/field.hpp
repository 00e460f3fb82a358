#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <compare>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace hsv {

struct DivisionByZero : std::domain_error {
  using std::domain_error::domain_error;
};
struct DegeneratePoint : std::domain_error {
  using std::domain_error::domain_error;
};
struct GuardViolated : std::domain_error {
  using std::domain_error::domain_error;
};
struct CapExceeded : std::length_error {
  using std::length_error::length_error;
};
struct TruncationTooSmall : std::length_error {
  using std::length_error::length_error;
};
struct ArityError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct NotSkewSymmetric : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct ContourInvalid : std::domain_error {
  using std::domain_error::domain_error;
};
struct QuadratureNotConverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CutoffTooSmall : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exact rational scalar. Thin eager wrapper over mpq_class so that generic
// code never sees GMP expression templates and division by zero throws.
class Rational {
 public:
  Rational() = default;
  Rational(int n) : v_(n) {}
  Rational(long n) : v_(n) {}
  Rational(long n, long d) {
    if (d == 0) throw DivisionByZero("rational with zero denominator");
    v_ = mpq_class(mpz_class(n), mpz_class(d));
    v_.canonicalize();
  }
  explicit Rational(const mpq_class& v) : v_(v) {}

  // Accepts "p", "p/q" and "-p/q".
  static Rational parse(const std::string& s) {
    mpq_class v;
    if (s.empty() || v.set_str(s, 10) != 0)
      throw std::invalid_argument("not a rational: '" + s + "'");
    if (v.get_den() == 0) throw DivisionByZero("rational with zero denominator: " + s);
    v.canonicalize();
    return Rational(v);
  }

  const mpq_class& get() const { return v_; }
  std::string str() const { return v_.get_str(); }
  std::string num_str() const { return v_.get_num().get_str(); }
  std::string den_str() const { return v_.get_den().get_str(); }
  double to_double() const { return v_.get_d(); }
  bool is_zero() const { return sgn(v_) == 0; }

  Rational& operator+=(const Rational& o) { v_ += o.v_; return *this; }
  Rational& operator-=(const Rational& o) { v_ -= o.v_; return *this; }
  Rational& operator*=(const Rational& o) { v_ *= o.v_; return *this; }
  Rational& operator/=(const Rational& o) {
    if (o.is_zero()) throw DivisionByZero("rational division by zero");
    v_ /= o.v_;
    return *this;
  }
  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }
  Rational operator-() const { return Rational(mpq_class(-v_)); }

  friend bool operator==(const Rational& a, const Rational& b) { return a.v_ == b.v_; }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    int c = cmp(a.v_, b.v_);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

 private:
  mpq_class v_;
};

using Complex = std::complex<double>;

template <class F>
struct field_traits;

template <>
struct field_traits<Rational> {
  static constexpr bool exact = true;
  static constexpr const char* name = "rational";
};

template <>
struct field_traits<Complex> {
  static constexpr bool exact = false;
  static constexpr const char* name = "complex";
  static constexpr int digits = std::numeric_limits<double>::digits;
};

inline bool is_zero(const Rational& r) { return r.is_zero(); }
inline bool is_zero(const Complex& c) { return c.real() == 0.0 && c.imag() == 0.0; }
inline bool is_zero(double d) { return d == 0.0; }

inline Complex to_complex(const Rational& r) { return Complex(r.to_double(), 0.0); }
inline Complex to_complex(const Complex& c) { return c; }

inline double magnitude(const Rational& r) { return std::abs(r.to_double()); }
inline double magnitude(const Complex& c) { return std::abs(c); }

// Division that refuses to produce an infinity in either backend.
template <class F>
F quot(const F& a, const F& b, const char* what = "denominator") {
  if (is_zero(b)) throw DivisionByZero(std::string("division by zero: ") + what);
  return a / b;
}

template <class F>
F from_int(long n) {
  return F(n);
}

template <class F>
F power(F base, int e) {
  if (e < 0) return quot(F(1), power(base, -e));
  F r(1);
  while (e > 0) {
    if (e & 1) r *= base;
    base *= base;
    e >>= 1;
  }
  return r;
}

// Total order used only for memo keys and canonical argument sorting.
struct scalar_less {
  bool operator()(const Rational& a, const Rational& b) const { return a < b; }
  bool operator()(const Complex& a, const Complex& b) const {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  }
};

inline std::string to_string(const Rational& r) { return r.str(); }
inline std::string to_string(const Complex& c) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "(%.17g,%.17g)", c.real(), c.imag());
  return buf;
}

// p/q with |p| <= bound, 1 <= q <= bound.
template <class Rng>
Rational random_rational(Rng& rng, long bound = 97) {
  std::uniform_int_distribution<long> num(-bound, bound);
  std::uniform_int_distribution<long> den(1, bound);
  return Rational(num(rng), den(rng));
}

template <class F, class Rng>
F random_scalar(Rng& rng, long bound = 97) {
  if constexpr (std::is_same_v<F, Rational>) {
    return random_rational(rng, bound);
  } else {
    return Complex(random_rational(rng, bound).to_double(), 0.0);
  }
}

// Largest |entry| difference used for reports; exact backend reports 0 or a
// positive double of the exact difference.
template <class F>
double residual_of(const F& a, const F& b) {
  if constexpr (std::is_same_v<F, Rational>) {
    return (a == b) ? 0.0 : magnitude(a - b);
  } else {
    return std::abs(a - b);
  }
}

template <class F>
bool nearly_equal(const F& a, const F& b, double rel_tol = 1e-10) {
  if constexpr (std::is_same_v<F, Rational>) {
    return a == b;
  } else {
    double scale = std::max({1.0, std::abs(a), std::abs(b)});
    return std::abs(a - b) <= rel_tol * scale;
  }
}

}  // namespace hsv

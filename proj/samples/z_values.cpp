// Prints Z_m for the first m points of a fixed alphabet, by enumeration and by the Pfaffian.
#include <iostream>

#include "hsv/triangular.hpp"

int main() {
  using hsv::Rational;
  hsv::ModelParams<Rational> p;
  p.q = Rational(1, 3);
  p.a = Rational(2);
  p.c = Rational(-5, 2);
  const std::vector<Rational> xs{Rational(1, 2), Rational(2, 3), Rational(-3, 7), Rational(5, 4), Rational(3, 11)};

  for (std::size_t m = 1; m <= xs.size(); ++m) {
    const auto spec = hsv::make_spec(std::vector<Rational>(xs.begin(), xs.begin() + m), p);
    const Rational pf = hsv::z_pfaffian(spec);
    std::cout << "m=" << m << "  Z=" << pf.str() << "  enum_agrees=" << (pf == hsv::z_enumerate(spec) ? "yes" : "no")
              << "\n";
  }
}

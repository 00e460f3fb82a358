// P_t(empty -> nu) for the half-line ASEP three ways.
#include <cstdio>

#include "hsv/asep.hpp"

int main() {
  const hsv::AsepParams p{0.25, 0.5, 0.0, 1.0, 8};
  std::printf("%-8s %-14s %-14s %-14s\n", "nu", "exact", "formula", "monte carlo");
  const auto sim = hsv::simulate_gillespie(hsv::Config{}, p, 200000, 42);
  for (const hsv::Config& nu : {hsv::Config{}, hsv::Config{1}, hsv::Config{2}, hsv::Config{2, 1}}) {
    const double exact = hsv::transition_prob_exact(hsv::Config{}, nu, p).value;
    const double formula = hsv::transition_prob_formula(nu, p);
    const auto it = sim.estimates.find(nu);
    const double mc = it == sim.estimates.end() ? 0.0 : it->second.p;
    std::printf("%-8s %-14.10f %-14.10f %-14.6f\n", nu.str().c_str(), exact, formula, mc);
  }
}

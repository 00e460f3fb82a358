#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "field.hpp"

namespace hsv {

inline constexpr int kMaxSites = 62;

// Finite particle configuration: strictly decreasing positive positions.
class Config {
 public:
  Config() = default;
  explicit Config(std::vector<int> parts) : parts_(std::move(parts)) {
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      if (parts_[i] < 1) throw std::invalid_argument("config positions must be >= 1");
      if (parts_[i] > kMaxSites) throw std::invalid_argument("config position beyond supported range");
      if (i > 0 && parts_[i] >= parts_[i - 1])
        throw std::invalid_argument("config positions must be strictly decreasing");
    }
  }
  Config(std::initializer_list<int> parts) : Config(std::vector<int>(parts)) {}

  // Sorts and checks distinctness; used for user input.
  static Config from_unordered(std::vector<int> parts) {
    std::sort(parts.begin(), parts.end(), std::greater<>());
    if (std::adjacent_find(parts.begin(), parts.end()) != parts.end())
      throw std::invalid_argument("config positions must be distinct");
    return Config(std::move(parts));
  }

  static Config from_mask(std::uint64_t m) {
    std::vector<int> p;
    for (int s = kMaxSites; s >= 1; --s)
      if (m >> (s - 1) & 1u) p.push_back(s);
    return Config(std::move(p));
  }

  std::uint64_t mask() const {
    std::uint64_t m = 0;
    for (int p : parts_) m |= std::uint64_t{1} << (p - 1);
    return m;
  }

  const std::vector<int>& parts() const { return parts_; }
  int size() const { return static_cast<int>(parts_.size()); }
  bool empty() const { return parts_.empty(); }
  int max_part() const { return parts_.empty() ? 0 : parts_.front(); }
  int occupation(int site) const {
    return std::find(parts_.begin(), parts_.end(), site) != parts_.end() ? 1 : 0;
  }

  std::string str() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < parts_.size(); ++i) os << (i ? "," : "") << parts_[i];
    os << ')';
    return os.str();
  }

  friend bool operator==(const Config&, const Config&) = default;
  friend auto operator<=>(const Config& a, const Config& b) {
    if (a.size() != b.size()) return a.size() <=> b.size();
    return a.parts_ <=> b.parts_;
  }

 private:
  std::vector<int> parts_;
};

// All configurations supported on [1, n_sites] with at most max_particles
// particles (negative = no limit), ordered by size then lexicographically.
inline std::vector<Config> configs_up_to(int n_sites, int max_particles = -1) {
  if (n_sites > 24) throw std::length_error("configs_up_to: too many sites");
  std::vector<Config> out;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << n_sites); ++m) {
    int pc = __builtin_popcountll(m);
    if (max_particles >= 0 && pc > max_particles) continue;
    out.push_back(Config::from_mask(m));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Finitely supported bra; zero coefficients are never stored.
template <class F>
using SparseState = std::map<Config, F>;

template <class F>
void add_to(SparseState<F>& s, const Config& c, const F& w) {
  auto it = s.find(c);
  if (it == s.end()) {
    if (!is_zero(w)) s.emplace(c, w);
    return;
  }
  it->second += w;
  if (is_zero(it->second)) s.erase(it);
}

}  // namespace hsv

#pragma once

// Seeded generators for the property suites.

#include <cmath>
#include <random>
#include <vector>

#include "stp/markov_ifs.hpp"

namespace stp::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  // 2..max_k ratios in [0.02, 0.9) with total length <= 1.
  std::vector<double> ratios(int max_k = 5) {
    const int k = integer(2, max_k);
    std::vector<double> r(static_cast<std::size_t>(k));
    double total = 0.0;
    for (auto& x : r) {
      x = uniform(0.02, 0.9);
      total += x;
    }
    const double budget = uniform(0.3, 1.0);
    if (total > budget)
      for (auto& x : r) x *= budget / total;
    return r;
  }

  Word word(const std::vector<Symbol>& alphabet, std::size_t len) {
    Word w;
    for (std::size_t k = 0; k < len; ++k)
      w.push_back(alphabet[static_cast<std::size_t>(integer(0, static_cast<int>(alphabet.size()) - 1))]);
    return w;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline std::vector<Symbol> range_symbols(Symbol k) {
  std::vector<Symbol> v;
  for (Symbol i = 1; i <= k; ++i) v.push_back(i);
  return v;
}

}  // namespace stp::testing

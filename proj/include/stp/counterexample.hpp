#pragma once

// Affine Markov system with dim = beta whose shrinking-target set at y = 0
// has dimension zero. Branches: V_1, V_2 in (Phi(n0), 1) with equal widths
// r_1 = r_2, and V_n in (Phi(n+1), Phi(n)) for every n >= n0.
//
// Widths r_n (n >= n0) are kept as logarithms: they underflow double
// precision already for moderate n.

#include <stdexcept>
#include <string>
#include <vector>

#include "stp/markov_ifs.hpp"
#include "stp/targets.hpp"

namespace stp {

// Strictly decreasing Phi : N -> (0,1) with Phi(n) -> 0.
class ShrinkFn {
 public:
  enum class Kind { reciprocal, power, exponential };

  static ShrinkFn reciprocal();            // 1/n
  static ShrinkFn power(double p);         // n^-p, p > 0
  static ShrinkFn exponential(double c);   // exp(-c n), c > 0
  // Inverse of to_string: "reciprocal", "power <p>", "exponential <c>".
  static ShrinkFn parse(const std::string& text);

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] double parameter() const { return param_; }
  [[nodiscard]] double operator()(double n) const;
  [[nodiscard]] double log_value(double n) const;
  // log(Phi(n) - Phi(n+1)), without cancellation.
  [[nodiscard]] double log_gap(double n) const;
  [[nodiscard]] std::string to_string() const;

 private:
  ShrinkFn(Kind k, double p) : kind_(k), param_(p) {}
  Kind kind_;
  double param_;
};

class SearchCapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CounterexampleSystem {
  double beta = 0.5;
  ShrinkFn phi = ShrinkFn::reciprocal();
  unsigned n0 = 3;
  double r1 = 0.0;
  double r2 = 0.0;

  // log r_n: symbols 1, 2 and every n >= n0.
  [[nodiscard]] double log_width(unsigned n) const;
  [[nodiscard]] double width(unsigned n) const;
  // V_n, centered in its gap.
  [[nodiscard]] Interval interval(unsigned n) const;
  // Upper bound for sum_{n >= k, n >= n0} r_n^e (e > 0).
  [[nodiscard]] double tail_bound(double e, unsigned k) const;
  // log sum_{n >= k, n in A} r_n^e, summed explicitly until the remainder
  // is negligible, plus the remainder bound.
  [[nodiscard]] double log_tail_sum(double e, unsigned k) const;
  [[nodiscard]] std::vector<Symbol> symbols_up_to(unsigned count) const;

  // Countable affine system; affine_geometric-style closed-form tails.
  [[nodiscard]] MarkovSystem as_system() const;
};

// log min(A_n, B_n) with A_n = (2 + 1/expm1(1/n))^{-n^2} e^{-2 n^2} and
// B_n = (Phi(n) - Phi(n+1))/2.
double counterexample_log_width(const ShrinkFn& phi, unsigned n);

CounterexampleSystem build_counterexample(double beta, const ShrinkFn& phi, unsigned search_cap = 1'000'000);

// Rebuilds a system from stored fields, validating them.
CounterexampleSystem restore_counterexample(double beta, const ShrinkFn& phi, unsigned n0, double r1, double r2);

// |r_1^b + r_2^b + sum_{n >= n0} r_n^b - 1| plus the certified tail remainder.
double verify_moran(const CounterexampleSystem& ce);

struct ZeroDimReport {
  CoverReport cover;              // per-level log sums over C_n
  std::vector<bool> level_ok;     // level n sum <= e^{-n} / (e - 1)
  double total_bound = 0.0;       // 1 / (e - 1)^2
  bool all_levels_ok = false;
  bool total_ok = false;
};

// Level n: sum over words of length n+1 whose last symbol is >= n of
// (prod r)^eps = (sum_A r^eps)^n * sum_{q >= n} r_q^eps.
ZeroDimReport zero_dim_cover_report(const CounterexampleSystem& ce, double eps, int m, int n_max);

}  // namespace stp

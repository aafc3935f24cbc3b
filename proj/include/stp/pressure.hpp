#pragma once

// Birkhoff-sum brackets and two-sided truncated pressure estimates.
//
// Sign convention: the functions below take a nonnegative potential `pot`
// and work with the weights exp(-S_n(pot)), i.e. they estimate P(-pot).
// Pressure of -s(psi + phi) is requested as pot = scale(s, sum(psi, phi)).

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stp/markov_ifs.hpp"

namespace stp {

using SymbolBracketFn = std::function<Interval(Symbol)>;
// n -> bound on var_n(S_n phi) / n.
using VariationFn = std::function<double(unsigned)>;

// Flattened form a*psi + b + sum_k c_k * table_k with a, b, c_k >= 0.
struct LinearPotential {
  double psi = 0.0;
  double constant = 0.0;
  std::vector<std::pair<double, SymbolBracketFn>> tables;

  [[nodiscard]] bool has_tables() const { return !tables.empty(); }
  // Bracket of the per-symbol part on V_i.
  [[nodiscard]] Interval table_bracket(Symbol i) const;
};

// Immutable expression tree over psi = log|T'|, constants, nonnegative
// scaling, sums and per-branch brackets.
class Potential {
 public:
  static Potential log_derivative();
  static Potential constant(double c);
  static Potential scale(double c, const Potential& inner);
  static Potential sum(const Potential& a, const Potential& b);
  // `table(i)` brackets phi on V_i; `variation` is the decay sequence
  // var_n(S_n phi)/n, checked to be nonincreasing on its first terms.
  static Potential per_symbol(SymbolBracketFn table, VariationFn variation = {},
                              std::string label = "table");
  // Table for symbols 1..k.
  static Potential per_symbol(std::vector<Interval> table);

  [[nodiscard]] LinearPotential linearize() const;
  // Prefix notation, e.g. "scale 2 sum psi const 0.5".
  [[nodiscard]] std::string to_string() const;

 private:
  struct Node;
  explicit Potential(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

// Range of S_n(pot) over the cylinder of `word` (n = |word|).
Interval birkhoff_bracket(const MarkovSystem& sys, const Potential& pot, const Word& word);
// Same, from precomputed cylinder data.
Interval birkhoff_bracket(const LinearPotential& lin, const CylinderGeometry& cyl);

enum class Mode { sup, inf };
enum class Reduction { parallel, sequential };
// Set over which sup/inf of Birkhoff sums are taken on each cylinder:
// phi_w([0,1]) or phi_w(hull of the limit set of the subsystem).
enum class BaseSet { unit_interval, limit_hull };

struct PressureOptions {
  std::uint64_t budget = 10'000'000;  // max words at the deepest level
  Reduction reduction = Reduction::parallel;
  BaseSet base = BaseSet::unit_interval;
};

// log sum_{w in F^n} exp(b_w), with b_w the sup (or inf) end of the bracket
// of -S_n(pot) on the cylinder of w.
double partition_sum(const MarkovSystem& sys, const Potential& pot, const std::vector<Symbol>& subset,
                     int depth, Mode mode, const PressureOptions& options = {});

struct PressureEstimate {
  double lower = -kInf;
  double upper = kInf;
  std::vector<Symbol> subset;
  int depth = 0;          // deepest level evaluated
  bool diverged = false;  // depth-1 full-alphabet sup-sum is infinite

  [[nodiscard]] bool positive() const { return lower > 0.0; }
  [[nodiscard]] bool nonpositive() const { return upper <= 0.0; }
};

// Largest n with |F|^n <= budget (at least 1, at most 64).
int default_depth(std::size_t subset_size, std::uint64_t budget);

// Called after each refinement pass; returning true stops early.
using StopFn = std::function<bool(const PressureEstimate&)>;

// Fekete bracket of P(-pot): lower = max_n (1/n) log Z_n^inf(F) and
// upper = min_n (1/n) log Z_n^sup, where for F != A the sup-sum is enlarged to
// dominate all of A^n using `tail` (sum over i not in F of the depth-1 sup
// weights). Without `tail` the family's closed form is used; if it has none,
// upper = +inf.
PressureEstimate pressure_bracket(const MarkovSystem& sys, const Potential& pot,
                                  const std::vector<Symbol>& subset, int max_depth,
                                  const PressureOptions& options = {},
                                  std::optional<double> tail = std::nullopt, const StopFn& stop = {});

}  // namespace stp

#pragma once

// Bowen-type equations solved by bisection over certified pressure signs.
//
// For a nonincreasing s -> P(s) the solvers bracket s* = inf{s : P(s) <= 0}.
// Two edges are tracked: the largest s with a certified positive lower
// bound and the smallest s with a certified nonpositive upper bound.

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "stp/pressure.hpp"

namespace stp {

struct Truncation {
  std::vector<Symbol> subset;
  int depth = 0;
};

struct DimensionResult {
  double value = 0.0;  // midpoint of [lo, hi] (lo when hi is infinite)
  double lo = 0.0;
  double hi = kInf;
  double tolerance = 0.0;
  Truncation truncation;  // largest ladder rung and depth actually used
  bool certified = false;  // hi - lo <= tolerance
};

// Truncation ladder and pressure settings shared by the solvers.
struct SolveOptions {
  double tol = 1e-9;
  // Increasing finite subsets. Empty means the whole alphabet (finite only).
  std::vector<std::vector<Symbol>> ladder;
  int n_max = 0;  // 0 picks the budget-limited default per rung
  PressureOptions pressure{10'000'000, Reduction::parallel, BaseSet::limit_hull};
};

// Ladder of the k smallest symbols for each k in `sizes`.
std::vector<std::vector<Symbol>> prefix_ladder(const Alphabet& alphabet, const std::vector<std::size_t>& sizes);

// Ratios given as log r_k for explicitly listed terms, plus an optional
// upper bound on sum of r^s over the remaining ones.
struct RatioSeries {
  std::vector<double> log_ratios;
  std::function<double(double s)> tail;
};

// Solves sum r_i^s = 1.
DimensionResult moran_solve(const std::vector<double>& ratios, double tol);
DimensionResult moran_solve(const RatioSeries& series, double tol);

// inf{s : P(-s psi) <= 0}.
DimensionResult bowen_dimension(const MarkovSystem& sys, const SolveOptions& options = {});

// inf{s : P(-s psi) <= s alpha}, i.e. the potential phi = alpha.
DimensionResult shrink_exponent_alpha(const MarkovSystem& sys, double alpha, const SolveOptions& options = {});

// inf{s : P(-s (psi + phi)) <= 0}.
DimensionResult shrink_exponent_potential(const MarkovSystem& sys, const Potential& phi,
                                          const SolveOptions& options = {});

// One shrink_exponent_alpha row per grid point, in grid order.
std::vector<std::pair<double, DimensionResult>> spectrum(const MarkovSystem& sys, const std::vector<double>& alphas,
                                                         const SolveOptions& options = {});

}  // namespace stp

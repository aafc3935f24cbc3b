#include "stp/pressure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <variant>

#include "stp/cylinder_walk.hpp"
#include "stp/log_sum_exp.hpp"

namespace stp {

using namespace rounding;

// ---------------------------------------------------------------- Potential

namespace {

struct LogDerivNode {};
struct ConstantNode {
  double c;
};
struct ScaleNode {
  double c;
  Potential inner;
};
struct SumNode {
  Potential left, right;
};
struct TableNode {
  SymbolBracketFn table;
  VariationFn variation;
  std::string label;
};

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

struct Potential::Node {
  std::variant<LogDerivNode, ConstantNode, ScaleNode, SumNode, TableNode> value;
};

Interval LinearPotential::table_bracket(Symbol i) const {
  Interval total{0.0, 0.0};
  for (const auto& [coef, fn] : tables) {
    const Interval v = fn(i);
    if (!(v.lo >= 0.0) || !(v.lo <= v.hi))
      throw DomainError("per-branch potential bracket must be nonnegative with lo <= hi (symbol " +
                        std::to_string(i) + ")");
    total = total + scale(coef, v);
  }
  return total;
}

Potential Potential::log_derivative() {
  return Potential(std::make_shared<const Node>(Node{LogDerivNode{}}));
}

Potential Potential::constant(double c) {
  if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("constant potential must be finite and >= 0");
  return Potential(std::make_shared<const Node>(Node{ConstantNode{c}}));
}

Potential Potential::scale(double c, const Potential& inner) {
  if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("potential scale factor must be finite and >= 0");
  return Potential(std::make_shared<const Node>(Node{ScaleNode{c, inner}}));
}

Potential Potential::sum(const Potential& a, const Potential& b) {
  return Potential(std::make_shared<const Node>(Node{SumNode{a, b}}));
}

Potential Potential::per_symbol(SymbolBracketFn table, VariationFn variation, std::string label) {
  if (!table) throw DomainError("per-branch potential needs a bracket table");
  if (variation) {
    double prev = kInf;
    for (unsigned n = 1; n <= 64; ++n) {
      const double v = variation(n);
      if (!(v >= 0.0) || !std::isfinite(v) || v > prev)
        throw DomainError("variation sequence must be finite, nonnegative and nonincreasing");
      prev = v;
    }
  }
  return Potential(std::make_shared<const Node>(
      Node{TableNode{std::move(table), std::move(variation), std::move(label)}}));
}

Potential Potential::per_symbol(std::vector<Interval> table) {
  if (table.empty()) throw DomainError("per-branch table is empty");
  std::string label = "branch ";
  for (std::size_t k = 0; k < table.size(); ++k) {
    if (!(table[k].lo >= 0.0) || !(table[k].lo <= table[k].hi))
      throw DomainError("per-branch potential bracket must be nonnegative with lo <= hi");
    label += (k ? "," : "") + fmt_double(table[k].lo) + ":" + fmt_double(table[k].hi);
  }
  auto shared = std::make_shared<const std::vector<Interval>>(std::move(table));
  auto fn = [shared](Symbol i) -> Interval {
    if (i == 0 || i > shared->size())
      throw DomainError("per-branch table has no entry for symbol " + std::to_string(i));
    return (*shared)[i - 1];
  };
  return per_symbol(fn, [](unsigned) { return 0.0; }, label);
}

LinearPotential Potential::linearize() const {
  return std::visit(
      [](const auto& n) -> LinearPotential {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, LogDerivNode>) {
          return {1.0, 0.0, {}};
        } else if constexpr (std::is_same_v<T, ConstantNode>) {
          return {0.0, n.c, {}};
        } else if constexpr (std::is_same_v<T, ScaleNode>) {
          LinearPotential l = n.inner.linearize();
          l.psi *= n.c;
          l.constant *= n.c;
          for (auto& t : l.tables) t.first *= n.c;
          return l;
        } else if constexpr (std::is_same_v<T, SumNode>) {
          LinearPotential a = n.left.linearize();
          LinearPotential b = n.right.linearize();
          a.psi += b.psi;
          a.constant += b.constant;
          for (auto& t : b.tables) a.tables.push_back(std::move(t));
          return a;
        } else {
          return {0.0, 0.0, {{1.0, n.table}}};
        }
      },
      node_->value);
}

std::string Potential::to_string() const {
  return std::visit(
      [](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, LogDerivNode>) {
          return "psi";
        } else if constexpr (std::is_same_v<T, ConstantNode>) {
          return "const " + fmt_double(n.c);
        } else if constexpr (std::is_same_v<T, ScaleNode>) {
          return "scale " + fmt_double(n.c) + " " + n.inner.to_string();
        } else if constexpr (std::is_same_v<T, SumNode>) {
          return "sum " + n.left.to_string() + " " + n.right.to_string();
        } else {
          return n.label;
        }
      },
      node_->value);
}

// ---------------------------------------------------------------- brackets

Interval birkhoff_bracket(const LinearPotential& lin, const CylinderGeometry& cyl) {
  const double n = static_cast<double>(cyl.word.size());
  const Interval psi{-cyl.log_deriv.hi, -cyl.log_deriv.lo};
  Interval total = scale(lin.psi, psi) + Interval{mul_down(n, lin.constant), mul_up(n, lin.constant)};
  if (lin.has_tables())
    for (Symbol s : cyl.word) total = total + lin.table_bracket(s);
  return total;
}

Interval birkhoff_bracket(const MarkovSystem& sys, const Potential& pot, const Word& word) {
  return birkhoff_bracket(pot.linearize(), cylinder(sys, word));
}

// ---------------------------------------------------------------- engine

namespace {

struct LevelSums {
  std::vector<LogSumExp> sup, inf;
  LevelSums() = default;
  explicit LevelSums(int depth) : sup(static_cast<std::size_t>(depth) + 1), inf(static_cast<std::size_t>(depth) + 1) {}
  void merge(const LevelSums& o) {
    for (std::size_t k = 0; k < sup.size(); ++k) {
      sup[k].merge(o.sup[k]);
      inf[k].merge(o.inf[k]);
    }
  }
};

LevelSums walk_one(const MarkovSystem& sys, const LinearPotential& lin, const std::vector<Symbol>& subset,
                   int depth, const Interval& base, Symbol last) {
  LevelSums sums(depth);
  const double a = lin.psi;
  const double b = lin.constant;
  auto visit = [&](const CylinderNode& node, const Interval& table) {
    const double d = node.depth;
    const double e_sup = sub_up(sub_up(mul_up(a, node.log_deriv.hi), mul_down(d, b)), table.lo);
    const double e_inf = sub_down(sub_down(mul_down(a, node.log_deriv.lo), mul_up(d, b)), table.hi);
    sums.sup[static_cast<std::size_t>(node.depth)].add(e_sup);
    sums.inf[static_cast<std::size_t>(node.depth)].add(e_inf);
  };
  if (lin.has_tables()) {
    auto extend = [&](const Interval& t, Symbol j) { return t + lin.table_bracket(j); };
    walk_suffix_tree(sys.family(), subset, depth, base, last, Interval{0.0, 0.0}, extend, visit);
  } else {
    auto extend = [](const Interval& t, Symbol) { return t; };
    walk_suffix_tree(sys.family(), subset, depth, base, last, Interval{0.0, 0.0}, extend, visit);
  }
  return sums;
}

// Level sums for all depths 1..depth. Partials are formed per last symbol and
// merged in subset order, so the result does not depend on the thread count.
LevelSums accumulate(const MarkovSystem& sys, const LinearPotential& lin, const std::vector<Symbol>& subset,
                     int depth, const Interval& base, Reduction reduction) {
  const bool threaded = reduction == Reduction::parallel &&
                        word_count(subset.size(), static_cast<std::size_t>(depth)) >= (1u << 14);
  const auto partial = map_last_symbols(subset, threaded, [&](Symbol last) {
    return walk_one(sys, lin, subset, depth, base, last);
  });
  LevelSums total(depth);
  for (const auto& p : partial) total.merge(p);
  return total;
}

// Accumulated rounding in a log-sum of `terms` positive terms.
double log_sum_slack(double value, std::uint64_t terms) {
  return (static_cast<double>(terms) + 4.0) * 2.3e-16 + std::abs(value) * 2.3e-16;
}

void check_budget(std::size_t subset_size, int depth, std::uint64_t budget) {
  if (word_count(subset_size, static_cast<std::size_t>(depth)) > budget) {
    int deepest = 0;
    while (deepest < 64 && word_count(subset_size, static_cast<std::size_t>(deepest) + 1) <= budget) ++deepest;
    throw BudgetError("depth " + std::to_string(depth) + " over " + std::to_string(subset_size) +
                          " symbols exceeds the word budget of " + std::to_string(budget),
                      budget, deepest);
  }
}

}  // namespace

int default_depth(std::size_t subset_size, std::uint64_t budget) {
  int n = 1;
  while (n < 64 && word_count(subset_size, static_cast<std::size_t>(n) + 1) <= budget) ++n;
  return n;
}

double partition_sum(const MarkovSystem& sys, const Potential& pot, const std::vector<Symbol>& subset,
                     int depth, Mode mode, const PressureOptions& options) {
  const std::vector<Symbol> f = checked_subset(sys, subset);
  if (depth < 1) throw DomainError("partition_sum: depth must be >= 1");
  check_budget(f.size(), depth, options.budget);
  const Interval base = options.base == BaseSet::limit_hull ? limit_hull(sys, f) : Interval::unit();
  const LevelSums sums = accumulate(sys, pot.linearize(), f, depth, base, options.reduction);
  const auto k = static_cast<std::size_t>(depth);
  return mode == Mode::sup ? sums.sup[k].value() : sums.inf[k].value();
}

PressureEstimate pressure_bracket(const MarkovSystem& sys, const Potential& pot,
                                  const std::vector<Symbol>& subset, int max_depth,
                                  const PressureOptions& options, std::optional<double> tail,
                                  const StopFn& stop) {
  PressureEstimate est;
  est.subset = checked_subset(sys, subset);
  const std::vector<Symbol>& f = est.subset;
  if (max_depth < 0) throw DomainError("pressure_bracket: depth must be >= 1");
  if (max_depth == 0) max_depth = default_depth(f.size(), options.budget);
  check_budget(f.size(), max_depth, options.budget);

  const LinearPotential lin = pot.linearize();
  const Alphabet& alphabet = sys.alphabet();
  const bool full = alphabet.is_finite() && alphabet.size() == f.size();

  // Depth-1 sup weight of the symbols outside F.
  double tail_weight = 0.0;
  if (!full) {
    if (tail) {
      tail_weight = *tail;
    } else {
      double t = sys.family().tail_sum(lin.psi, f.back());
      for (Symbol i : alphabet.up_to(f.back())) {
        if (std::binary_search(f.begin(), f.end(), i)) continue;
        const double log_sup = sys.family().log_abs_deriv(i, Interval::unit()).hi;
        t = add_up(t, exp_up(mul_up(lin.psi, log_sup)));
      }
      tail_weight = std::isfinite(t) ? mul_up(t, exp_up(-lin.constant)) : kInf;
    }
  }
  est.diverged = !std::isfinite(tail_weight);
  const double log_tail = tail_weight > 0.0 ? log_up(tail_weight) : -kInf;

  const Interval lower_base = options.base == BaseSet::limit_hull ? limit_hull(sys, f) : Interval::unit();
  const Interval upper_base = (options.base == BaseSet::limit_hull && full) ? lower_base : Interval::unit();
  const bool shared_pass = lower_base == upper_base;

  for (int d = 1;; d = std::min(max_depth, 2 * d)) {
    const LevelSums low = accumulate(sys, lin, f, d, lower_base, options.reduction);
    const LevelSums high = shared_pass ? low : accumulate(sys, lin, f, d, upper_base, options.reduction);
    for (int n = 1; n <= d; ++n) {
      const auto k = static_cast<std::size_t>(n);
      const std::uint64_t terms = word_count(f.size(), k);
      const double dn = n;
      const double z_inf = low.inf[k].value();
      if (std::isfinite(z_inf))
        est.lower = std::max(est.lower, div_down(z_inf - log_sum_slack(z_inf, terms), dn));
      if (est.diverged) continue;
      double z_sup = high.sup[k].value();
      if (log_tail > -kInf) {
        // |A^n| sup-sum <= Z_n(F) + Z_1(A)^n - Z_1(F)^n <= Z_n(F) + n * tail * Z_1(A)^(n-1).
        const double z1_full = log_add(high.sup[1].value(), log_tail);
        z_sup = log_add(z_sup, std::log(dn) + log_tail + (dn - 1.0) * z1_full);
      }
      if (std::isfinite(z_sup) || z_sup == -kInf)
        est.upper = std::min(est.upper, div_up(z_sup + log_sum_slack(z_sup, terms), dn));
    }
    if (est.diverged) est.upper = kInf;
    est.depth = d;
    if (d == max_depth || (stop && stop(est))) break;
  }
  return est;
}

}  // namespace stp

#include "stp/targets.hpp"

#include <algorithm>
#include <cmath>

#include "stp/cylinder_walk.hpp"
#include "stp/log_sum_exp.hpp"

namespace stp {

using namespace rounding;

TargetSpec::TargetSpec(double y_, ConstantRate r) : y(y_), rate(r) {
  if (!(y >= 0.0 && y <= 1.0)) throw DomainError("target point must lie in [0,1]");
  if (!(r.alpha > 0.0) || !std::isfinite(r.alpha)) throw DomainError("target rate alpha must be finite and > 0");
}

TargetSpec::TargetSpec(double y_, PotentialRate r) : y(y_), rate(std::move(r)) {
  if (!(y >= 0.0 && y <= 1.0)) throw DomainError("target point must lie in [0,1]");
}

Potential TargetSpec::potential() const {
  if (const auto* c = std::get_if<ConstantRate>(&rate)) return Potential::constant(c->alpha);
  return std::get<PotentialRate>(rate).phi;
}

namespace {

// Lower bound on the distance from y to the union of the level-1 domains of F.
double distance_to_domains(const MarkovSystem& sys, double y, const std::vector<Symbol>& subset) {
  double d = kInf;
  for (Symbol j : subset) {
    const Interval v = sys.family().domain(j);
    double gap = 0.0;
    if (y < v.lo) gap = sub_down(v.lo, y);
    else if (y > v.hi) gap = sub_down(y, v.hi);
    d = std::min(d, std::max(gap, 0.0));
  }
  return d;
}

// Lower end of S_d(phi) on a cylinder with log-derivative range `logd`.
double birkhoff_inf(const LinearPotential& lin, int depth, const Interval& logd, const Interval& table) {
  return add_down(add_down(mul_down(lin.psi, -logd.hi), mul_down(depth, lin.constant)), table.lo);
}

struct LevelAcc {
  std::vector<LogSumExp> sums;
  std::vector<std::uint64_t> words;
};

}  // namespace

CoverReport cover_sum(const MarkovSystem& sys, const TargetSpec& target, double s, int m, int n_max,
                      const std::vector<Symbol>& subset, const PressureOptions& options) {
  if (!(s > 0.0)) throw DomainError("cover_sum: s must be > 0");
  if (m < 1 || n_max < m) throw DomainError("cover_sum: need 1 <= m <= n_max");
  const std::vector<Symbol> f = checked_subset(sys, subset);
  if (word_count(f.size(), static_cast<std::size_t>(n_max)) > options.budget) {
    int deepest = 0;
    while (deepest < 64 && word_count(f.size(), static_cast<std::size_t>(deepest) + 1) <= options.budget) ++deepest;
    throw BudgetError("cover_sum: level " + std::to_string(n_max) + " exceeds the word budget of " +
                          std::to_string(options.budget),
                      options.budget, deepest);
  }
  const LinearPotential lin = target.potential().linearize();
  const double dist = distance_to_domains(sys, target.y, f);
  const auto levels = static_cast<std::size_t>(n_max) + 1;

  auto walk = [&](Symbol last) {
    LevelAcc acc{std::vector<LogSumExp>(levels), std::vector<std::uint64_t>(levels, 0)};
    auto visit = [&](const CylinderNode& node, const Interval& table) {
      if (node.depth < m) return;
      const double inf_phi = birkhoff_inf(lin, node.depth, node.log_deriv, table);
      if (!(dist < exp_up(-inf_phi))) return;
      const auto k = static_cast<std::size_t>(node.depth);
      acc.sums[k].add(mul_up(s, sub_up(node.log_deriv.hi, inf_phi)));
      ++acc.words[k];
    };
    if (lin.has_tables()) {
      auto extend = [&](const Interval& t, Symbol j) { return t + lin.table_bracket(j); };
      walk_suffix_tree(sys.family(), f, n_max, Interval::unit(), last, Interval{0.0, 0.0}, extend, visit);
    } else {
      auto extend = [](const Interval& t, Symbol) { return t; };
      walk_suffix_tree(sys.family(), f, n_max, Interval::unit(), last, Interval{0.0, 0.0}, extend, visit);
    }
    return acc;
  };
  const bool threaded = options.reduction == Reduction::parallel &&
                        word_count(f.size(), static_cast<std::size_t>(n_max)) >= (1u << 14);
  const auto partial = map_last_symbols(f, threaded, walk);

  CoverReport report;
  report.s = s;
  report.m = m;
  report.n_max = n_max;
  for (int n = m; n <= n_max; ++n) {
    const auto k = static_cast<std::size_t>(n);
    LogSumExp lse;
    std::uint64_t words = 0;
    for (const auto& p : partial) {
      lse.merge(p.sums[k]);
      words += p.words[k];
    }
    double log_sum = lse.value();
    if (log_sum > -kInf)
      log_sum += (static_cast<double>(words) + 4.0) * 2.3e-16 + std::abs(log_sum) * 2.3e-16;
    const double sum = log_sum > -kInf ? exp_up(log_sum) : 0.0;
    report.per_level.push_back({n, sum, log_sum, words});
    report.total = add_up(report.total, sum);
  }
  return report;
}

CertificateReport upper_dimension_certificate(const MarkovSystem& sys, const TargetSpec& target, double s,
                                              const CertificateParams& params) {
  if (params.decay_window < 1) throw DomainError("certificate: decay_window must be >= 1");
  if (params.n_max - params.m < params.decay_window)
    throw DomainError("certificate: need at least decay_window + 1 levels");
  if (!(params.margin >= 0.0 && params.margin < 1.0)) throw DomainError("certificate: margin must lie in [0,1)");

  CertificateReport out;
  out.cover = cover_sum(sys, target, s, params.m, params.n_max, params.subset, params.options);
  const auto& lv = out.cover.per_level;
  double q = 0.0;
  for (std::size_t k = lv.size() - static_cast<std::size_t>(params.decay_window); k < lv.size(); ++k) {
    const double prev = lv[k - 1].log_sum;
    const double cur = lv[k].log_sum;
    if (cur == -kInf) continue;
    q = std::max(q, prev == -kInf ? kInf : exp_up(cur - prev));
  }
  out.max_ratio = q;
  out.accepted = q <= 1.0 - params.margin;
  if (out.accepted) {
    const double last = lv.back().sum;
    const double tail = q > 0.0 ? div_up(mul_up(last, q), sub_down(1.0, q)) : 0.0;
    out.cover.geometric_tail_bound = tail;
    out.implied_total = add_up(out.cover.total, tail);
    out.note = "accepted: level sums decay geometrically over the trailing window; numerical evidence at this "
               "truncation, not a proof for the untruncated system";
  } else {
    out.note = "rejected: trailing level sums do not decay by a factor below 1 - margin";
  }
  return out;
}

double cylinder_density(const MarkovSystem& sys, double y, int n, double r, const std::vector<Symbol>& subset,
                        std::uint64_t budget) {
  if (!(r > 0.0)) throw DomainError("cylinder_density: radius must be > 0");
  if (n < 1) throw DomainError("cylinder_density: depth must be >= 1");
  const std::vector<Symbol> f = checked_subset(sys, subset);
  // Closed cylinder strictly inside the open ball.
  const double inner_lo = sub_up(y, r);
  const double inner_hi = add_down(y, r);
  // Anything meeting the closed ball is explored further.
  const double outer_lo = sub_down(y, r);
  const double outer_hi = add_up(y, r);

  std::uint64_t visited = 0;
  double total = 0.0;
  std::vector<Symbol> word;
  auto dfs = [&](auto&& self) -> void {
    for (Symbol j : f) {
      if (++visited > budget)
        throw BudgetError("cylinder_density: explored more than " + std::to_string(budget) + " cylinders", budget,
                          static_cast<int>(word.size()));
      word.push_back(j);
      const CylinderGeometry g = cylinder(sys, Word(word));
      if (g.interval.hi >= outer_lo && g.interval.lo <= outer_hi) {
        if (static_cast<int>(word.size()) == n) {
          if (g.interval.lo > inner_lo && g.interval.hi < inner_hi) total = add_up(total, g.diam);
        } else {
          self(self);
        }
      }
      word.pop_back();
    }
  };
  dfs(dfs);
  return total / r;
}

HitSchedule hit_times(const MarkovSystem& sys, const SymbolSource& code, const TargetSpec& target, int horizon,
                      const HitOptions& options) {
  if (horizon < 1) throw DomainError("hit_times: horizon must be >= 1");
  const LinearPotential lin = target.potential().linearize();
  const double y = target.y;
  HitSchedule out;
  std::vector<Symbol> prefix;
  bool dry = false;
  for (int n = 1; n <= horizon; ++n) {
    if (!dry) {
      const auto s = code(static_cast<std::size_t>(n) - 1);
      if (s && sys.alphabet().contains(*s)) prefix.push_back(*s);
      else dry = true;
    }
    if (dry) {
      out.undecided.push_back(n);
      continue;
    }
    const Interval sn = birkhoff_bracket(lin, cylinder(sys, Word(prefix)));
    const Interval thr{exp_down(-sn.hi), exp_up(-sn.lo)};
    const auto shift = static_cast<std::size_t>(n);
    SymbolSource shifted = [&](std::size_t i) { return code(shift + i); };
    int verdict = 0;  // 1 hit, -1 miss
    double eps = thr.lo / 4.0;
    for (int round = 0; round <= options.max_refinements && verdict == 0 && eps > 0.0; ++round, eps /= 16.0) {
      const auto z = refine_point(sys, shifted, eps, options.max_code_length);
      if (!z) break;
      double dlo = 0.0;
      double dhi = 0.0;
      if (z->hi < y) {
        dlo = sub_down(y, z->hi);
        dhi = sub_up(y, z->lo);
      } else if (z->lo > y) {
        dlo = sub_down(z->lo, y);
        dhi = sub_up(z->hi, y);
      } else {
        dhi = std::max(sub_up(y, z->lo), sub_up(z->hi, y));
      }
      if (dhi < thr.lo) verdict = 1;
      else if (dlo > thr.hi) verdict = -1;
    }
    (verdict == 1 ? out.hits : verdict == -1 ? out.misses : out.undecided).push_back(n);
  }
  return out;
}

}  // namespace stp

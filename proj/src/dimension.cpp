#include "stp/dimension.hpp"

#include <algorithm>
#include <cmath>
#include <future>

namespace stp {

using namespace rounding;

namespace {

struct Edges {
  double lo = 0.0;   // certified: P > 0 here (0 if nothing was found)
  double hi = kInf;  // certified: P <= 0 here
};

using SignTest = std::function<bool(double)>;

// Bisects both edges to tol/4 starting from optional hints.
Edges bisect_edges(const SignTest& positive, const SignTest& nonpositive, double tol, double lo_hint,
                   double hi_hint) {
  Edges e;
  if (lo_hint > 0.0 && positive(lo_hint)) {
    e.lo = lo_hint;
  } else {
    for (double s = 1e-6; s > 1e-300; s *= 1e-3) {
      if (positive(s)) {
        e.lo = s;
        break;
      }
    }
  }
  if (std::isfinite(hi_hint) && nonpositive(hi_hint)) {
    e.hi = hi_hint;
  } else {
    for (double s = std::max(1.0, e.lo); s <= 1024.0; s *= 2.0) {
      if (nonpositive(s)) {
        e.hi = s;
        break;
      }
    }
  }
  const double step = tol / 4.0;
  double a = e.lo;
  double b = std::isfinite(e.hi) ? e.hi : 1024.0;
  while (b - a > step) {
    const double m = a + 0.5 * (b - a);
    if (m <= a || m >= b) break;
    (positive(m) ? a : b) = m;
  }
  e.lo = a;
  if (std::isfinite(e.hi)) {
    a = e.lo;
    b = e.hi;
    while (b - a > step) {
      const double m = a + 0.5 * (b - a);
      if (m <= a || m >= b) break;
      (nonpositive(m) ? b : a) = m;
    }
    e.hi = b;
  }
  return e;
}

DimensionResult finish(double lo, double hi, double tol, Truncation truncation) {
  DimensionResult r;
  r.lo = lo;
  r.hi = std::max(hi, lo);
  r.value = std::isfinite(r.hi) ? r.lo + 0.5 * (r.hi - r.lo) : r.lo;
  r.tolerance = tol;
  r.truncation = std::move(truncation);
  r.certified = r.hi - r.lo <= tol;
  return r;
}

void check_tol(double tol) {
  if (!(tol > 0.0)) throw DomainError("tolerance must be > 0");
}

DimensionResult solve(const MarkovSystem& sys, const std::function<Potential(double)>& potential_at,
                      const SolveOptions& options) {
  check_tol(options.tol);
  std::vector<std::vector<Symbol>> ladder = options.ladder;
  if (ladder.empty()) {
    if (!sys.alphabet().is_finite())
      throw DomainError("a truncation ladder is required for a countable alphabet");
    ladder.push_back(sys.alphabet().symbols());
  }
  // Deeper levels are skipped once the sign is known, the bracket is far
  // narrower than anything the bisection can resolve, or doubling the depth
  // no longer narrows it (potentials with per-symbol variation).
  const double resolution = 1e-3 * options.tol;
  const auto decided = [resolution] {
    return StopFn([resolution, previous = kInf](const PressureEstimate& e) mutable {
      const double width = e.upper - e.lower;
      const bool stalled = e.depth >= 4 && width > 0.75 * previous;
      previous = width;
      return e.positive() || e.nonpositive() || width <= resolution || stalled;
    });
  };
  double lo = 0.0;
  double hi = kInf;
  Truncation used;
  for (const auto& rung : ladder) {
    const std::vector<Symbol> f = checked_subset(sys, rung);
    const int depth = options.n_max > 0 ? options.n_max : default_depth(f.size(), options.pressure.budget);
    auto positive = [&](double s) {
      return pressure_bracket(sys, potential_at(s), f, depth, options.pressure, std::nullopt, decided()).positive();
    };
    auto nonpositive = [&](double s) {
      return pressure_bracket(sys, potential_at(s), f, depth, options.pressure, std::nullopt, decided())
          .nonpositive();
    };
    const Edges e = bisect_edges(positive, nonpositive, options.tol, lo, hi);
    lo = std::max(lo, e.lo);
    hi = std::min(hi, e.hi);
    if (f.size() >= used.subset.size()) used = {f, depth};
  }
  return finish(lo, hi, options.tol, std::move(used));
}

}  // namespace

std::vector<std::vector<Symbol>> prefix_ladder(const Alphabet& alphabet, const std::vector<std::size_t>& sizes) {
  std::vector<std::vector<Symbol>> ladder;
  for (std::size_t k : sizes) {
    if (k == 0) throw DomainError("ladder rungs must be nonempty");
    ladder.push_back(alphabet.first(k));
  }
  return ladder;
}

DimensionResult moran_solve(const std::vector<double>& ratios, double tol) {
  if (ratios.empty()) throw DomainError("moran_solve: empty ratio list");
  for (double r : ratios)
    if (!(r > 0.0 && r < 1.0)) throw DomainError("moran_solve: ratios must lie in (0,1)");
  check_tol(tol);
  auto sums = [&](double s) {
    double lo = 0.0;
    double hi = 0.0;
    for (double r : ratios) {
      lo = add_down(lo, exp_down(mul_down(s, log_down(r))));
      hi = add_up(hi, exp_up(mul_up(s, log_up(r))));
    }
    return Interval{lo, hi};
  };
  const Edges e = bisect_edges([&](double s) { return sums(s).lo > 1.0; },
                               [&](double s) { return sums(s).hi <= 1.0; }, tol, 0.0, kInf);
  return finish(e.lo, e.hi, tol, {{}, 1});
}

DimensionResult moran_solve(const RatioSeries& series, double tol) {
  if (series.log_ratios.empty()) throw DomainError("moran_solve: empty ratio list");
  check_tol(tol);
  for (double lr : series.log_ratios)
    if (!(lr < 0.0)) throw DomainError("moran_solve: ratios must lie in (0,1)");
  auto sums = [&](double s) {
    double lo = 0.0;
    double hi = 0.0;
    for (double lr : series.log_ratios) {
      lo = add_down(lo, exp_down(mul_down(s, lr)));
      hi = add_up(hi, exp_up(mul_up(s, lr)));
    }
    if (series.tail) hi = add_up(hi, series.tail(s));
    return Interval{lo, hi};
  };
  const Edges e = bisect_edges([&](double s) { return sums(s).lo > 1.0; },
                               [&](double s) { return sums(s).hi <= 1.0; }, tol, 0.0, kInf);
  return finish(e.lo, e.hi, tol, {{}, 1});
}

DimensionResult bowen_dimension(const MarkovSystem& sys, const SolveOptions& options) {
  return solve(sys, [](double s) { return Potential::scale(s, Potential::log_derivative()); }, options);
}

DimensionResult shrink_exponent_alpha(const MarkovSystem& sys, double alpha, const SolveOptions& options) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("alpha must be finite and > 0");
  const Potential base = Potential::sum(Potential::log_derivative(), Potential::constant(alpha));
  return solve(sys, [&](double s) { return Potential::scale(s, base); }, options);
}

DimensionResult shrink_exponent_potential(const MarkovSystem& sys, const Potential& phi,
                                          const SolveOptions& options) {
  const Potential base = Potential::sum(Potential::log_derivative(), phi);
  return solve(sys, [&](double s) { return Potential::scale(s, base); }, options);
}

std::vector<std::pair<double, DimensionResult>> spectrum(const MarkovSystem& sys, const std::vector<double>& alphas,
                                                         const SolveOptions& options) {
  if (alphas.empty()) throw DomainError("spectrum: empty alpha grid");
  for (double a : alphas)
    if (!(a > 0.0)) throw DomainError("spectrum: every alpha must be > 0");
  std::vector<std::pair<double, DimensionResult>> rows;
  if (options.pressure.reduction == Reduction::sequential) {
    for (double a : alphas) rows.emplace_back(a, shrink_exponent_alpha(sys, a, options));
    return rows;
  }
  std::vector<std::future<DimensionResult>> jobs;
  for (double a : alphas)
    jobs.push_back(std::async(std::launch::async, [&sys, a, &options] { return shrink_exponent_alpha(sys, a, options); }));
  for (std::size_t k = 0; k < alphas.size(); ++k) rows.emplace_back(alphas[k], jobs[k].get());
  return rows;
}

}  // namespace stp

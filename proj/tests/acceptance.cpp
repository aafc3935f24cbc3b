// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "stp/counterexample.hpp"
#include "stp/dimension.hpp"
#include "stp/targets.hpp"
#include "support.hpp"

using namespace stp;
using stp::testing::Gen;

namespace {

const double kLog2 = std::log(2.0);

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome closed_form_spectrum() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (double a : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    const DimensionResult r = shrink_exponent_alpha(doubling_map(), a);
    worst = std::max(worst, std::abs(r.value - kLog2 / (kLog2 + a)));
  }
  const double t = seconds_since(t0);
  o.require(worst <= 1e-9, fmt("max error %.3g", worst));
  o.require(t < 1.0, fmt("took %.3g s", t));
  o.detail = o.pass ? fmt("max error %.3g, %.3g s", worst, t) : o.detail;
  return o;
}

Outcome gauss_ladder() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const double alpha = 4.0;
  const Potential phi = Potential::scale(alpha / 2.0 - 1.0, Potential::log_derivative());
  std::vector<double> values;
  for (Symbol k : {16u, 32u, 64u}) {
    SolveOptions opt;
    opt.n_max = 3;
    opt.tol = 1e-4;
    values.push_back(shrink_exponent_potential(gauss_map(k), phi, opt).value);
  }
  const double t = seconds_since(t0);
  o.require(std::abs(values.back() - 2.0 / alpha) <= 0.02, fmt("K=64 value %.6f", values.back()));
  o.require(values[0] < values[1] && values[1] < values[2],
            fmt("not increasing: %.6f %.6f %.6f", values[0], values[1], values[2]));
  o.require(t < 60.0, fmt("took %.3g s", t));
  if (o.pass) o.detail = fmt("K=16,32,64: %.5f %.5f %.5f", values[0], values[1], values[2]) + fmt(", %.3g s", t);
  return o;
}

Outcome counterexample_moran() {
  Outcome o;
  std::string detail;
  for (const auto& [beta, phi] : {std::pair{0.5, ShrinkFn::reciprocal()}, std::pair{0.9, ShrinkFn::exponential(0.1)}}) {
    const CounterexampleSystem ce = build_counterexample(beta, phi);
    const double residual = verify_moran(ce);
    SolveOptions opt;
    opt.tol = 1e-7;
    opt.n_max = 1;
    opt.ladder = {ce.symbols_up_to(4), ce.symbols_up_to(12)};
    const DimensionResult d = bowen_dimension(ce.as_system(), opt);
    o.require(residual <= 1e-10, fmt("beta %.2g residual %.3g", beta, residual));
    o.require(d.lo <= beta && beta <= d.hi, fmt("beta %.2g outside [%.12f, %.12f]", beta, d.lo, d.hi));
    o.require(d.hi - d.lo <= 1e-6, fmt("beta %.2g bracket width %.3g", beta, d.hi - d.lo));
    detail += fmt("beta %.2g: residual %.2g, width %.2g; ", beta, residual, d.hi - d.lo);
  }
  if (o.pass) o.detail = detail;
  return o;
}

Outcome zero_dimension() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const CounterexampleSystem ce = build_counterexample(0.5, ShrinkFn::reciprocal());
  for (const auto& [eps, m] : {std::pair{0.5, 3}, std::pair{0.2, 6}}) {
    const ZeroDimReport r = zero_dim_cover_report(ce, eps, m, 12);
    o.require(r.all_levels_ok, fmt("eps %.2g: a level exceeds e^-n/(e-1)", eps));
    o.require(r.total_ok, fmt("eps %.2g: total %.3g above %.3g", eps, r.cover.total, r.total_bound));
  }
  const double t = seconds_since(t0);
  o.require(t < 30.0, fmt("took %.3g s", t));
  if (o.pass) o.detail = fmt("eps 0.5 and 0.2, %.3g s", t);
  return o;
}

Outcome pressure_properties() {
  Outcome o;
  Gen gen(2024);
  PressureOptions seq;
  seq.reduction = Reduction::sequential;
  for (int trial = 0; trial < 200; ++trial) {
    const std::vector<double> r = gen.ratios(4);
    const MarkovSystem sys = affine_system(r);
    const auto k = static_cast<Symbol>(r.size());
    const std::vector<Symbol> full = stp::testing::range_symbols(k);
    const Potential pot = Potential::scale(
        gen.uniform(0.05, 1.5), Potential::sum(Potential::log_derivative(), Potential::constant(gen.uniform(0.0, 1.0))));
    double prev = kInf;
    for (int n = 1; n <= 5; ++n) {
      const PressureEstimate e = pressure_bracket(sys, pot, full, n, seq);
      o.require(e.lower <= e.upper, "lower > upper");
      o.require(e.upper <= prev, "upper increased with n");
      prev = e.upper;
    }
    const std::vector<Symbol> sub(full.begin(), full.end() - 1);
    o.require(pressure_bracket(sys, pot, sub, 4, seq).lower <= pressure_bracket(sys, pot, full, 4, seq).lower,
              "lower decreased when F grew");
    const double logk = std::log(static_cast<double>(k));
    const PressureEstimate z = pressure_bracket(sys, Potential::constant(0.0), full, 4, seq);
    o.require(z.lower <= logk && logk <= z.upper && z.upper - z.lower < 1e-14, "P(0) bracket misses log k");
    for (int n = 1; n <= 4; ++n)
      o.require(partition_sum(sys, Potential::constant(0.0), full, n, Mode::sup) == std::log(std::pow(k, n)),
                "log Z_n(0) != n log k");
  }
  if (o.pass) o.detail = "200 cases";
  return o;
}

Outcome positivity() {
  Outcome o;
  Gen gen(4048);
  double smallest = kInf;
  for (int trial = 0; trial < 100; ++trial) {
    const std::vector<double> r = gen.ratios(5);
    const MarkovSystem sys = affine_system(r);
    Potential phi = Potential::constant(gen.uniform(0.0, 3.0));
    switch (trial % 3) {
      case 1: phi = Potential::sum(phi, Potential::scale(gen.uniform(0.0, 2.0), Potential::log_derivative())); break;
      case 2: {
        std::vector<Interval> table;
        for (std::size_t i = 0; i < r.size(); ++i) {
          const double lo = gen.uniform(0.0, 2.0);
          table.push_back({lo, lo + gen.uniform(0.0, 1.0)});
        }
        phi = Potential::sum(phi, Potential::per_symbol(table));
        break;
      }
      default: break;
    }
    SolveOptions opt;
    opt.tol = 1e-6;
    const DimensionResult d = shrink_exponent_potential(sys, phi, opt);
    smallest = std::min(smallest, d.lo);
    o.require(d.lo > 0.0, "bracket with lo <= 0: " + phi.to_string());
  }
  if (o.pass) o.detail = fmt("100 systems, smallest lo %.4g", smallest);
  return o;
}

Outcome cover_criticality() {
  Outcome o;
  const TargetSpec target(0.0, ConstantRate{kLog2});
  CertificateParams p;
  p.subset = {1, 2};
  auto accepts = [&](double s) { return upper_dimension_certificate(doubling_map(), target, s, p).accepted; };
  o.require(accepts(0.6), "rejects at s = 0.6");
  o.require(!accepts(0.4), "accepts at s = 0.4");
  double lo = 0.4;
  double hi = 0.6;
  while (hi - lo > 1e-3) {
    const double mid = 0.5 * (lo + hi);
    (accepts(mid) ? hi : lo) = mid;
  }
  o.require(lo <= 0.52 && hi >= 0.48, fmt("transition in [%.4f, %.4f]", lo, hi));
  if (o.pass) o.detail = fmt("transition in [%.4f, %.4f]", lo, hi);
  return o;
}

Outcome density_floor() {
  Outcome o;
  Gen gen(8080);
  double worst = kInf;
  const MarkovSystem systems[] = {doubling_map(), gauss_map(8)};
  for (const MarkovSystem& sys : systems) {
    const std::vector<Symbol> f = sys.alphabet().symbols();
    for (int point = 0; point < 10; ++point) {
      const Word w = gen.word(f, 16);
      const double y = project_word(sys, w, 1e-15).mid();
      for (int n = 3; n <= 10; ++n) {
        const double r = 2.0 * cylinder(sys, w.prefix(static_cast<std::size_t>(n))).diam;
        const double d = cylinder_density(sys, y, n, r, f);
        worst = std::min(worst, d);
        o.require(d >= 0.5 - 1e-9, fmt("density %.6f at y = %.17g, n = %.0f", d, y, n));
      }
    }
  }
  if (o.pass) o.detail = fmt("20 points, smallest density %.6f", worst);
  return o;
}

Outcome hit_exactness() {
  Outcome o;
  auto periodic = [](std::vector<Symbol> code) -> SymbolSource {
    return [code](std::size_t i) -> std::optional<Symbol> { return code[i % code.size()]; };
  };
  const int horizon = 50;
  struct Case {
    std::vector<Symbol> code;
    TargetSpec target;
    std::function<bool(int)> hit;
  };
  const std::vector<Case> cases{
      {{1}, TargetSpec(0.0, ConstantRate{1.0}), [](int) { return true; }},
      {{2}, TargetSpec(0.0, ConstantRate{1.0}), [](int) { return false; }},
      // Odd n sit at distance 1/3, inside the ball while exp(-0.1 n) > 1/3.
      {{1, 2}, TargetSpec(1.0 / 3.0, ConstantRate{0.1}),
       [](int n) { return n % 2 == 0 || std::exp(-0.1 * n) > 1.0 / 3.0; }}};
  for (std::size_t c = 0; c < cases.size(); ++c) {
    const HitSchedule s = hit_times(doubling_map(), periodic(cases[c].code), cases[c].target, horizon);
    std::vector<int> hits;
    std::vector<int> misses;
    for (int n = 1; n <= horizon; ++n) (cases[c].hit(n) ? hits : misses).push_back(n);
    o.require(s.undecided.empty(), fmt("case %.0f: undecided epochs", c + 1.0));
    o.require(s.hits == hits && s.misses == misses, fmt("case %.0f: schedule differs", c + 1.0));
  }
  if (o.pass) o.detail = "3 schedules at N = 50";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"closed-form s(alpha) on the doubling map", closed_form_spectrum},
      {"Gauss K ladder for alpha = 4", gauss_ladder},
      {"counterexample Moran identity and dimension", counterexample_moran},
      {"zero-dimension cover evidence", zero_dimension},
      {"pressure bracket properties", pressure_properties},
      {"positivity of shrink exponents", positivity},
      {"cover-sum criticality", cover_criticality},
      {"cylinder density floor", density_floor},
      {"hit-time exactness", hit_exactness},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome out;
    try {
      out = criteria[k].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %zu %s: %s\n", out.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(), out.detail.c_str());
    std::fflush(stdout);
    failures += out.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}

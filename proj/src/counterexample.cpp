#include "stp/counterexample.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "stp/log_sum_exp.hpp"

namespace stp {

using namespace rounding;

namespace {

constexpr double kLog2 = 0.69314718055994530942;
// r_n <= 2^{-n^2} e^{-2n^2} = exp(-kDecay n^2).
constexpr double kDecay = 2.0 + kLog2;

}  // namespace

// ---------------------------------------------------------------- ShrinkFn

ShrinkFn ShrinkFn::reciprocal() { return {Kind::reciprocal, 1.0}; }

ShrinkFn ShrinkFn::power(double p) {
  if (!(p > 0.0) || !std::isfinite(p)) throw DomainError("power shrink function needs p > 0");
  return {Kind::power, p};
}

ShrinkFn ShrinkFn::exponential(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("exponential shrink function needs c > 0");
  return {Kind::exponential, c};
}

ShrinkFn ShrinkFn::parse(const std::string& text) {
  std::istringstream in(text);
  std::string name;
  in >> name;
  if (name == "reciprocal") {
    std::string extra;
    if (in >> extra) throw DomainError("shrink function 'reciprocal' takes no parameter");
    return reciprocal();
  }
  if (name != "power" && name != "exponential")
    throw DomainError("unknown shrink function '" + name + "' (expected reciprocal, power <p>, exponential <c>)");
  std::string num;
  if (!(in >> num)) throw DomainError("shrink function '" + name + "' needs a parameter");
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(num, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  std::string extra;
  if (used != num.size() || (in >> extra)) throw DomainError("malformed shrink function '" + text + "'");
  return name == "power" ? power(v) : exponential(v);
}

double ShrinkFn::operator()(double n) const { return std::exp(log_value(n)); }

double ShrinkFn::log_value(double n) const {
  switch (kind_) {
    case Kind::reciprocal: return -std::log(n);
    case Kind::power: return -param_ * std::log(n);
    case Kind::exponential: return -param_ * n;
  }
  return 0.0;
}

double ShrinkFn::log_gap(double n) const {
  switch (kind_) {
    case Kind::reciprocal: return -std::log(n) - std::log(n + 1.0);
    case Kind::power: return -param_ * std::log(n) + std::log(-std::expm1(-param_ * std::log1p(1.0 / n)));
    case Kind::exponential: return -param_ * n + std::log(-std::expm1(-param_));
  }
  return 0.0;
}

std::string ShrinkFn::to_string() const {
  if (kind_ == Kind::reciprocal) return "reciprocal";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", param_);
  return (kind_ == Kind::power ? "power " : "exponential ") + std::string(buf);
}

// ---------------------------------------------------------------- widths

double counterexample_log_width(const ShrinkFn& phi, unsigned n) {
  const double dn = n;
  const double n2 = dn * dn;
  const double log_a = -n2 * std::log(2.0 + 1.0 / std::expm1(1.0 / dn)) - 2.0 * n2;
  const double log_b = phi.log_gap(dn) - kLog2;
  return std::min(log_a, log_b);
}

double CounterexampleSystem::log_width(unsigned n) const {
  if (n == 1) return std::log(r1);
  if (n == 2) return std::log(r2);
  if (n < n0) throw DomainError("symbol " + std::to_string(n) + " is not in the alphabet");
  return counterexample_log_width(phi, n);
}

double CounterexampleSystem::width(unsigned n) const { return std::exp(log_width(n)); }

Interval CounterexampleSystem::interval(unsigned n) const {
  double center = 0.0;
  if (n == 1 || n == 2) {
    const double a = phi(n0);
    const double half = (1.0 - a) / 2.0;
    center = a + half * (n == 1 ? 0.5 : 1.5);
  } else {
    center = phi(n + 1.0) + 0.5 * std::exp(phi.log_gap(n));
  }
  const double r = width(n);
  return {center - 0.5 * r, center + 0.5 * r};
}

namespace {

// log of sum_{n >= k} exp(-e kDecay n^2) <= exp(-e kDecay k^2) / (1 - exp(-e kDecay k)).
double log_tail_bound(double e, double k) {
  if (!(e > 0.0)) return kInf;
  const double rate = mul_down(e, kDecay);
  const double ratio = exp_up(-mul_down(rate, k));
  if (ratio >= 1.0) return kInf;
  return sub_up(-mul_down(rate, mul_down(k, k)), log_down(sub_down(1.0, ratio)));
}

}  // namespace

double CounterexampleSystem::tail_bound(double e, unsigned k) const {
  const double log_bound = log_tail_bound(e, std::max(k, n0));
  return log_bound == kInf ? kInf : exp_up(log_bound);
}

namespace {

struct TailParts {
  double log_explicit = -kInf;
  double log_remainder = -kInf;
};

TailParts tail_parts(const CounterexampleSystem& ce, double e, unsigned k) {
  TailParts t;
  LogSumExp lse;
  if (k <= 1) lse.add(e * std::log(ce.r1));
  if (k <= 2) lse.add(e * std::log(ce.r2));
  for (unsigned q = std::max(k, ce.n0);; ++q) {
    lse.add(e * ce.log_width(q));
    t.log_explicit = lse.value();
    t.log_remainder = log_tail_bound(e, q + 1.0);
    if (t.log_remainder < t.log_explicit - 60.0 || q > 10'000'000) break;
  }
  return t;
}

}  // namespace

double CounterexampleSystem::log_tail_sum(double e, unsigned k) const {
  const TailParts t = tail_parts(*this, e, k);
  return log_add(t.log_explicit, t.log_remainder);
}

std::vector<Symbol> CounterexampleSystem::symbols_up_to(unsigned count) const {
  std::vector<Symbol> out;
  for (unsigned k = 0; k < count; ++k) out.push_back(k < 2 ? k + 1 : n0 + k - 2);
  return out;
}

MarkovSystem CounterexampleSystem::as_system() const {
  const CounterexampleSystem ce = *this;
  auto branch = [ce](Symbol i) {
    const Interval v = ce.interval(i);
    if (i <= 2) return AffineBranch::from_ratio(v.lo, i == 1 ? ce.r1 : ce.r2);
    return AffineBranch::from_log_ratio(v.lo, ce.log_width(i));
  };
  auto tail = [ce](double e, Symbol after) {
    if (!(e > 0.0)) return kInf;
    double t = 0.0;
    if (after < 1) t = add_up(t, exp_up(e * log_up(ce.r1)));
    if (after < 2) t = add_up(t, exp_up(e * log_up(ce.r2)));
    return add_up(t, ce.tail_bound(e, std::max<unsigned>(after + 1, ce.n0)));
  };
  auto locate = [ce, branch](double x) -> std::optional<Symbol> {
    for (Symbol i : {1u, 2u})
      if (ce.interval(i).contains(x)) return i;
    if (!(x > 0.0) || x > ce.phi(ce.n0)) return std::nullopt;
    // Find n with Phi(n+1) < x <= Phi(n).
    std::uint64_t lo = ce.n0;
    std::uint64_t hi = ce.n0 + 1;
    while (ce.phi(static_cast<double>(hi)) >= x) {
      lo = hi;
      if (hi > (1ull << 31)) return std::nullopt;
      hi *= 2;
    }
    while (hi - lo > 1) {
      const std::uint64_t mid = lo + (hi - lo) / 2;
      (ce.phi(static_cast<double>(mid)) >= x ? lo : hi) = mid;
    }
    const auto n = static_cast<Symbol>(lo);
    const AffineBranch b = branch(n);
    if (x >= b.left && x <= add_up(b.left, b.ratio.hi)) return n;
    return std::nullopt;
  };
  auto family = std::make_shared<AffineFamily>(Alphabet::countable({1, 2}, n0), branch, tail, locate);
  const double largest = std::max({r1, r2, width(n0)});
  return MarkovSystem(family, 1.0 / largest, 1);
}

// ---------------------------------------------------------------- build

namespace {

void check_beta(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("beta must lie in (0,1)");
}

bool n0_admissible(double beta, const ShrinkFn& phi, unsigned n) {
  const double room = -std::expm1((1.0 - 1.0 / beta) * kLog2);  // 1 - 2^{1 - 1/beta}
  const double geometric = std::exp(-beta * n) / -std::expm1(-beta);
  return n >= 3 && phi(n) < room && geometric < 1.0;
}

}  // namespace

CounterexampleSystem build_counterexample(double beta, const ShrinkFn& phi, unsigned search_cap) {
  check_beta(beta);
  CounterexampleSystem ce;
  ce.beta = beta;
  ce.phi = phi;
  unsigned n = 3;
  while (!n0_admissible(beta, phi, n)) {
    if (++n > search_cap)
      throw SearchCapError("no admissible n0 below the search cap " + std::to_string(search_cap));
  }
  ce.n0 = n;
  ce.r1 = ce.r2 = 0.5;  // placeholders; the tail from n0 does not read them
  const double t = std::exp(tail_parts(ce, beta, n).log_explicit);
  ce.r1 = ce.r2 = std::exp((std::log1p(-t) - kLog2) / beta);
  return ce;
}

CounterexampleSystem restore_counterexample(double beta, const ShrinkFn& phi, unsigned n0, double r1, double r2) {
  check_beta(beta);
  if (!n0_admissible(beta, phi, n0)) throw DomainError("n0 = " + std::to_string(n0) + " violates the n0 conditions");
  if (!(r1 > 0.0 && r2 > 0.0)) throw DomainError("r1, r2 must be positive");
  if (!(2.0 * std::max(r1, r2) < 1.0 - phi(n0))) throw DomainError("r1, r2 do not fit into (Phi(n0), 1)");
  CounterexampleSystem ce;
  ce.beta = beta;
  ce.phi = phi;
  ce.n0 = n0;
  ce.r1 = r1;
  ce.r2 = r2;
  return ce;
}

double verify_moran(const CounterexampleSystem& ce) {
  const TailParts t = tail_parts(ce, ce.beta, ce.n0);
  // Neumaier summation of the three parts.
  const double terms[] = {std::pow(ce.r1, ce.beta), std::pow(ce.r2, ce.beta), std::exp(t.log_explicit), -1.0};
  double sum = 0.0;
  double comp = 0.0;
  for (double x : terms) {
    const double s = sum + x;
    comp += std::abs(sum) >= std::abs(x) ? (sum - s) + x : (x - s) + sum;
    sum = s;
  }
  return std::abs(sum + comp) + std::exp(t.log_remainder);
}

ZeroDimReport zero_dim_cover_report(const CounterexampleSystem& ce, double eps, int m, int n_max) {
  if (!(eps > 0.0)) throw DomainError("zero_dim_cover_report: eps must be > 0");
  if (!(m * eps > 1.0)) throw DomainError("zero_dim_cover_report: need m > 1/eps");
  if (n_max < m) throw DomainError("zero_dim_cover_report: need n_max >= m");
  const double e = std::exp(1.0);
  const double log_level_bound = -std::log(e - 1.0);
  const double log_alphabet = ce.log_tail_sum(eps, 1);

  ZeroDimReport out;
  out.cover.s = eps;
  out.cover.m = m;
  out.cover.n_max = n_max;
  out.total_bound = 1.0 / ((e - 1.0) * (e - 1.0));
  out.all_levels_ok = true;
  double max_ratio = 0.0;
  for (int n = m; n <= n_max; ++n) {
    double log_sum = n * log_alphabet + ce.log_tail_sum(eps, static_cast<unsigned>(n));
    log_sum += 4.6e-16 * (std::abs(log_sum) + 1.0);
    const double sum = std::exp(log_sum);
    if (!out.cover.per_level.empty())
      max_ratio = std::max(max_ratio, std::exp(log_sum - out.cover.per_level.back().log_sum));
    out.cover.per_level.push_back({n, sum, log_sum, 0});
    out.cover.total = add_up(out.cover.total, sum);
    const bool ok = log_sum <= log_level_bound - n;
    out.level_ok.push_back(ok);
    out.all_levels_ok = out.all_levels_ok && ok;
  }
  if (max_ratio < 1.0) {
    const double last = out.cover.per_level.back().sum;
    out.cover.geometric_tail_bound = last * max_ratio / (1.0 - max_ratio);
  }
  out.total_ok = out.cover.total <= out.total_bound;
  return out;
}

}  // namespace stp

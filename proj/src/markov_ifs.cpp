#include "stp/markov_ifs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace stp {

using namespace rounding;

// ---------------------------------------------------------------- Word

Word Word::prefix(std::size_t n) const {
  n = std::min(n, symbols_.size());
  return Word(std::vector<Symbol>(symbols_.begin(), symbols_.begin() + static_cast<std::ptrdiff_t>(n)));
}

std::string Word::to_string() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < symbols_.size(); ++i) os << (i ? "," : "") << symbols_[i];
  os << ')';
  return os.str();
}

// ---------------------------------------------------------------- Alphabet

Alphabet Alphabet::range(Symbol first, Symbol last) {
  if (first == 0 || last < first) throw DomainError("alphabet range must satisfy 1 <= first <= last");
  std::vector<Symbol> s;
  for (Symbol i = first; i <= last; ++i) s.push_back(i);
  return finite(std::move(s));
}

Alphabet Alphabet::finite(std::vector<Symbol> symbols) {
  std::sort(symbols.begin(), symbols.end());
  symbols.erase(std::unique(symbols.begin(), symbols.end()), symbols.end());
  if (!symbols.empty() && symbols.front() == 0) throw DomainError("symbols are 1-based");
  Alphabet a;
  a.head_ = std::move(symbols);
  return a;
}

Alphabet Alphabet::countable(std::vector<Symbol> head, Symbol tail_start) {
  Alphabet a = finite(std::move(head));
  if (!a.head_.empty() && a.head_.back() >= tail_start)
    throw DomainError("countable alphabet: head symbols must precede the tail");
  a.tail_start_ = tail_start;
  return a;
}

bool Alphabet::contains(Symbol s) const {
  if (tail_start_ && s >= *tail_start_) return true;
  return std::binary_search(head_.begin(), head_.end(), s);
}

std::size_t Alphabet::size() const {
  if (tail_start_) throw DomainError("size() of a countable alphabet");
  return head_.size();
}

std::vector<Symbol> Alphabet::first(std::size_t count) const {
  std::vector<Symbol> out;
  for (Symbol s : head_) {
    if (out.size() == count) return out;
    out.push_back(s);
  }
  if (tail_start_) {
    for (Symbol s = *tail_start_; out.size() < count; ++s) out.push_back(s);
  }
  return out;
}

std::vector<Symbol> Alphabet::up_to(Symbol max_symbol) const {
  std::vector<Symbol> out;
  for (Symbol s : head_)
    if (s <= max_symbol) out.push_back(s);
  if (tail_start_)
    for (Symbol s = *tail_start_; s <= max_symbol; ++s) out.push_back(s);
  return out;
}

std::vector<Symbol> Alphabet::symbols() const {
  if (tail_start_) throw DomainError("symbols() of a countable alphabet");
  return head_;
}

// ---------------------------------------------------------------- BranchFamily

double BranchFamily::tail_sum(double exponent, Symbol after) const {
  if (!alphabet().is_finite()) return kInf;
  double total = 0.0;
  for (Symbol i : alphabet().symbols()) {
    if (i <= after) continue;
    const double log_sup = log_abs_deriv(i, Interval::unit()).hi;
    total = add_up(total, exp_up(mul_up(exponent, log_sup)));
  }
  return total;
}

// ---------------------------------------------------------------- affine

AffineBranch AffineBranch::from_ratio(double left, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw DomainError("affine ratio must lie in (0,1)");
  return {left, Interval::point(ratio), Interval{log_down(ratio), log_up(ratio)}};
}

AffineBranch AffineBranch::from_log_ratio(double left, double log_ratio) {
  if (!(log_ratio < 0.0)) throw DomainError("affine log-ratio must be negative");
  return {left, Interval{exp_down(log_ratio), exp_up(log_ratio)},
          Interval{next_down(log_ratio), next_up(log_ratio)}};
}

AffineFamily::AffineFamily(std::vector<AffineBranch> branches)
    : alphabet_(Alphabet::range(1, static_cast<Symbol>(std::max<std::size_t>(branches.size(), 1)))),
      list_(std::move(branches)) {
  if (list_.empty()) throw DomainError("affine family needs at least one branch");
}

AffineFamily::AffineFamily(Alphabet alphabet, BranchFn branch, TailSumFn tail_sum, LocateFn locate)
    : alphabet_(std::move(alphabet)),
      generator_(std::move(branch)),
      tail_sum_(std::move(tail_sum)),
      locate_(std::move(locate)) {
  if (!generator_) throw DomainError("countable affine family needs a branch generator");
}

AffineBranch AffineFamily::branch(Symbol i) const {
  if (!alphabet_.contains(i)) throw DomainError("symbol " + std::to_string(i) + " is not in the alphabet");
  if (!list_.empty()) return list_[i - 1];
  return generator_(i);
}

Interval AffineFamily::image(Symbol i, const Interval& x) const {
  const AffineBranch b = branch(i);
  return {add_down(b.left, mul_down(b.ratio.lo, x.lo)), add_up(b.left, mul_up(b.ratio.hi, x.hi))};
}

Interval AffineFamily::abs_deriv(Symbol i, const Interval&) const { return branch(i).ratio; }

Interval AffineFamily::log_abs_deriv(Symbol i, const Interval&) const { return branch(i).log_ratio; }

double AffineFamily::branch_inverse(Symbol i, double x) const {
  const AffineBranch b = branch(i);
  return std::clamp((x - b.left) / b.ratio.mid(), 0.0, 1.0);
}

std::optional<Symbol> AffineFamily::locate(double x) const {
  if (!list_.empty()) {
    for (std::size_t k = 0; k < list_.size(); ++k)
      if (domain(static_cast<Symbol>(k + 1)).contains(x)) return static_cast<Symbol>(k + 1);
    return std::nullopt;
  }
  if (!locate_) throw DomainError("countable affine family has no locator");
  return locate_(x);
}

double AffineFamily::tail_sum(double exponent, Symbol after) const {
  if (alphabet_.is_finite()) return BranchFamily::tail_sum(exponent, after);
  if (!tail_sum_) return kInf;
  return tail_sum_(exponent, after);
}

// ---------------------------------------------------------------- Gauss

GaussFamily::GaussFamily(std::optional<Symbol> truncation)
    : truncation_(truncation),
      alphabet_(truncation ? Alphabet::range(1, *truncation) : Alphabet::countable({}, 1)) {
  if (truncation && *truncation < 2) throw DomainError("Gauss truncation needs at least two branches");
}

Interval GaussFamily::image(Symbol i, const Interval& x) const {
  const double d = static_cast<double>(i);
  return {div_down(1.0, add_up(d, x.hi)), div_up(1.0, add_down(d, x.lo))};
}

Interval GaussFamily::abs_deriv(Symbol i, const Interval& x) const {
  const double d = static_cast<double>(i);
  const double big = add_up(d, x.hi);
  const double small = add_down(d, x.lo);
  return {div_down(1.0, mul_up(big, big)), div_up(1.0, mul_down(small, small))};
}

Interval GaussFamily::log_abs_deriv(Symbol i, const Interval& x) const {
  const double d = static_cast<double>(i);
  return {-2.0 * log_up(add_up(d, x.hi)), -2.0 * log_down(add_down(d, x.lo))};
}

double GaussFamily::branch_inverse(Symbol i, double x) const {
  return std::clamp(1.0 / x - static_cast<double>(i), 0.0, 1.0);
}

std::optional<Symbol> GaussFamily::locate(double x) const {
  if (!(x > 0.0) || x > 1.0) return std::nullopt;
  const double inv = 1.0 / x;
  if (inv > 4.0e9) return std::nullopt;
  const auto guess = static_cast<Symbol>(std::max(1.0, std::floor(inv)));
  for (Symbol i = guess > 1 ? guess - 1 : 1; i <= guess + 1; ++i) {
    if (!alphabet_.contains(i)) continue;
    if (domain(i).contains(x)) return i;
  }
  return std::nullopt;
}

double GaussFamily::tail_sum(double exponent, Symbol after) const {
  if (truncation_) return BranchFamily::tail_sum(exponent, after);
  // sum_{i > after} i^{-p} <= k^{-p} + integral_k^inf t^{-p} dt with k = after + 1.
  const double p = 2.0 * exponent;
  if (!(p > 1.0)) return kInf;
  const double k = static_cast<double>(after) + 1.0;
  const double first = std::exp(-p * std::log(k));
  const double integral = std::exp((1.0 - p) * std::log(k)) / (p - 1.0);
  return next_up(next_up((first + integral) * (1.0 + 1e-12)));
}

// ---------------------------------------------------------------- custom

CustomMonotoneFamily::CustomMonotoneFamily(std::vector<CustomBranch> branches)
    : branches_(std::move(branches)),
      alphabet_(Alphabet::range(1, static_cast<Symbol>(std::max<std::size_t>(branches_.size(), 1)))) {
  for (const auto& b : branches_)
    if (!b.map || !b.abs_deriv) throw DomainError("custom branch needs a map and a derivative evaluator");
}

const CustomBranch& CustomMonotoneFamily::at(Symbol i) const {
  if (!alphabet_.contains(i)) throw DomainError("symbol " + std::to_string(i) + " is not in the alphabet");
  return branches_[i - 1];
}

Interval CustomMonotoneFamily::image(Symbol i, const Interval& x) const {
  const CustomBranch& b = at(i);
  double a = b.map(x.lo);
  double c = b.map(x.hi);
  if (a > c) std::swap(a, c);
  // Evaluators are assumed accurate to a few ulps.
  for (int k = 0; k < 4; ++k) {
    a = next_down(a);
    c = next_up(c);
  }
  return clamp_unit({a, c});
}

Interval CustomMonotoneFamily::abs_deriv(Symbol i, const Interval& x) const { return at(i).abs_deriv(x); }

double CustomMonotoneFamily::branch_inverse(Symbol i, double x) const {
  const CustomBranch& b = at(i);
  double lo = 0.0, hi = 1.0;
  for (int k = 0; k < 200 && lo < hi; ++k) {
    const double mid = 0.5 * (lo + hi);
    const bool below = b.increasing ? b.map(mid) < x : b.map(mid) > x;
    if (below) lo = mid; else hi = mid;
    if (mid == lo && mid == hi) break;
  }
  return 0.5 * (lo + hi);
}

std::optional<Symbol> CustomMonotoneFamily::locate(double x) const {
  for (Symbol i = 1; i <= branches_.size(); ++i)
    if (domain(i).contains(x)) return i;
  return std::nullopt;
}

// ---------------------------------------------------------------- MarkovSystem

namespace {

void check_open_set_condition(const BranchFamily& family) {
  std::vector<Symbol> probe = family.alphabet().is_finite() ? family.alphabet().symbols()
                                                            : family.alphabet().first(64);
  std::vector<Interval> doms;
  doms.reserve(probe.size());
  for (Symbol s : probe) doms.push_back(family.domain(s));
  std::sort(doms.begin(), doms.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  for (std::size_t k = 1; k < doms.size(); ++k) {
    // Touching endpoints are allowed; outward rounding may overlap by ulps.
    if (doms[k].lo < doms[k - 1].hi - 1e-12)
      throw DomainError("branch domains overlap: interiors must be pairwise disjoint");
  }
}

}  // namespace

MarkovSystem::MarkovSystem(std::shared_ptr<const BranchFamily> family, double xi,
                           unsigned expansion_index, DistortionFn distortion)
    : family_(std::move(family)),
      xi_(xi),
      expansion_index_(expansion_index),
      distortion_(std::move(distortion)) {
  if (!family_) throw DomainError("system needs a branch family");
  if (!(xi_ > 1.0)) throw DomainError("expansion constant xi must exceed 1");
  if (expansion_index_ == 0) throw DomainError("expansion index N must be >= 1");
  const Alphabet& a = family_->alphabet();
  if (a.is_finite() && a.size() < 2) throw DomainError("alphabet needs at least two symbols");
  check_open_set_condition(*family_);
}

MarkovSystem doubling_map() {
  auto family = std::make_shared<AffineFamily>(std::vector<AffineBranch>{
      AffineBranch::from_ratio(0.0, 0.5), AffineBranch::from_ratio(0.5, 0.5)});
  return MarkovSystem(std::move(family), 2.0, 1);
}

MarkovSystem affine_system(std::vector<double> ratios, std::vector<double> lefts) {
  if (ratios.size() < 2) throw DomainError("affine system needs at least two ratios");
  double total = 0.0, largest = 0.0;
  for (double r : ratios) {
    if (!(r > 0.0 && r < 1.0)) throw DomainError("affine ratio must lie in (0,1)");
    total += r;
    largest = std::max(largest, r);
  }
  if (lefts.empty()) {
    if (total > 1.0 + 1e-12) throw DomainError("affine ratios sum to more than 1; supply placements");
    const double gap = std::max(0.0, 1.0 - total) / static_cast<double>(ratios.size() - 1);
    double x = 0.0;
    for (double r : ratios) {
      lefts.push_back(std::min(x, 1.0 - r));
      x += r + gap;
    }
  }
  if (lefts.size() != ratios.size()) throw DomainError("affine system: one placement per ratio");
  std::vector<AffineBranch> branches;
  for (std::size_t k = 0; k < ratios.size(); ++k) {
    if (lefts[k] < 0.0 || lefts[k] + ratios[k] > 1.0 + 1e-12)
      throw DomainError("affine branch image leaves [0,1]");
    branches.push_back(AffineBranch::from_ratio(lefts[k], ratios[k]));
  }
  return MarkovSystem(std::make_shared<AffineFamily>(std::move(branches)), 1.0 / largest, 1);
}

MarkovSystem gauss_map(std::optional<Symbol> truncation) {
  // |(T^n)'| >= q_n^2 >= golden^(2n-2) > 2^n for n >= 4; derivative ratios on
  // a cylinder are bounded by 4.
  return MarkovSystem(std::make_shared<GaussFamily>(truncation), 2.0, 4,
                      [](unsigned n) { return std::log(4.0) / static_cast<double>(std::max(n, 1u)); });
}

MarkovSystem affine_geometric(double first, double decay) {
  if (!(first > 0.0 && first < 1.0) || !(decay > 0.0 && decay < 1.0))
    throw DomainError("geometric ratios need first, decay in (0,1)");
  if (first / (1.0 - decay) > 1.0 + 1e-12) throw DomainError("geometric ratios sum to more than 1");
  const double log_first = std::log(first);
  const double log_decay = std::log(decay);
  // Sum of the first i ratios.
  auto packed = [=](double i) { return first * (-std::expm1(i * log_decay)) / (1.0 - decay); };
  auto branch = [=](Symbol i) {
    const double lr = log_first + static_cast<double>(i - 1) * log_decay;
    return AffineBranch::from_log_ratio(std::max(0.0, 1.0 - packed(i)), lr);
  };
  auto tail = [=](double e, Symbol after) {
    if (!(e > 0.0)) return kInf;
    const double log_term = e * log_first + e * static_cast<double>(after) * log_decay;
    return next_up(std::exp(log_term) / (-std::expm1(e * log_decay)) * (1.0 + 1e-12));
  };
  auto locate = [=](double x) -> std::optional<Symbol> {
    if (!(x > 0.0) || x > 1.0) return std::nullopt;
    const double arg = 1.0 - (1.0 - x) * (1.0 - decay) / first;
    if (!(arg > 0.0)) return std::nullopt;
    const double guess = std::ceil(std::log(arg) / log_decay);
    if (!(guess < 4.0e9)) return std::nullopt;
    const auto g = static_cast<Symbol>(std::max(1.0, guess));
    for (Symbol i = g > 1 ? g - 1 : 1; i <= g + 1; ++i) {
      const AffineBranch b = branch(i);
      const Interval dom{b.left, add_up(b.left, b.ratio.hi)};
      if (dom.contains(x)) return i;
    }
    return std::nullopt;
  };
  auto family = std::make_shared<AffineFamily>(Alphabet::countable({}, 1), branch, tail, locate);
  return MarkovSystem(std::move(family), 1.0 / first, 1);
}

// ---------------------------------------------------------------- geometry

CylinderGeometry cylinder_on(const MarkovSystem& sys, const Word& word, const Interval& base) {
  if (word.empty()) throw DomainError("cylinder of the empty word");
  const BranchFamily& fam = sys.family();
  Interval x = base;
  Interval deriv{1.0, 1.0};
  Interval logd{0.0, 0.0};
  for (std::size_t k = word.size(); k-- > 0;) {
    const Symbol s = word[k];
    if (!fam.alphabet().contains(s))
      throw DomainError("symbol " + std::to_string(s) + " is not in the alphabet");
    deriv = mul_nonneg(deriv, fam.abs_deriv(s, x));
    logd = logd + fam.log_abs_deriv(s, x);
    x = clamp_unit(fam.image(s, x));
  }
  return {word, x, sub_up(x.hi, x.lo), deriv, logd};
}

CylinderGeometry cylinder(const MarkovSystem& sys, const Word& word) {
  return cylinder_on(sys, word, Interval::unit());
}

Word encode_point(const MarkovSystem& sys, double x, std::size_t depth) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("encode_point: x must lie in [0,1]");
  const BranchFamily& fam = sys.family();
  Word w;
  for (std::size_t k = 1; k <= depth; ++k) {
    const auto s = fam.locate(x);
    if (!s) throw EscapeError("point escapes the repeller at depth " + std::to_string(k), k);
    w.push_back(*s);
    x = fam.branch_inverse(*s, x);
  }
  return w;
}

namespace {

struct Refined {
  Interval interval;
  bool reached = false;
};

std::optional<Refined> refine(const MarkovSystem& sys, const SymbolSource& source, double eps,
                              std::size_t min_length, std::size_t max_length) {
  std::vector<Symbol> symbols;
  Interval best = Interval::unit();
  int stalled = 0;
  for (std::size_t len = 1; len <= max_length; ++len) {
    const auto s = source(len - 1);
    if (!s) return std::nullopt;
    symbols.push_back(*s);
    if (len < min_length) continue;
    const CylinderGeometry g = cylinder(sys, Word(symbols));
    if (g.interval.width() <= eps) return Refined{g.interval, true};
    stalled = g.interval.width() < best.width() ? 0 : stalled + 1;
    if (g.interval.width() < best.width() || len == min_length) best = g.interval;
    if (stalled >= 8) break;
  }
  return Refined{best, false};
}

}  // namespace

std::optional<Interval> refine_point(const MarkovSystem& sys, const SymbolSource& next_symbol,
                                     double eps, std::size_t max_length) {
  const auto r = refine(sys, next_symbol, eps, 1, max_length);
  if (!r) return std::nullopt;
  return r->interval;
}

Interval project_word(const MarkovSystem& sys, const Word& prefix, double eps) {
  if (!(eps > 0.0)) throw DomainError("project_word: precision must be positive");
  if (prefix.empty()) throw DomainError("project_word: empty prefix");
  SymbolSource periodic = [&](std::size_t i) -> std::optional<Symbol> { return prefix[i % prefix.size()]; };
  const auto r = refine(sys, periodic, eps, prefix.size(), 1u << 14);
  if (!r || !r->reached)
    throw DomainError("project_word: precision below what double arithmetic resolves here");
  return r->interval;
}

// ---------------------------------------------------------------- enumeration

std::uint64_t word_count(std::size_t alphabet_size, std::size_t depth) {
  std::uint64_t total = 1;
  for (std::size_t k = 0; k < depth; ++k) {
    if (alphabet_size != 0 && total > std::numeric_limits<std::uint64_t>::max() / alphabet_size)
      return std::numeric_limits<std::uint64_t>::max();
    total *= alphabet_size;
  }
  return total;
}

WordEnumerator::WordEnumerator(std::vector<Symbol> alphabet, std::size_t depth, std::uint64_t budget)
    : alphabet_(std::move(alphabet)), digits_(depth, 0) {
  std::sort(alphabet_.begin(), alphabet_.end());
  alphabet_.erase(std::unique(alphabet_.begin(), alphabet_.end()), alphabet_.end());
  if (alphabet_.empty()) throw DomainError("enumerate_words: empty symbol set");
  if (depth == 0) throw DomainError("enumerate_words: depth must be >= 1");
  count_ = word_count(alphabet_.size(), depth);
  if (count_ > budget) {
    int deepest = 0;
    while (word_count(alphabet_.size(), static_cast<std::size_t>(deepest) + 1) <= budget) ++deepest;
    throw BudgetError("enumerating " + std::to_string(alphabet_.size()) + "^" + std::to_string(depth) +
                          " words exceeds the budget of " + std::to_string(budget),
                      budget, deepest);
  }
}

std::optional<Word> WordEnumerator::next() {
  if (done_) return std::nullopt;
  std::vector<Symbol> w(digits_.size());
  for (std::size_t k = 0; k < digits_.size(); ++k) w[k] = alphabet_[digits_[k]];
  std::size_t k = digits_.size();
  while (k > 0) {
    --k;
    if (++digits_[k] < alphabet_.size()) break;
    digits_[k] = 0;
    if (k == 0) done_ = true;
  }
  return Word(std::move(w));
}

std::vector<Symbol> checked_subset(const MarkovSystem& sys, std::vector<Symbol> subset) {
  std::sort(subset.begin(), subset.end());
  subset.erase(std::unique(subset.begin(), subset.end()), subset.end());
  if (subset.empty()) throw DomainError("symbol subset is empty");
  for (Symbol s : subset)
    if (!sys.alphabet().contains(s))
      throw DomainError("symbol " + std::to_string(s) + " is not in the alphabet");
  return subset;
}

Interval limit_hull(const MarkovSystem& sys, std::span<const Symbol> subset) {
  if (subset.empty()) throw DomainError("limit_hull: empty symbol set");
  const BranchFamily& fam = sys.family();
  Interval h = Interval::unit();
  for (int iter = 0; iter < 4000; ++iter) {
    Interval next{kInf, -kInf};
    for (Symbol j : subset) next = hull(next, fam.image(j, h));
    next = {std::max(next.lo, h.lo), std::min(next.hi, h.hi)};
    if (next == h) break;
    h = next;
  }
  return h;
}

}  // namespace stp

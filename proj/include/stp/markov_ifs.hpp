#pragma once

// Expanding Markov maps on [0,1], represented by the iterated function system
// of their inverse branches phi_i : [0,1] -> V_i.
//
// Cylinders phi_w([0,1]) are computed from the innermost symbol outwards,
// phi_w = phi_{w_1} o ... o phi_{w_n}, with outward rounding. Derivative
// brackets are composed multiplicatively from per-branch interval extensions
// evaluated on the current nested interval.

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stp/errors.hpp"
#include "stp/interval.hpp"

namespace stp {

using Symbol = std::uint32_t;

// Finite string of branch indices. The empty word stands for [0,1].
class Word {
 public:
  Word() = default;
  Word(std::initializer_list<Symbol> s) : symbols_(s) {}
  explicit Word(std::vector<Symbol> s) : symbols_(std::move(s)) {}

  [[nodiscard]] std::size_t size() const { return symbols_.size(); }
  [[nodiscard]] bool empty() const { return symbols_.empty(); }
  Symbol operator[](std::size_t i) const { return symbols_[i]; }
  [[nodiscard]] auto begin() const { return symbols_.begin(); }
  [[nodiscard]] auto end() const { return symbols_.end(); }
  [[nodiscard]] std::span<const Symbol> symbols() const { return symbols_; }

  void push_back(Symbol s) { symbols_.push_back(s); }
  [[nodiscard]] Word prefix(std::size_t n) const;
  [[nodiscard]] std::string to_string() const;

  friend bool operator==(const Word&, const Word&) = default;

 private:
  std::vector<Symbol> symbols_;
};

// Symbol set of a system: an explicit finite head, optionally followed by
// every integer >= tail_start (countable alphabets).
class Alphabet {
 public:
  static Alphabet range(Symbol first, Symbol last);
  static Alphabet finite(std::vector<Symbol> symbols);
  static Alphabet countable(std::vector<Symbol> head, Symbol tail_start);

  [[nodiscard]] bool contains(Symbol s) const;
  [[nodiscard]] bool is_finite() const { return !tail_start_.has_value(); }
  // Number of symbols; only for finite alphabets.
  [[nodiscard]] std::size_t size() const;
  // The `count` smallest symbols (fewer if the alphabet is finite and small).
  [[nodiscard]] std::vector<Symbol> first(std::size_t count) const;
  // All symbols <= max_symbol.
  [[nodiscard]] std::vector<Symbol> up_to(Symbol max_symbol) const;
  [[nodiscard]] std::vector<Symbol> symbols() const;  // finite only
  [[nodiscard]] std::optional<Symbol> tail_start() const { return tail_start_; }
  [[nodiscard]] const std::vector<Symbol>& head() const { return head_; }

 private:
  std::vector<Symbol> head_;
  std::optional<Symbol> tail_start_;
};

enum class FamilyKind { affine_list, affine_countable, gauss, custom_monotone };

class BranchFamily {
 public:
  virtual ~BranchFamily() = default;

  [[nodiscard]] virtual FamilyKind kind() const = 0;
  [[nodiscard]] virtual const Alphabet& alphabet() const = 0;
  [[nodiscard]] virtual bool affine() const { return false; }

  // Outward enclosure of phi_i(x) for x inside [0,1].
  [[nodiscard]] virtual Interval image(Symbol i, const Interval& x) const = 0;
  // Enclosure of the range of |phi_i'| over x.
  [[nodiscard]] virtual Interval abs_deriv(Symbol i, const Interval& x) const = 0;
  // Enclosure of the range of log|phi_i'| over x.
  [[nodiscard]] virtual Interval log_abs_deriv(Symbol i, const Interval& x) const {
    return log(abs_deriv(i, x));
  }
  // T restricted to V_i, i.e. the inverse of phi_i.
  [[nodiscard]] virtual double branch_inverse(Symbol i, double x) const = 0;
  // Lowest-index branch whose closed domain V_i contains x.
  [[nodiscard]] virtual std::optional<Symbol> locate(double x) const = 0;

  // Upper bound for sum over alphabet symbols i > after of sup|phi_i'|^exponent;
  // +inf if the series diverges. The default sums finite alphabets explicitly
  // and returns +inf for countable ones.
  [[nodiscard]] virtual double tail_sum(double exponent, Symbol after) const;

  [[nodiscard]] Interval domain(Symbol i) const { return image(i, Interval::unit()); }
};

struct AffineBranch {
  double left = 0.0;      // phi_i(x) = left + ratio * x
  Interval ratio;         // enclosure of the contraction ratio
  Interval log_ratio;     // enclosure of its logarithm (kept when ratio underflows)

  static AffineBranch from_ratio(double left, double ratio);
  static AffineBranch from_log_ratio(double left, double log_ratio);
};

// Orientation-preserving affine branches, finite list or countable generator.
class AffineFamily final : public BranchFamily {
 public:
  using BranchFn = std::function<AffineBranch(Symbol)>;
  using TailSumFn = std::function<double(double exponent, Symbol after)>;
  using LocateFn = std::function<std::optional<Symbol>(double)>;

  // Symbols 1..k.
  explicit AffineFamily(std::vector<AffineBranch> branches);
  // Countable family: `branch` is defined on every alphabet symbol, `tail_sum`
  // bounds sum_{i > after} ratio_i^exponent, `locate` finds branch domains.
  AffineFamily(Alphabet alphabet, BranchFn branch, TailSumFn tail_sum, LocateFn locate);

  [[nodiscard]] FamilyKind kind() const override {
    return alphabet_.is_finite() ? FamilyKind::affine_list : FamilyKind::affine_countable;
  }
  [[nodiscard]] const Alphabet& alphabet() const override { return alphabet_; }
  [[nodiscard]] bool affine() const override { return true; }
  [[nodiscard]] Interval image(Symbol i, const Interval& x) const override;
  [[nodiscard]] Interval abs_deriv(Symbol i, const Interval& x) const override;
  [[nodiscard]] Interval log_abs_deriv(Symbol i, const Interval& x) const override;
  [[nodiscard]] double branch_inverse(Symbol i, double x) const override;
  [[nodiscard]] std::optional<Symbol> locate(double x) const override;
  [[nodiscard]] double tail_sum(double exponent, Symbol after) const override;

  [[nodiscard]] AffineBranch branch(Symbol i) const;

 private:
  Alphabet alphabet_;
  std::vector<AffineBranch> list_;
  BranchFn generator_;
  TailSumFn tail_sum_;
  LocateFn locate_;
};

// Inverse branches of the Gauss map, phi_i(x) = 1/(i + x), optionally
// truncated to the symbols 1..K.
class GaussFamily final : public BranchFamily {
 public:
  explicit GaussFamily(std::optional<Symbol> truncation = std::nullopt);

  [[nodiscard]] FamilyKind kind() const override { return FamilyKind::gauss; }
  [[nodiscard]] const Alphabet& alphabet() const override { return alphabet_; }
  [[nodiscard]] Interval image(Symbol i, const Interval& x) const override;
  [[nodiscard]] Interval abs_deriv(Symbol i, const Interval& x) const override;
  [[nodiscard]] Interval log_abs_deriv(Symbol i, const Interval& x) const override;
  [[nodiscard]] double branch_inverse(Symbol i, double x) const override;
  [[nodiscard]] std::optional<Symbol> locate(double x) const override;
  [[nodiscard]] double tail_sum(double exponent, Symbol after) const override;

  [[nodiscard]] std::optional<Symbol> truncation() const { return truncation_; }

 private:
  std::optional<Symbol> truncation_;
  Alphabet alphabet_;
};

// Finite family of monotone C^1 branches given by evaluators.
struct CustomBranch {
  std::function<double(double)> map;              // phi_i on [0,1], monotone
  std::function<Interval(const Interval&)> abs_deriv;  // interval extension of |phi_i'|
  bool increasing = true;
};

class CustomMonotoneFamily final : public BranchFamily {
 public:
  explicit CustomMonotoneFamily(std::vector<CustomBranch> branches);

  [[nodiscard]] FamilyKind kind() const override { return FamilyKind::custom_monotone; }
  [[nodiscard]] const Alphabet& alphabet() const override { return alphabet_; }
  [[nodiscard]] Interval image(Symbol i, const Interval& x) const override;
  [[nodiscard]] Interval abs_deriv(Symbol i, const Interval& x) const override;
  [[nodiscard]] double branch_inverse(Symbol i, double x) const override;
  [[nodiscard]] std::optional<Symbol> locate(double x) const override;

 private:
  const CustomBranch& at(Symbol i) const;
  std::vector<CustomBranch> branches_;
  Alphabet alphabet_;
};

class MarkovSystem {
 public:
  // rho_n of the distortion condition; an empty function marks an affine
  // system (rho_n = 0).
  using DistortionFn = std::function<double(unsigned)>;

  MarkovSystem(std::shared_ptr<const BranchFamily> family, double xi, unsigned expansion_index,
               DistortionFn distortion = {});

  [[nodiscard]] const BranchFamily& family() const { return *family_; }
  [[nodiscard]] const Alphabet& alphabet() const { return family_->alphabet(); }
  [[nodiscard]] double xi() const { return xi_; }
  [[nodiscard]] unsigned expansion_index() const { return expansion_index_; }
  [[nodiscard]] bool affine() const { return !distortion_; }
  [[nodiscard]] double distortion(unsigned n) const { return distortion_ ? distortion_(n) : 0.0; }

 private:
  std::shared_ptr<const BranchFamily> family_;
  double xi_;
  unsigned expansion_index_;
  DistortionFn distortion_;
};

// x -> 2x mod 1: branches [0,1/2] and [1/2,1].
MarkovSystem doubling_map();
// Affine branches with the given ratios. Without `lefts`, the branches are
// laid out left to right with equal gaps between them (no gap when the ratios
// sum to 1).
MarkovSystem affine_system(std::vector<double> ratios, std::vector<double> lefts = {});
// Gauss map, full countable alphabet or truncated to 1..K.
MarkovSystem gauss_map(std::optional<Symbol> truncation = std::nullopt);
// Countable affine system with ratios first * decay^(i-1), packed from the
// right end of [0,1] towards 0.
MarkovSystem affine_geometric(double first, double decay);

struct CylinderGeometry {
  Word word;
  Interval interval;       // phi_w([0,1])
  double diam = 0.0;
  Interval deriv_bracket;  // range of |phi_w'| over [0,1]
  Interval log_deriv;      // range of log|phi_w'| over [0,1]
};

// Throws DomainError for an empty word or a symbol outside the alphabet.
CylinderGeometry cylinder(const MarkovSystem& sys, const Word& word);
// Same, with phi_w evaluated on `base` instead of [0,1].
CylinderGeometry cylinder_on(const MarkovSystem& sys, const Word& word, const Interval& base);

// The word w of length `depth` with x in phi_w([0,1]). Shared endpoints go to
// the lower branch index. Throws EscapeError when x leaves the domains.
Word encode_point(const MarkovSystem& sys, double x, std::size_t depth);

// Enclosure of width <= eps of pi(w w w ...), the point coded by the periodic
// repetition of `prefix`.
Interval project_word(const MarkovSystem& sys, const Word& prefix, double eps);

// Cylinder of the word produced by `next_symbol`, extended one symbol at a
// time until its width is <= eps. Returns std::nullopt if the source runs dry
// first; otherwise the deepest interval reached (which may be wider than eps
// when double precision cannot resolve further).
using SymbolSource = std::function<std::optional<Symbol>(std::size_t index)>;
std::optional<Interval> refine_point(const MarkovSystem& sys, const SymbolSource& next_symbol,
                                     double eps, std::size_t max_length = 4096);

// Enumerates F^n in lexicographic order (F sorted ascending).
class WordEnumerator {
 public:
  WordEnumerator(std::vector<Symbol> alphabet, std::size_t depth,
                 std::uint64_t budget = 10'000'000);

  [[nodiscard]] std::uint64_t count() const { return count_; }
  // Next word, or std::nullopt once all words were produced.
  std::optional<Word> next();

 private:
  std::vector<Symbol> alphabet_;
  std::vector<std::size_t> digits_;
  std::uint64_t count_ = 0;
  bool done_ = false;
};

// Validates a finite symbol subset against the system alphabet and returns it
// sorted and deduplicated. Throws DomainError on empty or foreign input.
std::vector<Symbol> checked_subset(const MarkovSystem& sys, std::vector<Symbol> subset);

// |F|^n, saturating at UINT64_MAX.
std::uint64_t word_count(std::size_t alphabet_size, std::size_t depth);

// Outward enclosure of the convex hull of the limit set of the subsystem
// restricted to F.
Interval limit_hull(const MarkovSystem& sys, std::span<const Symbol> subset);

}  // namespace stp

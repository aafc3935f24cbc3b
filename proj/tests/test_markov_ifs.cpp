#include <cmath>

#include "doctest.h"
#include "stp/markov_ifs.hpp"
#include "support.hpp"

using namespace stp;
using stp::testing::Gen;

TEST_CASE("interval rounding encloses the exact result") {
  using namespace rounding;
  CHECK(add_down(0.1, 0.2) <= 0.30000000000000004);
  CHECK(add_up(0.1, 0.2) >= 0.30000000000000004);
  CHECK(add_down(0.25, 0.5) == 0.75);  // exact sums stay degenerate
  CHECK(mul_down(1.0 / 3.0, 3.0) <= 1.0);
  CHECK(div_down(1.0, 3.0) < div_up(1.0, 3.0));
  CHECK(div_down(1.0, 4.0) == div_up(1.0, 4.0));
  CHECK(log_down(2.0) < std::log(2.0));
  CHECK(log_up(2.0) > std::log(2.0));
  CHECK(log_down(1.0) <= 0.0);
  CHECK(log_up(1.0) >= 0.0);
}

TEST_CASE("doubling cylinders are exact dyadic intervals") {
  const MarkovSystem d = doubling_map();
  const CylinderGeometry g = cylinder(d, Word{1, 2});
  CHECK(g.interval.lo == 0.25);
  CHECK(g.interval.hi == 0.5);
  CHECK(g.diam == 0.25);
  CHECK(g.deriv_bracket.lo == 0.25);
  CHECK(g.deriv_bracket.hi == 0.25);
}

TEST_CASE("gauss cylinder (2,1) is [1/3, 2/5]") {
  const MarkovSystem g = gauss_map();
  const CylinderGeometry c = cylinder(g, Word{2, 1});
  CHECK(c.interval.contains(1.0 / 3.0));
  CHECK(c.interval.contains(2.0 / 5.0));
  CHECK(c.diam == doctest::Approx(1.0 / 15.0).epsilon(1e-14));
  // |phi_w'(x)| = 1/(q_n + q_{n-1} x)^2 with q_1 = 2, q_2 = 3.
  CHECK(c.deriv_bracket.contains(1.0 / 9.0));
  CHECK(c.deriv_bracket.contains(1.0 / 25.0));
}

TEST_CASE("cylinder rejects empty words and foreign symbols") {
  const MarkovSystem d = doubling_map();
  CHECK_THROWS_AS(cylinder(d, Word{}), DomainError);
  CHECK_THROWS_AS(cylinder(d, Word{1, 3}), DomainError);
  CHECK_THROWS_AS(cylinder(gauss_map(5), Word{6}), DomainError);
}

TEST_CASE("encode_point follows binary digits") {
  // 0.3 = 0.0100110011... in binary.
  CHECK(encode_point(doubling_map(), 0.3, 6) == Word{1, 2, 1, 1, 2, 2});
  // Shared endpoint 1/2 goes to the lower index.
  CHECK(encode_point(doubling_map(), 0.5, 1) == Word{1});
}

TEST_CASE("encode_point reports the escape depth") {
  // V1 = [0, 0.3], V2 = [0.5, 1]; 0.7 -> 0.4 lands in the gap.
  const MarkovSystem gap = affine_system({0.3, 0.5}, {0.0, 0.5});
  try {
    (void)encode_point(gap, 0.7, 5);
    FAIL("expected an escape");
  } catch (const EscapeError& e) {
    CHECK(e.depth() == 2);
  }
}

TEST_CASE("project_word encloses the periodic point") {
  const Interval zero = project_word(doubling_map(), Word{1}, 1e-12);
  CHECK(zero.contains(0.0));
  CHECK(zero.width() <= 1e-12);
  const Interval two_thirds = project_word(doubling_map(), Word{2, 1}, 1e-12);
  CHECK(two_thirds.lo <= 2.0 / 3.0 + 1e-15);
  CHECK(two_thirds.hi >= 2.0 / 3.0 - 1e-15);
  // [0; 2, 2, 2, ...] = sqrt(2) - 1.
  const Interval silver = project_word(gauss_map(), Word{2}, 1e-12);
  CHECK(std::abs(silver.mid() - (std::sqrt(2.0) - 1.0)) < 1e-12);
  CHECK_THROWS_AS(project_word(doubling_map(), Word{1}, 0.0), DomainError);
  CHECK_THROWS_AS(project_word(doubling_map(), Word{}, 1e-3), DomainError);
}

TEST_CASE("word enumeration order, count and budget") {
  WordEnumerator it({2, 1}, 2);
  CHECK(it.count() == 4);
  std::vector<Word> seen;
  while (auto w = it.next()) seen.push_back(*w);
  REQUIRE(seen.size() == 4);
  CHECK(seen.front() == Word{1, 1});
  CHECK(seen[1] == Word{1, 2});
  CHECK(seen.back() == Word{2, 2});
  CHECK_THROWS_AS(WordEnumerator({1, 2, 3}, 20, 1000), BudgetError);
  CHECK(word_count(2, 10) == 1024);
  CHECK(word_count(1000, 20) == std::numeric_limits<std::uint64_t>::max());
}

TEST_CASE("checked_subset sorts, deduplicates and validates") {
  const MarkovSystem g = gauss_map();
  CHECK(checked_subset(g, {3, 1, 3}) == std::vector<Symbol>{1, 3});
  CHECK_THROWS_AS(checked_subset(g, {}), DomainError);
  CHECK_THROWS_AS(checked_subset(g, {0}), DomainError);
  CHECK_THROWS_AS(checked_subset(doubling_map(), {3}), DomainError);
}

TEST_CASE("system construction checks") {
  CHECK_THROWS_AS(affine_system({0.5}), DomainError);
  CHECK_THROWS_AS(affine_system({0.6, 0.6}), DomainError);
  CHECK_THROWS_AS(affine_system({0.5, 0.5}, {0.0, 0.25}), DomainError);  // overlapping
  CHECK_THROWS_AS(affine_system({0.5, 1.5}), DomainError);
  CHECK_NOTHROW(affine_system({0.5, 0.5}));
}

TEST_CASE("limit hull of gauss {1,2}") {
  // Endpoints [0; 2,1,2,1,...] = (sqrt3 - 1)/2 and [0; 1,2,1,2,...] = sqrt3 - 1.
  const Interval h = limit_hull(gauss_map(), std::vector<Symbol>{1, 2});
  const double lo = (std::sqrt(3.0) - 1.0) / 2.0;
  const double hi = std::sqrt(3.0) - 1.0;
  CHECK(h.lo <= lo);
  CHECK(h.hi >= hi);
  CHECK(h.lo > lo - 1e-9);
  CHECK(h.hi < hi + 1e-9);
}

TEST_CASE("countable families") {
  const MarkovSystem geo = affine_geometric(0.5, 0.5);
  CHECK_FALSE(geo.alphabet().is_finite());
  const Interval v1 = geo.family().domain(1);
  CHECK(v1.contains(0.5));
  CHECK(v1.contains(1.0));
  CHECK(geo.family().locate(0.75) == std::optional<Symbol>(1));
  // sum_{i > 1} (0.5^i)^1 = 0.5.
  CHECK(geo.family().tail_sum(1.0, 1) >= 0.5);
  CHECK(geo.family().tail_sum(1.0, 1) < 0.5 + 1e-12);
  CHECK(geo.family().tail_sum(0.0, 1) == kInf);

  const MarkovSystem g = gauss_map();
  CHECK(g.family().locate(0.3) == std::optional<Symbol>(3));
  CHECK(g.family().tail_sum(0.4, 10) == kInf);
  // sum_{i > 10} i^-2 = 0.09516...
  CHECK(g.family().tail_sum(1.0, 10) >= 0.0951663);
}

TEST_CASE("property: nested cylinders and affine diameters") {
  Gen gen(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::vector<double> r = gen.ratios();
    const MarkovSystem sys = affine_system(r);
    const std::vector<Symbol> alphabet = stp::testing::range_symbols(static_cast<Symbol>(r.size()));
    const Word w = gen.word(alphabet, static_cast<std::size_t>(gen.integer(2, 8)));
    const CylinderGeometry full = cylinder(sys, w);
    const CylinderGeometry head = cylinder(sys, w.prefix(w.size() - 1));
    CHECK(head.interval.lo <= full.interval.lo);
    CHECK(full.interval.hi <= head.interval.hi);
    double product = 1.0;
    for (Symbol s : w) product *= r[s - 1];
    CHECK(full.diam == doctest::Approx(product).epsilon(1e-12));
    CHECK(full.deriv_bracket.contains(product));
  }
}

TEST_CASE("property: encode_point inverts cylinder membership") {
  Gen gen(12);
  const MarkovSystem g = gauss_map();
  for (int trial = 0; trial < 100; ++trial) {
    const Word w = gen.word({1, 2, 3, 4, 5, 6, 7}, 6);
    const Interval c = cylinder(g, w).interval;
    const double x = c.mid();
    CHECK(encode_point(g, x, 6) == w);
  }
}

#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace stp {

// Precondition violations: symbols outside the alphabet, nonpositive
// tolerances, malformed ratio lists, ...
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A word enumeration would exceed the configured budget. `deepest_level` is
// the last level that was (or would have been) completed within budget.
class BudgetError : public std::runtime_error {
 public:
  BudgetError(const std::string& what, std::uint64_t budget, int deepest_level)
      : std::runtime_error(what), budget_(budget), deepest_level_(deepest_level) {}
  [[nodiscard]] std::uint64_t budget() const { return budget_; }
  [[nodiscard]] int deepest_level() const { return deepest_level_; }

 private:
  std::uint64_t budget_;
  int deepest_level_;
};

// A point leaves the branch domains before the requested coding depth.
// `depth` is the 1-based position of the symbol that could not be assigned.
class EscapeError : public std::runtime_error {
 public:
  EscapeError(const std::string& what, std::size_t depth)
      : std::runtime_error(what), depth_(depth) {}
  [[nodiscard]] std::size_t depth() const { return depth_; }

 private:
  std::size_t depth_;
};

}  // namespace stp

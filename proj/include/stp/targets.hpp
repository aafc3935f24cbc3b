#pragma once

// Shrinking targets B(y, exp(-S_n phi)): cover sums for upper dimension
// bounds, cylinder density around y, and hit/miss decisions along orbits.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "stp/pressure.hpp"

namespace stp {

struct ConstantRate {
  double alpha = 0.0;
};
struct PotentialRate {
  Potential phi;
};

struct TargetSpec {
  double y = 0.0;
  std::variant<ConstantRate, PotentialRate> rate;

  TargetSpec(double y, ConstantRate r);
  TargetSpec(double y, PotentialRate r);

  // ConstantRate(a) is Potential::constant(a).
  [[nodiscard]] Potential potential() const;
};

struct LevelSum {
  int n = 0;
  double sum = 0.0;      // upper bound for sum over words of diam^s
  double log_sum = 0.0;  // its logarithm (-inf for an empty level)
  std::uint64_t words = 0;  // contributing words
};

struct CoverReport {
  double s = 0.0;
  int m = 0;
  int n_max = 0;
  std::vector<LevelSum> per_level;
  double total = 0.0;
  std::optional<double> geometric_tail_bound;
};

// Level n sums exp(s * (sup log|phi_w'| - inf S_n phi)) over the words w of
// F^n for which the target radius exp(-inf S_n phi) reaches the union of the
// level-1 domains of F.
CoverReport cover_sum(const MarkovSystem& sys, const TargetSpec& target, double s, int m, int n_max,
                      const std::vector<Symbol>& subset, const PressureOptions& options = {});

struct CertificateParams {
  int m = 1;
  int n_max = 10;
  std::vector<Symbol> subset;
  int decay_window = 3;  // trailing level ratios that must all be small
  double margin = 1e-9;  // accept iff every ratio <= 1 - margin
  PressureOptions options{};
};

struct CertificateReport {
  bool accepted = false;
  double max_ratio = 0.0;       // largest trailing ratio of consecutive level sums
  double implied_total = 0.0;   // cover total plus geometric tail (accepted only)
  CoverReport cover;
  std::string note;
};

// Numerical evidence that dim D_y(phi) <= s at the given truncation: the last
// `decay_window` consecutive level ratios all stay below 1 - margin.
CertificateReport upper_dimension_certificate(const MarkovSystem& sys, const TargetSpec& target, double s,
                                              const CertificateParams& params);

// r^-1 * total length of the depth-n cylinders over F contained in the open
// ball B(y, r).
double cylinder_density(const MarkovSystem& sys, double y, int n, double r, const std::vector<Symbol>& subset,
                        std::uint64_t budget = 10'000'000);

struct HitOptions {
  int max_refinements = 6;  // each divides the orbit precision by 16
  std::size_t max_code_length = 4096;
};

struct HitSchedule {
  std::vector<int> hits;
  std::vector<int> misses;
  std::vector<int> undecided;
};

// Decides |T^n x - y| < exp(-S_n phi(x)) for n = 1..horizon, where x is the
// point coded by `code`.
HitSchedule hit_times(const MarkovSystem& sys, const SymbolSource& code, const TargetSpec& target, int horizon,
                      const HitOptions& options = {});

}  // namespace stp

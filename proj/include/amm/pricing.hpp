#pragma once

#include <optional>
#include <string>
#include <vector>

#include "amm/errors.hpp"

namespace amm {

/// Noise-discounted sample counts for the two stages of the estimator.
struct EffectiveSampleSizes {
  double n_d = 0.0;  // (sum 1/sigma^4) / max(1/sigma^4)
  double n_l = 0.0;  // (sum 1/sigma^(4k-2)) / max(1/sigma^(4k-2))
};

EffectiveSampleSizes effective_sample_sizes(const std::vector<double>& sigmas,
                                            int k);

/// One benchmark row: a configuration with clean fraction p (and, for mixed
/// rows, the remaining 1-p at noise level sigma) and its score, lower better.
struct PricingRow {
  double p_clean = 0.0;
  std::optional<double> sigma;  // empty for clean-only rows
  double score = 0.0;
};

struct PricingTable {
  std::string dataset;
  std::vector<PricingRow> rows;

  void validate() const;
};

/// Interval bounds on 1/c_sigma, the number of noisy samples worth one clean
/// sample. `valid` is false when the computed lower end dips below 1 (a noisy
/// sample would be worth more than a clean one), flagged but not clamped.
struct PricingBound {
  double sigma = 0.0;
  double inv_c_lower = 0.0;  // 0 means unconstrained from below
  double inv_c_upper = 0.0;  // +inf means unconstrained from above
  bool valid = true;
  std::string witness_lower, witness_upper;  // pair descriptions for auditing
};

/// Derives bounds on 1/c_sigma for every noise level in the table by
/// enumerating ordered pairs of rows (better score implies at least as much
/// effective data: p_A + c q_A >= p_B + c q_B) and intersecting the
/// resulting half-lines. Pairs with |score difference| <= tie_tol are
/// skipped, as are rows with clean fraction below min_clean_fraction.
/// Throws InconsistentTable when the intersection is empty.
std::vector<PricingBound> price_bounds(const PricingTable& table,
                                       double min_clean_fraction = 0.1,
                                       double tie_tol = 0.02);

}  // namespace amm

#include "amm/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace amm {

EffectiveSampleSizes effective_sample_sizes(const std::vector<double>& sigmas,
                                            int k) {
  if (sigmas.empty())
    throw InvalidArgument("effective_sample_sizes: empty sigmas");
  if (k < 1) throw InvalidArgument("effective_sample_sizes: k must be >= 1");
  double smin = sigmas[0];
  for (double s : sigmas) {
    if (!(s > 0.0))
      throw InvalidArgument("effective_sample_sizes: sigma must be > 0");
    smin = std::min(smin, s);
  }
  // n_d = sum (smin/sigma)^4 and n_l = sum (smin/sigma)^(4k-2): the max of
  // 1/sigma^q is attained at smin, so the normalized ratios are exact and
  // immune to overflow.
  EffectiveSampleSizes ess;
  for (double s : sigmas) {
    const double r = smin / s;
    ess.n_d += std::pow(r, 4);
    ess.n_l += std::pow(r, 4 * k - 2);
  }
  return ess;
}

void PricingTable::validate() const {
  for (const PricingRow& r : rows) {
    if (!(r.p_clean >= 0.0 && r.p_clean <= 1.0))
      throw InvalidArgument("pricing table: clean fraction outside [0,1]");
    if (!(r.score > 0.0))
      throw InvalidArgument("pricing table: scores must be positive");
    if (r.sigma && !(*r.sigma >= 0.0))
      throw InvalidArgument("pricing table: negative sigma");
  }
}

namespace {

std::string describe(const PricingRow& r) {
  std::ostringstream os;
  os << "(p=" << r.p_clean;
  if (r.sigma) os << ", sigma=" << *r.sigma;
  os << ", score=" << r.score << ")";
  return os.str();
}

}  // namespace

std::vector<PricingBound> price_bounds(const PricingTable& table,
                                       double min_clean_fraction,
                                       double tie_tol) {
  table.validate();

  // Distinct noise levels observed in mixed rows.
  std::vector<double> levels;
  for (const PricingRow& r : table.rows) {
    if (!r.sigma) continue;
    if (std::find(levels.begin(), levels.end(), *r.sigma) == levels.end())
      levels.push_back(*r.sigma);
  }
  std::sort(levels.begin(), levels.end());

  const double kInf = std::numeric_limits<double>::infinity();
  std::vector<PricingBound> bounds;
  for (double sigma : levels) {
    // Rows usable at this level: clean-only rows (noisy fraction 0) and
    // mixed rows whose sigma matches exactly.
    std::vector<const PricingRow*> rows;
    for (const PricingRow& r : table.rows) {
      if (r.p_clean < min_clean_fraction) continue;
      if (!r.sigma || *r.sigma == sigma) rows.push_back(&r);
    }
    if (rows.size() < 2) continue;

    // Value model: worth(row) = p + c * q with q the noisy fraction. A
    // better score implies at least as much worth, giving a half-line on c.
    double c_lower = 0.0, c_upper = kInf;
    std::string wit_lower, wit_upper;
    const PricingRow* conflict_a = nullptr;
    const PricingRow* conflict_b = nullptr;
    for (const PricingRow* A : rows) {
      for (const PricingRow* B : rows) {
        if (A == B) continue;
        if (!(A->score < B->score)) continue;  // A strictly better
        if (std::abs(A->score - B->score) <= tie_tol) continue;
        const double qa = A->sigma ? 1.0 - A->p_clean : 0.0;
        const double qb = B->sigma ? 1.0 - B->p_clean : 0.0;
        const double dq = qa - qb;
        const double dp = B->p_clean - A->p_clean;
        if (dq > 0.0) {
          const double lo = dp / dq;  // c >= lo
          if (lo > c_lower) {
            c_lower = lo;
            wit_lower = describe(*A) + " beats " + describe(*B);
            if (c_lower > c_upper) {
              conflict_a = A;
              conflict_b = B;
            }
          }
        } else if (dq < 0.0) {
          const double hi = dp / dq;  // c <= hi
          if (hi < c_upper) {
            c_upper = hi;
            wit_upper = describe(*A) + " beats " + describe(*B);
            if (c_lower > c_upper) {
              conflict_a = A;
              conflict_b = B;
            }
          }
        }
        // dq == 0: no information about c.
      }
    }
    if (c_lower > c_upper) {
      throw InconsistentTable(
          "price_bounds: empty intersection at sigma=" + std::to_string(sigma),
          conflict_a ? describe(*conflict_a) : "",
          conflict_b ? describe(*conflict_b) : "");
    }

    PricingBound b;
    b.sigma = sigma;
    // Reported on 1/c: c <= hi gives 1/c >= 1/hi, c >= lo gives 1/c <= 1/lo.
    // "A noisy sample is never worth more than a clean one" pins the a priori
    // lower end at 1; a pair pushing the upper end below 1 contradicts that
    // and is flagged rather than thrown.
    const double pair_lower = c_upper == kInf ? 0.0 : 1.0 / c_upper;
    b.inv_c_lower = std::max(1.0, pair_lower);
    b.inv_c_upper = c_lower == 0.0 ? kInf : 1.0 / c_lower;
    b.witness_lower = wit_upper;  // pair that capped c bounds 1/c from below
    b.witness_upper = wit_lower;
    b.valid = b.inv_c_upper + 1e-12 >= 1.0;
    bounds.push_back(std::move(b));
  }
  return bounds;
}

}  // namespace amm

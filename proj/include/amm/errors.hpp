#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace amm {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidArgument : Error {
  using Error::Error;
};

/// A size or degree limit was exceeded. `count` reports the offending size.
struct CapacityExceeded : Error {
  long long count = 0;
  explicit CapacityExceeded(const std::string& msg, long long n = 0)
      : Error(msg), count(n) {}
};

/// An iterative solver ran out of iterations. Carries the last iterate and
/// its constraint residual so callers can inspect how close it got.
struct ConvergenceFailure : Error {
  std::vector<double> last_iterate;
  double residual = 0.0;
  ConvergenceFailure(const std::string& msg, std::vector<double> iterate,
                     double res)
      : Error(msg), last_iterate(std::move(iterate)), residual(res) {}
};

struct NumericalDegeneracy : Error {
  using Error::Error;
};

/// Pricing inequalities intersect to an empty interval. Reports the
/// conflicting pair of table rows.
struct InconsistentTable : Error {
  std::string pair_a, pair_b;
  InconsistentTable(const std::string& msg, std::string a, std::string b)
      : Error(msg), pair_a(std::move(a)), pair_b(std::move(b)) {}
};

struct OptimizationDiverged : Error {
  using Error::Error;
};

struct SplitFailure : Error {
  using Error::Error;
};

}  // namespace amm

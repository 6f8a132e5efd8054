#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "amm/types.hpp"

namespace amm {

/// Per-sample sigma template: the first round(p*n) samples are clean, the
/// rest noisy; everything is lifted to `lift_floor` before estimation.
struct SweepProfile {
  double clean_fraction = 0.0;
  double sigma_noisy = 1.0;
  double sigma_clean = 0.0;
  double lift_floor = 1.0;
};

struct SweepSpec {
  AtomicDistribution target;
  int k = 1;
  SweepProfile profile;
  std::vector<long long> n_values;  // positive, ascending
  int trials = 1;
  std::uint64_t seed = 0;
  int net_extra_directions = 64;

  void validate() const;
};

struct SweepRow {
  long long n = 0;
  double p = 0.0;
  double sigma = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  double w1_error = 0.0;  // NaN when the trial errored
  double n_d = 0.0;
  double n_l = 0.0;
  double wall_ms = 0.0;
  std::string error;
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

/// Runs the generate -> lift -> estimate -> score loop for every (n, trial)
/// pair; trial seeds derive from the base seed and a stable hash of
/// (n, trial), so results do not depend on execution order. Component errors
/// are recorded per row and the sweep continues.
SweepResult run_sweep(const SweepSpec& spec);

/// Least-squares fit of log(median w1 per n) against log(n). Requires at
/// least 3 distinct n values with a finite median.
std::pair<double, double> fit_rate(const SweepResult& result);

/// Sweep CSV: "n,p,sigma,trial,seed,w1_error,n_d,n_l,wall_ms,error".
void write_sweep_csv(const SweepResult& result, const std::string& path,
                     bool include_wall_ms = true);
SweepResult read_sweep_csv(const std::string& path);

/// Minimal static log-log SVG chart of median w1 vs n.
void write_sweep_svg(const SweepResult& result, const std::string& path);

SweepSpec parse_sweep_spec(const std::string& json_text,
                           const std::string& base_dir);

}  // namespace amm

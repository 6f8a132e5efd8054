#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "amm/types.hpp"

namespace amm {

/// Diagnostics accompanying an estimate; serialized to the report JSON.
struct EstimateReport {
  MatrixXd subspace;                   // d x k basis used for projection
  std::vector<double> w1_residuals;    // per net direction, final candidate
  std::vector<double> moment_residuals;  // per net direction, ||raw - projected||
  double n_d = 0.0;                    // effective size, dimensionality reduction
  double n_l = 0.0;                    // effective size, low-dim estimation
  double precondition_ratio = 0.0;     // reported, never enforced
  int buckets = 1;
  bool bucket_fallback = false;
  double interval_lo = 0.0, interval_hi = 0.0;
};

struct EstimateResult {
  AtomicDistribution dist;
  EstimateReport report;
};

/// One-dimensional denoised method of moments: weighted moment estimation,
/// projection onto the moment space of [a, b], then Gauss quadrature. Data
/// is affinely rescaled to [-1, 1] internally. Requires all sigma > 0 and
/// n >= 2k-1.
AtomicDistribution ddm_1d(const std::vector<double>& xs,
                          const std::vector<double>& sigmas, int k,
                          std::pair<double, double> interval);
AtomicDistribution ddm_1d(const std::vector<std::pair<double, double>>& data_1d,
                          int k, std::pair<double, double> interval);

struct Ddm1dResult {
  AtomicDistribution dist;
  double moment_residual = 0.0;  // ||raw - projected||_2 in rescaled coords
};
Ddm1dResult ddm_1d_ex(const std::vector<double>& xs,
                      const std::vector<double>& sigmas, int k,
                      std::pair<double, double> interval);

/// Assigns items, in input order, to the currently lightest of m buckets
/// (ties to the lowest index). When max_i w_i <= sum(w)/(4m), every bucket
/// ends up with total >= sum(w)/(2m).
Partition greedy_partition(const std::vector<double>& weights, int m);

/// Per-direction 1D estimates with median-of-means robustness: samples are
/// partitioned into m mass-balanced buckets by their moment weights, a DDM
/// estimate is run per (direction, bucket), and per direction the bucket
/// estimate minimizing the 60th percentile of its W1 distances to the other
/// bucket estimates is selected.
struct DirectionEstimates {
  std::vector<AtomicDistribution> estimates;      // one per net direction
  std::vector<double> moment_residuals;           // selected bucket, per direction
  double precondition_ratio = 0.0;
  int buckets = 1;
  bool fallback = false;
};
DirectionEstimates robust_direction_estimates(const HeteroDataset& data,
                                              const EstimatorConfig& config,
                                              const SphereNet& net,
                                              std::pair<double, double> interval);

/// Exhaustive low-dimensional search (data dimension must equal k): builds
/// the candidate atom grid from per-axis estimates and a simplex net over
/// weights, and returns the candidate minimizing the worst-case W1 to the
/// per-direction estimates over the net.
EstimateResult low_dim_estimate(const HeteroDataset& data,
                                const EstimatorConfig& config,
                                std::pair<double, double> interval);

/// Noise-debiased weighted second-moment matrix with alpha_i proportional
/// to 1/sigma_i^4: Sigma = sum alpha_i x_i x_i^T - (sum alpha_i sigma_i^2) I.
WeightedCovariance weighted_covariance(const HeteroDataset& data);

/// Orthonormal eigenvectors for the k algebraically largest eigenvalues.
Subspace top_k_subspace(const WeightedCovariance& cov, int k);

/// Full high-dimensional pipeline: random split, subspace from split one,
/// low-dimensional search on projected split two, atoms lifted back to R^d.
EstimateResult estimate_hd(
    const HeteroDataset& data, const EstimatorConfig& config,
    std::optional<std::pair<double, double>> interval = std::nullopt);

/// Symmetric interval [-R, R] chosen from projected data: the larger of a
/// tail-percentile rule and a denoised second-moment rule, padded by 20%.
std::pair<double, double> auto_interval(const HeteroDataset& data);

/// Enumerates the simplex net with the given step: weight vectors with
/// entries that are multiples of 1/ceil(1/step).
std::vector<VectorXd> simplex_net(int k, double step);

}  // namespace amm

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "amm/errors.hpp"

namespace amm {

/// Row-major matrix: datasets store one sample per row so rows are
/// contiguous for the kernels.
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                             Eigen::RowMajor>;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// A k-atomic distribution: k points in R^d with simplex weights.
struct AtomicDistribution {
  int dim = 1;
  RowMat atoms;      // k x dim, one atom per row
  VectorXd weights;  // k, nonnegative, sums to 1

  int k() const { return static_cast<int>(atoms.rows()); }
  Eigen::RowVectorXd atom(int i) const { return atoms.row(i); }

  /// Largest atom norm (the support radius R).
  double radius() const {
    double r = 0.0;
    for (int i = 0; i < atoms.rows(); ++i) r = std::max(r, atoms.row(i).norm());
    return r;
  }

  /// Throws InvalidArgument when an invariant is violated: weights
  /// nonnegative summing to 1 within 1e-12, finite coordinates, k >= 1.
  void validate() const;

  static AtomicDistribution point_mass(const VectorXd& mu);
  /// Convenience for 1D distributions from (atom, weight) lists.
  static AtomicDistribution from_1d(const std::vector<double>& atoms,
                                    const std::vector<double>& weights);
};

struct NoisySample {
  VectorXd value;
  double sigma = 0.0;
};

/// Samples with per-sample noise levels sigma_i >= 0.
struct HeteroDataset {
  RowMat points;   // n x dim
  VectorXd sigmas; // n

  int n() const { return static_cast<int>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }
  NoisySample sample(int i) const {
    return {points.row(i).transpose(), sigmas(i)};
  }
  void validate() const;
};

/// A finite set of unit directions; the first `dim` rows are the canonical
/// basis. Desk-scale stand-in for a sphere net.
struct SphereNet {
  RowMat directions;  // m x dim, unit rows

  int size() const { return static_cast<int>(directions.rows()); }
  int dim() const { return static_cast<int>(directions.cols()); }
  void validate() const;
};

/// Estimated or exact raw moments m_1..m_L of a 1D distribution.
struct MomentVector {
  std::vector<double> values;  // values[r-1] = m_r

  int order() const { return static_cast<int>(values.size()); }
  void validate() const;
};

/// Normalized inverse-power weights alpha_i = (1/sigma_i^q) / sum_j (1/sigma_j^q).
struct WeightScheme {
  VectorXd alphas;
  int exponent = 0;
};

/// Assignment of n items to m buckets.
struct Partition {
  std::vector<int> assignment;
  int buckets = 0;
};

/// Orthonormal basis of a k-dimensional subspace of R^d (columns).
struct Subspace {
  MatrixXd basis;  // d x k

  int ambient_dim() const { return static_cast<int>(basis.rows()); }
  int dim() const { return static_cast<int>(basis.cols()); }
  /// Coordinates of `point` in the subspace basis.
  VectorXd project(const VectorXd& point) const {
    return basis.transpose() * point;
  }
  /// Embeds subspace coordinates back into R^d.
  VectorXd lift(const VectorXd& coords) const { return basis * coords; }
  void validate() const;
};

/// Noise-debiased second-moment matrix and the weighted noise level used to
/// debias it.
struct WeightedCovariance {
  MatrixXd matrix;          // d x d, symmetric
  double sigma_bar_sq = 0;  // weighted mean of sigma_i^2
};

struct EstimatorConfig {
  int k = 1;
  double delta = 0.25;           // target failure probability, in (0, 1/2)
  int net_extra_directions = 64;
  double mom_constant = 4.0;     // bucket count m = ceil(c*(log(1/delta)+k log k))
  double weight_net_step = 0.05;
  long long candidate_cap = 1000000;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Variance-exploding schedule sigma(t) = t on [0, T], with a descending
/// sigma grid for sampling. The grid's last entry may be 0 (exact denoise).
struct NoiseSchedule {
  double T = 1.0;
  std::vector<double> grid;  // descending sigma values; grid.front() == T

  double sigma_of(double t) const { return t; }
  void validate() const;

  /// T = 8 * radius, geometric grid of `steps` values down to sigma_min,
  /// then a final 0 entry.
  static NoiseSchedule make_default(double radius, int steps = 128,
                                    double sigma_min = 1e-3);
};

/// Nature noise level t_n; under sigma(t) = t the time equals the level.
struct AmbientConfig {
  double sigma_tn = 0.0;
  double t_n = 0.0;

  static AmbientConfig at(double sigma_tn) { return {sigma_tn, sigma_tn}; }
};

/// Denoiser h(x, t): predicts the clean point from a noisy one at time t.
struct DenoiserOracle {
  std::function<VectorXd(const VectorXd&, double)> fn;
  bool analytic = false;

  VectorXd operator()(const VectorXd& x, double t) const { return fn(x, t); }
};

}  // namespace amm

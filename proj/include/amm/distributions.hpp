#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "amm/types.hpp"

namespace amm {

/// Draws one sample per entry of `sigmas`: pick atom j with probability w_j,
/// then add N(0, sigma_i^2 I) noise. Deterministic given the seed.
HeteroDataset sample_mixture(const AtomicDistribution& dist,
                             const std::vector<double>& sigmas,
                             std::uint64_t seed);

/// Adds Gaussian noise of std sqrt(floor^2 - sigma_i^2) to every sample with
/// sigma_i < floor and sets its sigma to floor; other samples pass through
/// untouched.
HeteroDataset lift_noise(const HeteroDataset& data, double sigma_floor,
                         std::uint64_t seed);

/// Exact W1 between two 1D atomic distributions via the sorted quantile
/// coupling (equivalently the CDF-difference integral).
double wasserstein1_1d(const AtomicDistribution& a,
                       const AtomicDistribution& b);

/// Projection of the atoms onto a direction, weights unchanged.
AtomicDistribution project_1d(const AtomicDistribution& dist,
                              const Eigen::Ref<const VectorXd>& direction);

/// Exact W1 between atomic distributions in any dimension, solved as a
/// small transportation problem. Throws CapacityExceeded when
/// k_a * k_b exceeds `support_cap`.
double wasserstein1(const AtomicDistribution& a, const AtomicDistribution& b,
                    int support_cap = 400);

/// Canonical basis e_1..e_d followed by `extra_directions` random unit
/// vectors. Deterministic given the seed.
SphereNet sphere_net(int dim, int extra_directions, std::uint64_t seed);

/// (lower, upper) sandwich for W1(a, b) from 1D projections onto the net:
/// lower = sup_v W1(a_v, b_v), upper = 16 k^2 sqrt(d) * lower.
std::pair<double, double> sliced_w1_bounds(const AtomicDistribution& a,
                                           const AtomicDistribution& b,
                                           const SphereNet& net, int k);

}  // namespace amm

#pragma once

#include <optional>
#include <utility>

#include "amm/types.hpp"

namespace amm {

/// Exact raw moments m_1..m_L of a 1D atomic distribution.
MomentVector moments_of(const AtomicDistribution& dist, int L);

/// Nearest (Euclidean) valid moment vector of a distribution supported on
/// [a, b]. The feasible set is the classical Hankel characterization for odd
/// order L: M_{0,r} PSD for even r and b*M_{0,r-1} >= M_{1,r} >= a*M_{0,r-1}
/// for odd r, with m_0 = 1 fixed.
///
/// Feasible inputs are returned unchanged (exact fixed point). Infeasible
/// inputs are projected with an interior-point solve whose output is
/// strictly feasible and whose objective is within ~1e-6 of optimal.
MomentVector project_to_moment_space(const MomentVector& m,
                                     std::pair<double, double> interval);

/// True when `m` satisfies the Hankel constraints for [a, b] within `tol`.
bool moments_feasible(const MomentVector& m, std::pair<double, double> interval,
                      double tol = 1e-12);

/// Recovers the k-atomic distribution matching a valid moment vector of
/// order 2k-1: atoms are the roots of the Hankel-determinant polynomial,
/// weights solve the Vandermonde system. Rank-deficient moment matrices
/// yield the smaller-support distribution. Roots are clipped to `interval`
/// when one is given.
AtomicDistribution gauss_quadrature(
    const MomentVector& m, int k,
    std::optional<std::pair<double, double>> interval = std::nullopt);

}  // namespace amm

#pragma once

#include <utility>
#include <vector>

#include "amm/types.hpp"

namespace amm {

/// Largest supported polynomial degree; factorial-ratio coefficients stay
/// well inside double range up to here.
inline constexpr int kDefaultDegreeCap = 40;

/// Probabilists' Hermite polynomial H_r(x), evaluated by the three-term
/// recurrence H_{r+1} = x H_r - r H_{r-1}. E[H_r(N(mu,1))] = mu^r.
double hermite(int r, double x, int max_degree = kDefaultDegreeCap);

/// Noise-adjusted polynomial g_{r,sigma}(x) = sigma^r H_r(x/sigma), evaluated
/// in coefficient form so sigma = 0 gives exactly x^r. Unbiased for the r-th
/// raw moment under convolution with N(0, sigma^2).
double gamma_poly(int r, double sigma, double x,
                  int max_degree = kDefaultDegreeCap);

/// Row r of the coefficient table: g_{r,sigma}(x) = sum_j c[j] sigma^(2j)
/// x^(r-2j), c[j] = r! (-1/2)^j / (j! (r-2j)!).
const std::vector<double>& gamma_coefficients(int r,
                                              int max_degree = kDefaultDegreeCap);

/// alpha_i proportional to 1/sigma_i^q, normalized to sum to 1. Computed on
/// ratios sigma_min/sigma_i so large exponents cannot overflow.
WeightScheme weight_scheme(const std::vector<double>& sigmas, int q);

/// Variance-optimal unbiased estimates of m_1..m_{2k-1} from 1D samples with
/// per-sample noise levels: m_r = sum_i alpha_i g_{r,sigma_i}(x_i) with
/// alpha from weight_scheme(sigmas, 4k-2).
MomentVector weighted_moments(const std::vector<std::pair<double, double>>& data_1d,
                              int k);

/// Same estimator on pre-split arrays (the hot path used by the estimators).
MomentVector weighted_moments(const std::vector<double>& xs,
                              const std::vector<double>& sigmas, int k);

/// Diagnostic ceiling (c_var * (M + sigma sqrt(r)))^(2r) on Var(g_{r,sigma}).
double moment_variance_bound(int r, double sigma, double M, double c_var = 3.0);

}  // namespace amm

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "amm/types.hpp"

namespace amm {

/// Exact optimal denoiser for dist * N(0, sigma^2 I): the posterior-weighted
/// atom average, with log-sum-exp stabilization. At sigma = 0 it returns the
/// weighted average of the nearest atoms (exact ties share by weight).
VectorXd gmm_posterior_mean(const AtomicDistribution& dist, double sigma,
                            const VectorXd& x);

/// The denoiser h(x, t) = gmm_posterior_mean(dist, sigma(t), x).
DenoiserOracle make_analytic_denoiser(const AtomicDistribution& dist,
                                      const NoiseSchedule& schedule);

/// Analytic E[X_tn | X_t = x] for the chain X_0 -> X_tn -> X_t; the exact
/// input for the noise-elevation identity.
DenoiserOracle make_partial_denoiser(const AtomicDistribution& dist,
                                     double sigma_tn,
                                     const NoiseSchedule& schedule);

/// Elevates a partial denoiser to the full one:
/// sigma_t^2/(sigma_t^2 - sigma_tn^2) * h_tn(x, t) -
/// sigma_tn^2/(sigma_t^2 - sigma_tn^2) * x. Requires sigma_t > sigma_tn.
VectorXd tweedie_elevated(const DenoiserOracle& h_tn, double sigma_t,
                          double sigma_tn, const VectorXd& x);

/// Monte-Carlo denoising score-matching loss:
/// E_{x0} E_{t~U[0,T]} E_{x_t|x0} ||h(x_t,t) - x0||^2. Deterministic per seed.
double dsm_loss(const DenoiserOracle& h, const AtomicDistribution& dist,
                const NoiseSchedule& schedule, int mc_draws,
                std::uint64_t seed);

/// Monte-Carlo ambient score-matching loss over samples observed at the
/// nature noise level: E ||((s_t^2-s_n^2)/s_t^2) h(x_t,t) + (s_n^2/s_t^2) x_t
/// - x_tn||^2 with t ~ U(t_n, T], x_t = x_tn + sqrt(s_t^2-s_n^2) z.
double ambient_dsm_loss(const DenoiserOracle& h, const HeteroDataset& noisy,
                        const AmbientConfig& cfg, const NoiseSchedule& schedule,
                        int mc_draws, std::uint64_t seed);

/// Per-batch training loss over the union of a clean and a noisy set: clean
/// samples contribute the plain DSM term with t ~ U(0,T), noisy samples the
/// ambient term with t ~ U(t_n, T]; returns the batch mean.
double mixed_loss(const DenoiserOracle& h, const HeteroDataset& clean,
                  const HeteroDataset& noisy, const AmbientConfig& cfg,
                  const NoiseSchedule& schedule, int batch, std::uint64_t seed);

/// Euler discretization of the reverse update down the schedule grid:
/// x_{t-1} = x_t - ((s_t - s_{t-1})/s_t)(x_t - h(x_t, t)), initialized at
/// N(0, s_T^2 I).
VectorXd ode_sample(const DenoiserOracle& h, int dim,
                    const NoiseSchedule& schedule, std::uint64_t seed);

/// Same walk, but returns h(x_t, t) the first time the next grid level drops
/// below the nature noise level.
VectorXd truncated_sample(const DenoiserOracle& h, int dim,
                          const NoiseSchedule& schedule,
                          const AmbientConfig& cfg, std::uint64_t seed);

struct FitOptions {
  int iters = 200;
  double step_size = 0.1;
  int mc_per_iter = 128;
  double fd_step = 1e-4;
};

struct FitResult {
  AtomicDistribution dist;
  std::vector<double> loss_trace;
};

/// Fits a k-atomic distribution by gradient descent on the mixed loss, with
/// the denoiser parameterized as the analytic posterior mean of the
/// candidate (atoms free, weights through a softmax). Gradients are central
/// finite differences with common random numbers per iteration.
FitResult fit_atoms_by_ambient_dsm(
    const HeteroDataset& clean, const HeteroDataset& noisy, int k,
    const AmbientConfig& cfg, const NoiseSchedule& schedule,
    const FitOptions& opt, std::uint64_t seed,
    std::optional<AtomicDistribution> init = std::nullopt);

}  // namespace amm

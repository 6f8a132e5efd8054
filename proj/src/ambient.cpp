#include "amm/ambient.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "amm/rng.hpp"

namespace amm {

namespace {

// Inverse-CDF pick over a cumulative weight array (last entry forced to 1).
int pick_index(const std::vector<double>& cdf, double u) {
  const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
  return std::min<int>(static_cast<int>(it - cdf.begin()),
                       static_cast<int>(cdf.size()) - 1);
}

std::vector<double> make_cdf(const VectorXd& weights) {
  std::vector<double> cdf(weights.size());
  double acc = 0.0;
  for (int i = 0; i < weights.size(); ++i) {
    acc += weights(i);
    cdf[i] = acc;
  }
  if (!cdf.empty()) cdf.back() = 1.0;
  return cdf;
}

std::vector<double> uniform_cdf(int n) {
  return make_cdf(VectorXd::Constant(n, 1.0 / n));
}

VectorXd gaussian_vector(Rng& rng, int dim) {
  VectorXd z(dim);
  for (int c = 0; c < dim; ++c) z(c) = rng.next_gaussian();
  return z;
}

// One clean-sample DSM term: t ~ U[0,T), x_t = x0 + sigma(t) z.
double dsm_term(const DenoiserOracle& h, const VectorXd& x0,
                const NoiseSchedule& schedule, Rng& rng) {
  const double t = rng.next_double() * schedule.T;
  const VectorXd xt = x0 + schedule.sigma_of(t) * gaussian_vector(rng, static_cast<int>(x0.size()));
  return (h(xt, t) - x0).squaredNorm();
}

// One noisy-sample ambient term: t ~ U(t_n, T].
double ambient_term(const DenoiserOracle& h, const VectorXd& xtn,
                    const AmbientConfig& cfg, const NoiseSchedule& schedule,
                    Rng& rng) {
  const double t = cfg.t_n + rng.next_double_open() * (schedule.T - cfg.t_n);
  const double st = schedule.sigma_of(t);
  const double sn = cfg.sigma_tn;
  const double gap2 = st * st - sn * sn;
  const VectorXd xt =
      xtn + std::sqrt(std::max(gap2, 0.0)) *
                gaussian_vector(rng, static_cast<int>(xtn.size()));
  const VectorXd pred =
      (gap2 / (st * st)) * h(xt, t) + (sn * sn / (st * st)) * xt;
  return (pred - xtn).squaredNorm();
}

void require_sigma_equal(const HeteroDataset& data, double sigma,
                         const char* who) {
  for (int i = 0; i < data.n(); ++i)
    if (std::abs(data.sigmas(i) - sigma) > 1e-12)
      throw InvalidArgument(std::string(who) +
                            ": sample sigma does not match the config level");
}

}  // namespace

VectorXd gmm_posterior_mean(const AtomicDistribution& dist, double sigma,
                            const VectorXd& x) {
  if (x.size() != dist.dim)
    throw InvalidArgument("gmm_posterior_mean: dimension mismatch");
  const int k = dist.k();

  if (sigma <= 0.0) {
    // Zero-noise limit: weighted average of the nearest atoms.
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < k; ++i) {
      if (dist.weights(i) <= 0.0) continue;
      best = std::min(best, (x - dist.atoms.row(i).transpose()).squaredNorm());
    }
    VectorXd num = VectorXd::Zero(dist.dim);
    double den = 0.0;
    for (int i = 0; i < k; ++i) {
      if (dist.weights(i) <= 0.0) continue;
      if ((x - dist.atoms.row(i).transpose()).squaredNorm() == best) {
        num += dist.weights(i) * dist.atoms.row(i).transpose();
        den += dist.weights(i);
      }
    }
    return num / den;
  }

  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  VectorXd logits(k);
  double lmax = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < k; ++i) {
    if (dist.weights(i) <= 0.0) {
      logits(i) = -std::numeric_limits<double>::infinity();
      continue;
    }
    logits(i) = std::log(dist.weights(i)) -
                (x - dist.atoms.row(i).transpose()).squaredNorm() * inv2s2;
    lmax = std::max(lmax, logits(i));
  }
  VectorXd num = VectorXd::Zero(dist.dim);
  double den = 0.0;
  for (int i = 0; i < k; ++i) {
    if (!std::isfinite(logits(i))) continue;
    const double w = std::exp(logits(i) - lmax);
    num += w * dist.atoms.row(i).transpose();
    den += w;
  }
  return num / den;
}

DenoiserOracle make_analytic_denoiser(const AtomicDistribution& dist,
                                      const NoiseSchedule& schedule) {
  DenoiserOracle h;
  h.analytic = true;
  h.fn = [dist, schedule](const VectorXd& x, double t) {
    return gmm_posterior_mean(dist, schedule.sigma_of(t), x);
  };
  return h;
}

DenoiserOracle make_partial_denoiser(const AtomicDistribution& dist,
                                     double sigma_tn,
                                     const NoiseSchedule& schedule) {
  DenoiserOracle h;
  h.analytic = true;
  h.fn = [dist, sigma_tn, schedule](const VectorXd& x, double t) -> VectorXd {
    const double st = schedule.sigma_of(t);
    const double lam = sigma_tn * sigma_tn / (st * st);
    return (1.0 - lam) * gmm_posterior_mean(dist, st, x) + lam * x;
  };
  return h;
}

VectorXd tweedie_elevated(const DenoiserOracle& h_tn, double sigma_t,
                          double sigma_tn, const VectorXd& x) {
  if (!(sigma_t > sigma_tn) || !(sigma_tn >= 0.0))
    throw InvalidArgument("tweedie_elevated: need sigma_t > sigma_tn >= 0");
  const double denom = sigma_t * sigma_t - sigma_tn * sigma_tn;
  return (sigma_t * sigma_t / denom) * h_tn(x, sigma_t) -
         (sigma_tn * sigma_tn / denom) * x;
}

double dsm_loss(const DenoiserOracle& h, const AtomicDistribution& dist,
                const NoiseSchedule& schedule, int mc_draws,
                std::uint64_t seed) {
  dist.validate();
  schedule.validate();
  if (mc_draws < 1) throw InvalidArgument("dsm_loss: mc_draws must be >= 1");
  const std::vector<double> cdf = make_cdf(dist.weights);
  Rng base(seed);
  double total = 0.0;
  for (int i = 0; i < mc_draws; ++i) {
    Rng sub = base.fork(static_cast<std::uint64_t>(i));
    const int atom = pick_index(cdf, sub.next_double());
    total += dsm_term(h, dist.atoms.row(atom).transpose(), schedule, sub);
  }
  return total / mc_draws;
}

double ambient_dsm_loss(const DenoiserOracle& h, const HeteroDataset& noisy,
                        const AmbientConfig& cfg, const NoiseSchedule& schedule,
                        int mc_draws, std::uint64_t seed) {
  noisy.validate();
  schedule.validate();
  if (mc_draws < 1)
    throw InvalidArgument("ambient_dsm_loss: mc_draws must be >= 1");
  if (!(schedule.T > cfg.t_n))
    throw InvalidArgument("ambient_dsm_loss: schedule must cover (t_n, T]");
  require_sigma_equal(noisy, cfg.sigma_tn, "ambient_dsm_loss");
  const std::vector<double> cdf = uniform_cdf(noisy.n());
  Rng base(seed);
  double total = 0.0;
  for (int i = 0; i < mc_draws; ++i) {
    Rng sub = base.fork(static_cast<std::uint64_t>(i));
    const int idx = pick_index(cdf, sub.next_double());
    total += ambient_term(h, noisy.points.row(idx).transpose(), cfg, schedule,
                          sub);
  }
  return total / mc_draws;
}

double mixed_loss(const DenoiserOracle& h, const HeteroDataset& clean,
                  const HeteroDataset& noisy, const AmbientConfig& cfg,
                  const NoiseSchedule& schedule, int batch,
                  std::uint64_t seed) {
  schedule.validate();
  if (batch < 1) throw InvalidArgument("mixed_loss: batch must be >= 1");
  const int nc = clean.points.rows() > 0 ? clean.n() : 0;
  const int nn = noisy.points.rows() > 0 ? noisy.n() : 0;
  if (nc + nn == 0) throw InvalidArgument("mixed_loss: both sets empty");
  for (int i = 0; i < nc; ++i)
    if (clean.sigmas(i) != 0.0)
      throw InvalidArgument("mixed_loss: clean set must have sigma = 0");
  if (nn > 0) require_sigma_equal(noisy, cfg.sigma_tn, "mixed_loss");

  const std::vector<double> cdf = uniform_cdf(nc + nn);
  Rng base(seed);
  double total = 0.0;
  for (int i = 0; i < batch; ++i) {
    Rng sub = base.fork(static_cast<std::uint64_t>(i));
    const int idx = pick_index(cdf, sub.next_double());
    if (idx < nc) {
      total += dsm_term(h, clean.points.row(idx).transpose(), schedule, sub);
    } else {
      total += ambient_term(h, noisy.points.row(idx - nc).transpose(), cfg,
                            schedule, sub);
    }
  }
  return total / batch;
}

namespace {

VectorXd reverse_walk(const DenoiserOracle& h, int dim,
                      const NoiseSchedule& schedule, std::uint64_t seed,
                      const double* truncate_below) {
  schedule.validate();
  Rng rng(seed);
  VectorXd x = schedule.grid.front() * gaussian_vector(rng, dim);
  for (std::size_t i = 0; i + 1 < schedule.grid.size(); ++i) {
    const double st = schedule.grid[i];
    const double sprev = schedule.grid[i + 1];
    const VectorXd x0 = h(x, st);  // sigma(t) = t on the grid
    if (truncate_below && sprev < *truncate_below) return x0;
    x = x - ((st - sprev) / st) * (x - x0);
  }
  return x;
}

}  // namespace

VectorXd ode_sample(const DenoiserOracle& h, int dim,
                    const NoiseSchedule& schedule, std::uint64_t seed) {
  return reverse_walk(h, dim, schedule, seed, nullptr);
}

VectorXd truncated_sample(const DenoiserOracle& h, int dim,
                          const NoiseSchedule& schedule,
                          const AmbientConfig& cfg, std::uint64_t seed) {
  return reverse_walk(h, dim, schedule, seed, &cfg.sigma_tn);
}

FitResult fit_atoms_by_ambient_dsm(const HeteroDataset& clean,
                                   const HeteroDataset& noisy, int k,
                                   const AmbientConfig& cfg,
                                   const NoiseSchedule& schedule,
                                   const FitOptions& opt, std::uint64_t seed,
                                   std::optional<AtomicDistribution> init) {
  if (k < 1) throw InvalidArgument("fit_atoms_by_ambient_dsm: k must be >= 1");
  const int nc = clean.points.rows() > 0 ? clean.n() : 0;
  const int nn = noisy.points.rows() > 0 ? noisy.n() : 0;
  if (nc + nn == 0)
    throw InvalidArgument("fit_atoms_by_ambient_dsm: both sets empty");
  const int dim = nc > 0 ? clean.dim() : noisy.dim();

  // Parameters: k*dim atom coordinates followed by k weight logits.
  const int np = k * dim + k;
  VectorXd params(np);
  if (init) {
    init->validate();
    if (init->k() != k || init->dim != dim)
      throw InvalidArgument("fit_atoms_by_ambient_dsm: init shape mismatch");
    for (int i = 0; i < k; ++i)
      for (int c = 0; c < dim; ++c) params(i * dim + c) = init->atoms(i, c);
    for (int i = 0; i < k; ++i)
      params(k * dim + i) = std::log(std::max(init->weights(i), 1e-12));
  } else {
    // Spread random starts at the scale of the data.
    double scale = 0.0;
    int count = 0;
    for (int i = 0; i < nc; ++i, ++count) scale += clean.points.row(i).squaredNorm();
    for (int i = 0; i < nn; ++i, ++count) scale += noisy.points.row(i).squaredNorm();
    scale = std::sqrt(scale / std::max(count, 1));
    Rng rng(hash_combine(seed, 0x696e6974ULL));
    for (int i = 0; i < k * dim; ++i) params(i) = scale * rng.next_gaussian();
    for (int i = 0; i < k; ++i) params(k * dim + i) = 0.0;
  }

  auto to_dist = [&](const VectorXd& p) {
    AtomicDistribution d;
    d.dim = dim;
    d.atoms.resize(k, dim);
    d.weights.resize(k);
    for (int i = 0; i < k; ++i)
      for (int c = 0; c < dim; ++c) d.atoms(i, c) = p(i * dim + c);
    double lmax = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < k; ++i) lmax = std::max(lmax, p(k * dim + i));
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
      d.weights(i) = std::exp(p(k * dim + i) - lmax);
      sum += d.weights(i);
    }
    d.weights /= sum;
    return d;
  };

  auto loss_at = [&](const VectorXd& p, std::uint64_t iter_seed) {
    const AtomicDistribution cand = to_dist(p);
    const DenoiserOracle h = make_analytic_denoiser(cand, schedule);
    return mixed_loss(h, clean, noisy, cfg, schedule, opt.mc_per_iter,
                      iter_seed);
  };

  FitResult result;
  double initial_loss = 0.0;
  for (int iter = 0; iter < opt.iters; ++iter) {
    const std::uint64_t iter_seed = hash_combine(seed, static_cast<std::uint64_t>(iter));
    const double loss = loss_at(params, iter_seed);
    result.loss_trace.push_back(loss);
    if (iter == 0) initial_loss = loss;
    if (loss > 10.0 * initial_loss + 1e-12)
      throw OptimizationDiverged("fit_atoms_by_ambient_dsm: loss diverged");

    // Central differences with common random numbers across evaluations.
    VectorXd grad(np);
    VectorXd probe = params;
    for (int j = 0; j < np; ++j) {
      const double orig = probe(j);
      probe(j) = orig + opt.fd_step;
      const double up = loss_at(probe, iter_seed);
      probe(j) = orig - opt.fd_step;
      const double down = loss_at(probe, iter_seed);
      probe(j) = orig;
      grad(j) = (up - down) / (2.0 * opt.fd_step);
    }
    params -= opt.step_size * grad;
  }

  result.dist = to_dist(params);
  return result;
}

}  // namespace amm

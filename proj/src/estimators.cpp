#include "amm/estimators.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "amm/distributions.hpp"
#include "amm/hermite.hpp"
#include "amm/kernels.hpp"
#include "amm/moments.hpp"
#include "amm/pricing.hpp"
#include "amm/rng.hpp"

namespace amm {

namespace {

constexpr std::uint64_t kNetStream = 0x6e657477ULL;    // low-dim search net
constexpr std::uint64_t kSplitStream = 0x73706c69ULL;  // estimate_hd coin

void require_positive_sigmas(const VectorXd& sigmas, const char* who) {
  for (int i = 0; i < sigmas.size(); ++i)
    if (!(sigmas(i) > 0.0))
      throw InvalidArgument(std::string(who) +
                            ": sigma must be > 0 (lift_noise first)");
}

}  // namespace

Ddm1dResult ddm_1d_ex(const std::vector<double>& xs,
                      const std::vector<double>& sigmas, int k,
                      std::pair<double, double> interval) {
  if (k < 1) throw InvalidArgument("ddm_1d: k must be >= 1");
  if (xs.size() != sigmas.size())
    throw InvalidArgument("ddm_1d: size mismatch");
  if (static_cast<int>(xs.size()) < 2 * k - 1)
    throw InvalidArgument("ddm_1d: need n >= 2k-1");
  const double a = interval.first, b = interval.second;
  if (!(a < b)) throw InvalidArgument("ddm_1d: need a < b");

  // Rescale to [-1, 1]; gamma estimates transform exactly under affine maps
  // of the data when sigmas are scaled alongside.
  const double c = 0.5 * (a + b), s = 0.5 * (b - a);
  std::vector<double> ys(xs.size()), sc(sigmas.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    ys[i] = (xs[i] - c) / s;
    sc[i] = sigmas[i] / s;
  }

  const MomentVector raw = weighted_moments(ys, sc, k);
  const MomentVector proj = project_to_moment_space(raw, {-1.0, 1.0});
  double res = 0.0;
  for (int r = 0; r < raw.order(); ++r) {
    const double d = raw.values[r] - proj.values[r];
    res += d * d;
  }

  AtomicDistribution unit = gauss_quadrature(proj, k, {{-1.0, 1.0}});
  for (int i = 0; i < unit.k(); ++i) unit.atoms(i, 0) = c + s * unit.atoms(i, 0);
  return {std::move(unit), std::sqrt(res)};
}

AtomicDistribution ddm_1d(const std::vector<double>& xs,
                          const std::vector<double>& sigmas, int k,
                          std::pair<double, double> interval) {
  return ddm_1d_ex(xs, sigmas, k, interval).dist;
}

AtomicDistribution ddm_1d(const std::vector<std::pair<double, double>>& data_1d,
                          int k, std::pair<double, double> interval) {
  std::vector<double> xs(data_1d.size()), sigmas(data_1d.size());
  for (std::size_t i = 0; i < data_1d.size(); ++i) {
    xs[i] = data_1d[i].first;
    sigmas[i] = data_1d[i].second;
  }
  return ddm_1d(xs, sigmas, k, interval);
}

Partition greedy_partition(const std::vector<double>& weights, int m) {
  if (m < 1) throw InvalidArgument("greedy_partition: m must be >= 1");
  for (double w : weights)
    if (!(w >= 0.0)) throw InvalidArgument("greedy_partition: negative weight");
  Partition p;
  p.buckets = m;
  p.assignment.resize(weights.size());
  std::vector<double> sums(m, 0.0);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    int best = 0;
    for (int j = 1; j < m; ++j)
      if (sums[j] < sums[best]) best = j;
    p.assignment[i] = best;
    sums[best] += weights[i];
  }
  return p;
}

DirectionEstimates robust_direction_estimates(
    const HeteroDataset& data, const EstimatorConfig& config,
    const SphereNet& net, std::pair<double, double> interval) {
  data.validate();
  config.validate();
  require_positive_sigmas(data.sigmas, "robust_direction_estimates");
  if (net.dim() != data.dim())
    throw InvalidArgument("robust_direction_estimates: net dim mismatch");

  const int n = data.n();
  const int k = config.k;
  const int q = 4 * k - 2;

  // Moment weights, normalized by sigma_min so large exponents stay in range.
  double smin = data.sigmas.minCoeff();
  std::vector<double> w(n);
  double wsum = 0.0, wmax = 0.0;
  for (int i = 0; i < n; ++i) {
    w[i] = std::pow(smin / data.sigmas(i), q);
    wsum += w[i];
    wmax = std::max(wmax, w[i]);
  }
  const double log_term =
      std::log(1.0 / config.delta) + k * std::log(std::max(1.0, double(k)));

  DirectionEstimates out;
  out.precondition_ratio = wmax * std::max(log_term, 1e-12) / wsum;

  int m = static_cast<int>(std::ceil(config.mom_constant * log_term));
  m = std::max(m, 1);
  if (m > n) {
    m = 1;
    out.fallback = true;
  }
  out.buckets = m;

  const Partition part = greedy_partition(w, m);
  std::vector<std::vector<int>> bucket_idx(m);
  for (int i = 0; i < n; ++i) bucket_idx[part.assignment[i]].push_back(i);

  std::vector<double> proj(n);
  std::vector<double> bx, bs;
  for (int v = 0; v < net.size(); ++v) {
    kernels::project_points(data.points.data(), n, data.dim(),
                            net.directions.row(v).data(), proj.data());

    std::vector<AtomicDistribution> ests;
    std::vector<double> residuals;
    for (int j = 0; j < m; ++j) {
      const auto& idx = bucket_idx[j];
      if (static_cast<int>(idx.size()) < 2 * k - 1) continue;
      bx.clear();
      bs.clear();
      for (int i : idx) {
        bx.push_back(proj[i]);
        bs.push_back(data.sigmas(i));
      }
      try {
        Ddm1dResult r = ddm_1d_ex(bx, bs, k, interval);
        ests.push_back(std::move(r.dist));
        residuals.push_back(r.moment_residual);
      } catch (const Error&) {
        // Skip degenerate buckets; the selector works over the survivors.
      }
    }
    if (ests.empty())
      throw ConvergenceFailure(
          "robust_direction_estimates: every bucket failed", {}, 0.0);

    // Metric median-of-means selector: smallest 60th percentile of W1
    // distances to the other bucket estimates.
    const int mm = static_cast<int>(ests.size());
    int best = 0;
    double best_score = std::numeric_limits<double>::infinity();
    for (int j = 0; j < mm; ++j) {
      double score = 0.0;
      if (mm > 1) {
        std::vector<double> dists;
        dists.reserve(mm - 1);
        for (int l = 0; l < mm; ++l)
          if (l != j) dists.push_back(wasserstein1_1d(ests[j], ests[l]));
        std::sort(dists.begin(), dists.end());
        int pos = static_cast<int>(std::ceil(0.6 * (mm - 1))) - 1;
        pos = std::clamp(pos, 0, mm - 2);
        score = dists[pos];
      }
      if (score < best_score) {
        best_score = score;
        best = j;
      }
    }
    out.estimates.push_back(ests[best]);
    out.moment_residuals.push_back(residuals[best]);
  }
  return out;
}

std::vector<VectorXd> simplex_net(int k, double step) {
  if (k < 1) throw InvalidArgument("simplex_net: k must be >= 1");
  if (!(step > 0.0)) throw InvalidArgument("simplex_net: step must be > 0");
  const int N = std::max(1, static_cast<int>(std::ceil(1.0 / step)));
  std::vector<VectorXd> net;
  std::vector<int> counts(k, 0);
  // Enumerate compositions of N into k nonnegative parts.
  std::function<void(int, int)> rec = [&](int pos, int remaining) {
    if (pos == k - 1) {
      counts[pos] = remaining;
      VectorXd v(k);
      for (int i = 0; i < k; ++i) v(i) = static_cast<double>(counts[i]) / N;
      net.push_back(v);
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      counts[pos] = c;
      rec(pos + 1, remaining - c);
    }
  };
  rec(0, N);
  return net;
}

EstimateResult low_dim_estimate(const HeteroDataset& data,
                                const EstimatorConfig& config,
                                std::pair<double, double> interval) {
  data.validate();
  config.validate();
  const int k = config.k;
  if (data.dim() != k)
    throw InvalidArgument("low_dim_estimate: data dimension must equal k");

  const SphereNet net = sphere_net(
      k, config.net_extra_directions, hash_combine(config.seed, kNetStream));
  const DirectionEstimates dir =
      robust_direction_estimates(data, config, net, interval);

  // Candidate atom grid: Cartesian product of per-axis atom estimates.
  std::vector<std::vector<double>> axis_atoms(k);
  for (int j = 0; j < k; ++j) {
    const AtomicDistribution& e = dir.estimates[j];  // axis j = e_j direction
    for (int i = 0; i < e.k(); ++i) axis_atoms[j].push_back(e.atoms(i, 0));
  }
  std::vector<VectorXd> grid;
  {
    std::vector<int> pick(k, 0);
    while (true) {
      VectorXd p(k);
      for (int j = 0; j < k; ++j) p(j) = axis_atoms[j][pick[j]];
      grid.push_back(p);
      int j = k - 1;
      while (j >= 0 &&
             ++pick[j] == static_cast<int>(axis_atoms[j].size())) {
        pick[j] = 0;
        --j;
      }
      if (j < 0) break;
    }
  }

  const double step =
      std::max(config.weight_net_step,
               std::pow(static_cast<double>(data.n()),
                        -1.0 / (4.0 * k - 2.0)));
  const std::vector<VectorXd> wnet = simplex_net(k, step);

  // Count candidates: multisets of k grid points times weight vectors.
  const long long g = static_cast<long long>(grid.size());
  long long combos = 1;
  for (int i = 0; i < k; ++i) combos = combos * (g + i) / (i + 1);
  const long long total = combos * static_cast<long long>(wnet.size());
  if (total > config.candidate_cap)
    throw CapacityExceeded("low_dim_estimate: candidate count exceeds cap",
                           total);

  // Projections of every grid point onto every net direction, computed once.
  MatrixXd grid_proj(grid.size(), net.size());
  for (std::size_t p = 0; p < grid.size(); ++p)
    for (int v = 0; v < net.size(); ++v)
      grid_proj(static_cast<int>(p), v) =
          net.directions.row(v).dot(grid[p].transpose());

  // Enumerate multisets of grid indices.
  std::vector<std::vector<int>> atom_sets;
  {
    std::vector<int> cur(k, 0);
    std::function<void(int, int)> rec = [&](int pos, int lo) {
      if (pos == k) {
        atom_sets.push_back(cur);
        return;
      }
      for (int i = lo; i < static_cast<int>(grid.size()); ++i) {
        cur[pos] = i;
        rec(pos + 1, i);
      }
    };
    rec(0, 0);
  }

  double best_score = std::numeric_limits<double>::infinity();
  int best_set = 0, best_w = 0;
  AtomicDistribution cand;
  cand.dim = 1;
  cand.atoms.resize(k, 1);
  for (std::size_t si = 0; si < atom_sets.size(); ++si) {
    for (std::size_t wi = 0; wi < wnet.size(); ++wi) {
      cand.weights = wnet[wi];
      double score = 0.0;
      for (int v = 0; v < net.size() && score < best_score; ++v) {
        for (int t = 0; t < k; ++t)
          cand.atoms(t, 0) = grid_proj(atom_sets[si][t], v);
        score = std::max(score, wasserstein1_1d(cand, dir.estimates[v]));
      }
      if (score < best_score) {
        best_score = score;
        best_set = static_cast<int>(si);
        best_w = static_cast<int>(wi);
      }
    }
  }

  EstimateResult res;
  res.dist.dim = k;
  // Zero-weight atoms from the simplex net carry no mass; drop them.
  {
    std::vector<int> keep;
    for (int t = 0; t < k; ++t)
      if (wnet[best_w](t) > 0.0) keep.push_back(t);
    res.dist.atoms.resize(static_cast<int>(keep.size()), k);
    res.dist.weights.resize(static_cast<int>(keep.size()));
    for (std::size_t t = 0; t < keep.size(); ++t) {
      res.dist.atoms.row(static_cast<int>(t)) =
          grid[atom_sets[best_set][keep[t]]].transpose();
      res.dist.weights(static_cast<int>(t)) = wnet[best_w](keep[t]);
    }
  }

  res.report.subspace = MatrixXd::Identity(k, k);
  res.report.moment_residuals = dir.moment_residuals;
  res.report.precondition_ratio = dir.precondition_ratio;
  res.report.buckets = dir.buckets;
  res.report.bucket_fallback = dir.fallback;
  res.report.interval_lo = interval.first;
  res.report.interval_hi = interval.second;
  res.report.w1_residuals.resize(net.size());
  for (int v = 0; v < net.size(); ++v) {
    const AtomicDistribution proj1d =
        project_1d(res.dist, net.directions.row(v).transpose());
    res.report.w1_residuals[v] = wasserstein1_1d(proj1d, dir.estimates[v]);
  }
  const EffectiveSampleSizes ess = effective_sample_sizes(
      std::vector<double>(data.sigmas.data(), data.sigmas.data() + data.n()),
      k);
  res.report.n_d = ess.n_d;
  res.report.n_l = ess.n_l;
  return res;
}

WeightedCovariance weighted_covariance(const HeteroDataset& data) {
  data.validate();
  require_positive_sigmas(data.sigmas, "weighted_covariance");
  const int n = data.n(), d = data.dim();
  const double smin = data.sigmas.minCoeff();
  std::vector<double> alpha(n);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    alpha[i] = std::pow(smin / data.sigmas(i), 4);
    sum += alpha[i];
  }
  double sigma_bar_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    alpha[i] /= sum;
    sigma_bar_sq += alpha[i] * data.sigmas(i) * data.sigmas(i);
  }

  std::vector<double> acc(static_cast<std::size_t>(d) * d, 0.0);
  kernels::weighted_outer(data.points.data(), alpha.data(), n, d, acc.data());

  WeightedCovariance cov;
  cov.matrix.resize(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      cov.matrix(i, j) = acc[static_cast<std::size_t>(i) * d + j];
  cov.matrix = 0.5 * (cov.matrix + cov.matrix.transpose()).eval();
  cov.matrix -= sigma_bar_sq * MatrixXd::Identity(d, d);
  cov.sigma_bar_sq = sigma_bar_sq;
  return cov;
}

Subspace top_k_subspace(const WeightedCovariance& cov, int k) {
  const int d = static_cast<int>(cov.matrix.rows());
  if (k < 1 || k > d) throw InvalidArgument("top_k_subspace: need 1 <= k <= d");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(
      0.5 * (cov.matrix + cov.matrix.transpose()));
  Subspace sub;
  sub.basis.resize(d, k);
  // Eigen returns ascending eigenvalues; take the top k, largest first.
  for (int j = 0; j < k; ++j) sub.basis.col(j) = es.eigenvectors().col(d - 1 - j);
  return sub;
}

std::pair<double, double> auto_interval(const HeteroDataset& data) {
  data.validate();
  const int n = data.n(), d = data.dim();
  const double sigma_max = data.sigmas.maxCoeff();

  // Tail-percentile rule on per-axis magnitudes with the noise allowance
  // removed.
  std::vector<double> mags;
  mags.reserve(static_cast<std::size_t>(n) * d);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < d; ++c) mags.push_back(std::abs(data.points(i, c)));
  const std::size_t pos =
      std::min(mags.size() - 1,
               static_cast<std::size_t>(0.995 * static_cast<double>(mags.size())));
  std::nth_element(mags.begin(), mags.begin() + static_cast<long>(pos), mags.end());
  const double p995 = mags[pos];
  const double tail_rule = std::max(p995 - 3.0 * sigma_max, 0.0);

  // Denoised second-moment rule: per-axis E[mu_c^2] estimated by
  // sum alpha_i (x_ic^2 - sigma_i^2); their positive sum estimates E||mu||^2
  // and max|mu| <= 3 sqrt(E||mu||^2) for weights >= 1/9.
  const double smin = data.sigmas.minCoeff();
  double asum = 0.0;
  std::vector<double> alpha(n);
  for (int i = 0; i < n; ++i) {
    alpha[i] = std::pow(smin / data.sigmas(i), 4);
    asum += alpha[i];
  }
  double norm_sq = 0.0;
  for (int c = 0; c < d; ++c) {
    double m2 = 0.0;
    for (int i = 0; i < n; ++i)
      m2 += alpha[i] / asum *
            (data.points(i, c) * data.points(i, c) -
             data.sigmas(i) * data.sigmas(i));
    norm_sq += std::max(m2, 0.0);
  }
  const double moment_rule = 3.0 * std::sqrt(norm_sq);

  const double r = 1.2 * std::max({tail_rule, moment_rule, 1e-3});
  return {-r, r};
}

EstimateResult estimate_hd(const HeteroDataset& data,
                           const EstimatorConfig& config,
                           std::optional<std::pair<double, double>> interval) {
  data.validate();
  config.validate();
  require_positive_sigmas(data.sigmas, "estimate_hd");
  const int n = data.n(), d = data.dim(), k = config.k;
  if (d < k) throw InvalidArgument("estimate_hd: need d >= k");

  // Fair-coin split; retry with a fresh seed when a side comes up empty.
  std::vector<int> side(n);
  bool ok = false;
  for (int attempt = 0; attempt < 3 && !ok; ++attempt) {
    Rng rng(hash_combine(config.seed, kSplitStream + attempt));
    int n1 = 0;
    for (int i = 0; i < n; ++i) {
      side[i] = rng.next_double() < 0.5 ? 0 : 1;
      n1 += side[i] == 0;
    }
    ok = n1 > 0 && n1 < n;
  }
  if (!ok) throw SplitFailure("estimate_hd: could not form nonempty splits");

  HeteroDataset split1, split2;
  {
    int n1 = 0;
    for (int i = 0; i < n; ++i) n1 += side[i] == 0;
    split1.points.resize(n1, d);
    split1.sigmas.resize(n1);
    split2.points.resize(n - n1, d);
    split2.sigmas.resize(n - n1);
    int a = 0, b = 0;
    for (int i = 0; i < n; ++i) {
      if (side[i] == 0) {
        split1.points.row(a) = data.points.row(i);
        split1.sigmas(a++) = data.sigmas(i);
      } else {
        split2.points.row(b) = data.points.row(i);
        split2.sigmas(b++) = data.sigmas(i);
      }
    }
  }

  const WeightedCovariance cov = weighted_covariance(split1);
  const Subspace sub = top_k_subspace(cov, k);

  HeteroDataset low;
  low.points.resize(split2.n(), k);
  low.sigmas = split2.sigmas;
  std::vector<double> col(split2.n());
  for (int c = 0; c < k; ++c) {
    const VectorXd basis_col = sub.basis.col(c);
    kernels::project_points(split2.points.data(), split2.n(), d,
                            basis_col.data(), col.data());
    for (int i = 0; i < split2.n(); ++i) low.points(i, c) = col[i];
  }

  const std::pair<double, double> ival =
      interval ? *interval : auto_interval(low);
  EstimateResult res = low_dim_estimate(low, config, ival);

  // Lift atoms back through the subspace basis.
  RowMat lifted(res.dist.k(), d);
  for (int i = 0; i < res.dist.k(); ++i)
    lifted.row(i) =
        (sub.basis * res.dist.atoms.row(i).transpose()).transpose();
  res.dist.atoms = lifted;
  res.dist.dim = d;

  res.report.subspace = sub.basis;
  const EffectiveSampleSizes ess = effective_sample_sizes(
      std::vector<double>(data.sigmas.data(), data.sigmas.data() + n), k);
  res.report.n_d = ess.n_d;
  res.report.n_l = ess.n_l;
  return res;
}

}  // namespace amm

#include "amm/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "amm/rng.hpp"

namespace amm {

HeteroDataset sample_mixture(const AtomicDistribution& dist,
                             const std::vector<double>& sigmas,
                             std::uint64_t seed) {
  dist.validate();
  if (sigmas.empty()) throw InvalidArgument("sample_mixture: empty sigmas");
  for (double s : sigmas)
    if (!(s >= 0.0)) throw InvalidArgument("sample_mixture: negative sigma");

  const int n = static_cast<int>(sigmas.size());
  const int d = dist.dim;
  const int k = dist.k();

  // Cumulative weights for inverse-CDF atom selection.
  std::vector<double> cdf(k);
  double acc = 0.0;
  for (int j = 0; j < k; ++j) {
    acc += dist.weights(j);
    cdf[j] = acc;
  }
  cdf.back() = 1.0;

  HeteroDataset out;
  out.points.resize(n, d);
  out.sigmas.resize(n);
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    const double u = rng.next_double();
    const int pick = static_cast<int>(
        std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    const int atom = std::min(pick, k - 1);
    const double sigma = sigmas[i];
    for (int c = 0; c < d; ++c)
      out.points(i, c) = dist.atoms(atom, c) + sigma * rng.next_gaussian();
    out.sigmas(i) = sigma;
  }
  return out;
}

HeteroDataset lift_noise(const HeteroDataset& data, double sigma_floor,
                         std::uint64_t seed) {
  if (!(sigma_floor > 0.0))
    throw InvalidArgument("lift_noise: floor must be positive");
  data.validate();

  HeteroDataset out = data;
  Rng rng(seed);
  for (int i = 0; i < data.n(); ++i) {
    const double s = data.sigmas(i);
    if (s >= sigma_floor) continue;
    const double add = std::sqrt(sigma_floor * sigma_floor - s * s);
    Rng sub = rng.fork(static_cast<std::uint64_t>(i));
    for (int c = 0; c < data.dim(); ++c)
      out.points(i, c) += add * sub.next_gaussian();
    out.sigmas(i) = sigma_floor;
  }
  return out;
}

double wasserstein1_1d(const AtomicDistribution& a,
                       const AtomicDistribution& b) {
  if (a.dim != 1 || b.dim != 1)
    throw InvalidArgument("wasserstein1_1d: inputs must be one-dimensional");

  // W1 = integral |F_a - F_b| dx; both CDFs are step functions, so the
  // integral is a sum over gaps between consecutive support points.
  struct Step {
    double x, wa, wb;
  };
  std::vector<Step> steps;
  steps.reserve(a.k() + b.k());
  for (int i = 0; i < a.k(); ++i)
    steps.push_back({a.atoms(i, 0), a.weights(i), 0.0});
  for (int i = 0; i < b.k(); ++i)
    steps.push_back({b.atoms(i, 0), 0.0, b.weights(i)});
  std::sort(steps.begin(), steps.end(),
            [](const Step& l, const Step& r) { return l.x < r.x; });

  double w1 = 0.0, fa = 0.0, fb = 0.0;
  for (std::size_t i = 0; i + 1 < steps.size(); ++i) {
    fa += steps[i].wa;
    fb += steps[i].wb;
    w1 += std::abs(fa - fb) * (steps[i + 1].x - steps[i].x);
  }
  return w1;
}

AtomicDistribution project_1d(const AtomicDistribution& dist,
                              const Eigen::Ref<const VectorXd>& direction) {
  AtomicDistribution out;
  out.dim = 1;
  out.atoms = dist.atoms * direction;
  out.weights = dist.weights;
  return out;
}

namespace {

// Successive shortest paths with node potentials (the AMO formulation) on
// the dense bipartite transport graph. Reduced costs stay nonnegative, so
// Dijkstra applies; on termination the flow is exactly optimal.
double transport_cost(const std::vector<double>& supply,
                      const std::vector<double>& demand,
                      const MatrixXd& cost) {
  const int ns = static_cast<int>(supply.size());
  const int nd = static_cast<int>(demand.size());
  const int nv = ns + nd;  // sources 0..ns-1, sinks ns..nv-1
  const double kInf = std::numeric_limits<double>::infinity();
  const double kEps = 1e-15;

  std::vector<double> rs = supply, rd = demand;
  MatrixXd flow = MatrixXd::Zero(ns, nd);
  std::vector<double> pi(nv, 0.0);

  double total = 0.0;
  const int max_rounds = 64 * nv * nv + 64;
  for (int round = 0; round < max_rounds; ++round) {
    int src = -1;
    for (int i = 0; i < ns; ++i)
      if (rs[i] > kEps) {
        src = i;
        break;
      }
    if (src < 0) return total;

    std::vector<double> dist(nv, kInf);
    std::vector<int> prev(nv, -1);
    std::vector<bool> done(nv, false);
    dist[src] = 0.0;
    for (int it = 0; it < nv; ++it) {
      int u = -1;
      double best = kInf;
      for (int v = 0; v < nv; ++v)
        if (!done[v] && dist[v] < best) {
          best = dist[v];
          u = v;
        }
      if (u < 0) break;
      done[u] = true;
      // Reduced costs are nonnegative up to roundoff; clamping and skipping
      // finalized nodes keeps the prev[] chain acyclic.
      if (u < ns) {
        for (int j = 0; j < nd; ++j) {
          if (done[ns + j]) continue;
          const double rc = std::max(cost(u, j) - pi[u] + pi[ns + j], 0.0);
          if (dist[u] + rc < dist[ns + j]) {
            dist[ns + j] = dist[u] + rc;
            prev[ns + j] = u;
          }
        }
      } else {
        const int j = u - ns;
        for (int i = 0; i < ns; ++i) {
          if (done[i] || flow(i, j) <= kEps) continue;
          const double rc = std::max(-cost(i, j) - pi[u] + pi[i], 0.0);
          if (dist[u] + rc < dist[i]) {
            dist[i] = dist[u] + rc;
            prev[i] = u;
          }
        }
      }
    }

    int sink = -1;
    double dsink = kInf;
    for (int j = 0; j < nd; ++j)
      if (rd[j] > kEps && dist[ns + j] < dsink) {
        dsink = dist[ns + j];
        sink = j;
      }
    if (sink < 0) return total;  // residual mass below tolerance

    for (int v = 0; v < nv; ++v) pi[v] -= std::min(dist[v], dsink);

    double push = std::min(rs[src], rd[sink]);
    for (int v = ns + sink; v != src;) {
      const int u = prev[v];
      if (v < ns) push = std::min(push, flow(v, u - ns));
      v = u;
    }
    for (int v = ns + sink; v != src;) {
      const int u = prev[v];
      if (v >= ns) {
        flow(u, v - ns) += push;
        total += push * cost(u, v - ns);
      } else {
        flow(v, u - ns) -= push;
        total -= push * cost(v, u - ns);
      }
      v = u;
    }
    rs[src] -= push;
    rd[sink] -= push;
  }
  throw ConvergenceFailure("transport_cost: round limit exceeded", {}, 0.0);
}

}  // namespace

double wasserstein1(const AtomicDistribution& a, const AtomicDistribution& b,
                    int support_cap) {
  if (a.dim != b.dim)
    throw InvalidArgument("wasserstein1: dimension mismatch");
  const long long size = static_cast<long long>(a.k()) * b.k();
  if (size > support_cap)
    throw CapacityExceeded("wasserstein1: support product exceeds cap", size);

  MatrixXd cost(a.k(), b.k());
  for (int i = 0; i < a.k(); ++i)
    for (int j = 0; j < b.k(); ++j)
      cost(i, j) = (a.atoms.row(i) - b.atoms.row(j)).norm();

  std::vector<double> supply(a.k()), demand(b.k());
  for (int i = 0; i < a.k(); ++i) supply[i] = a.weights(i);
  for (int j = 0; j < b.k(); ++j) demand[j] = b.weights(j);
  return transport_cost(supply, demand, cost);
}

SphereNet sphere_net(int dim, int extra_directions, std::uint64_t seed) {
  if (dim < 1) throw InvalidArgument("sphere_net: dim must be >= 1");
  if (extra_directions < 0)
    throw InvalidArgument("sphere_net: extra_directions must be >= 0");
  SphereNet net;
  net.directions = RowMat::Zero(dim + extra_directions, dim);
  for (int i = 0; i < dim; ++i) net.directions(i, i) = 1.0;
  Rng rng(seed);
  for (int e = 0; e < extra_directions; ++e) {
    VectorXd v(dim);
    double norm = 0.0;
    do {
      for (int c = 0; c < dim; ++c) v(c) = rng.next_gaussian();
      norm = v.norm();
    } while (norm < 1e-12);
    net.directions.row(dim + e) = (v / norm).transpose();
  }
  return net;
}

std::pair<double, double> sliced_w1_bounds(const AtomicDistribution& a,
                                           const AtomicDistribution& b,
                                           const SphereNet& net, int k) {
  if (a.dim != net.dim() || b.dim != net.dim())
    throw InvalidArgument("sliced_w1_bounds: dimension mismatch with net");
  double lower = 0.0;
  for (int v = 0; v < net.size(); ++v) {
    const VectorXd dir = net.directions.row(v).transpose();
    lower = std::max(lower,
                     wasserstein1_1d(project_1d(a, dir), project_1d(b, dir)));
  }
  const double factor = 16.0 * static_cast<double>(k) * k *
                        std::sqrt(static_cast<double>(a.dim));
  return {lower, factor * lower};
}

}  // namespace amm

// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one pass/fail line per criterion. Exit code is the number of
// failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "amm/ambient.hpp"
#include "amm/distributions.hpp"
#include "amm/estimators.hpp"
#include "amm/moments.hpp"
#include "amm/pricing.hpp"
#include "amm/rng.hpp"
#include "amm/sweep.hpp"
#include "test_util.hpp"

using namespace amm;

namespace {

struct Criterion {
  int id;
  std::string name;
  std::function<bool(std::string&)> run;
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  return m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

AtomicDistribution symmetric_pair_1d(double a) {
  return AtomicDistribution::from_1d({-a, a}, {0.5, 0.5});
}

std::vector<double> col0(const HeteroDataset& d) {
  return std::vector<double>(d.points.data(), d.points.data() + d.n());
}

std::vector<double> sig(const HeteroDataset& d) {
  return std::vector<double>(d.sigmas.data(), d.sigmas.data() + d.n());
}

// ---- criterion 1: noise-elevation identity ----
bool crit_identity(std::string& detail) {
  Rng rng(101);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    Rng sub = rng.fork(t);
    const int dim = 1 + static_cast<int>(sub.next_below(4));
    const int k = 1 + static_cast<int>(sub.next_below(4));
    AtomicDistribution d;
    d.dim = dim;
    d.atoms.resize(k, dim);
    d.weights.resize(k);
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
      for (int c = 0; c < dim; ++c)
        d.atoms(i, c) = 2.0 * sub.next_double() - 1.0;
      d.weights(i) = 0.05 + sub.next_double();
      sum += d.weights(i);
    }
    d.weights /= sum;
    const double sn = 2.0 * sub.next_double();
    const double st = sn + 0.05 + 3.0 * sub.next_double();
    VectorXd x(dim);
    for (int c = 0; c < dim; ++c) x(c) = 3.0 * sub.next_gaussian();

    NoiseSchedule sched;
    sched.T = st + 1.0;
    sched.grid = {sched.T, 0.0};
    const auto h_tn = make_partial_denoiser(d, sn, sched);
    const VectorXd lhs = tweedie_elevated(h_tn, st, sn, x);
    const VectorXd rhs = gmm_posterior_mean(d, st, x);
    worst = std::max(worst, (lhs - rhs).norm() / std::max(1.0, rhs.norm()));
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "max rel err %.3g (tol 1e-9), 200 trials",
                worst);
  detail = buf;
  return worst <= 1e-9;
}

// ---- criterion 2: quadrature round-trip ----
bool crit_roundtrip(std::string& detail) {
  Rng rng(102);
  double worst = 0.0;
  for (int k = 1; k <= 4; ++k) {
    for (int t = 0; t < 100; ++t) {
      const auto d = testutil::random_separated_1d(rng, k, 0.1, 0.05);
      const auto m = moments_of(d, 2 * k - 1);
      const auto rec = gauss_quadrature(m, k, {{-1.0, 1.0}});
      worst = std::max(worst, wasserstein1_1d(d, rec));
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "max W1 %.3g (tol 1e-6), k in {1..4} x 100 mixtures", worst);
  detail = buf;
  return worst <= 1e-6;
}

// ---- criterion 3: moment projection ----
bool crit_projection(std::string& detail) {
  Rng rng(103);
  double worst_drift = 0.0;
  for (int t = 0; t < 50; ++t) {
    const int k = 1 + static_cast<int>(rng.next_below(4));
    const auto d = testutil::random_separated_1d(rng, k, 0.1, 0.05);
    const auto m = moments_of(d, 2 * k - 1);
    const auto p = project_to_moment_space(m, {-1.0, 1.0});
    for (int r = 0; r < m.order(); ++r)
      worst_drift = std::max(worst_drift,
                             std::abs(p.values[r] - m.values[r]));
  }

  double worst_gap = 0.0;
  for (int t = 0; t < 50; ++t) {
    const auto d = testutil::random_separated_1d(rng, 2, 0.15, 0.1);
    auto m = moments_of(d, 3);
    for (auto& v : m.values) v += 0.05 * (2.0 * rng.next_double() - 1.0);
    const auto p = project_to_moment_space(m, {-1.0, 1.0});
    double obj = 0.0;
    for (int r = 0; r < m.order(); ++r)
      obj += (m.values[r] - p.values[r]) * (m.values[r] - p.values[r]);
    obj = std::sqrt(obj);
    worst_gap = std::max(worst_gap,
                         std::abs(obj - testutil::grid_oracle_k2(m.values)));
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "fixed-point drift %.3g (tol 1e-8); oracle gap %.3g (tol "
                "1e-4), 50 trials",
                worst_drift, worst_gap);
  detail = buf;
  return worst_drift <= 1e-8 && worst_gap <= 1e-4;
}

// ---- criterion 4: 1D estimator consistency ----
bool crit_consistency(std::string& detail) {
  const auto truth = symmetric_pair_1d(0.8);
  std::map<long long, double> med;
  for (long long n : {1000LL, 10000LL, 100000LL}) {
    std::vector<double> errs;
    for (int seed = 0; seed < 10; ++seed) {
      const auto data = sample_mixture(
          truth, std::vector<double>(n, 1.0),
          hash_combine(104, hash_combine(n, seed)));
      const auto est = ddm_1d(col0(data), sig(data), 2, auto_interval(data));
      errs.push_back(wasserstein1_1d(truth, est));
    }
    med[n] = median(errs);
  }
  int inversions = 0;
  if (med[10000] > med[1000]) ++inversions;
  if (med[100000] > med[10000]) ++inversions;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "median W1: n=1e3 %.4f, 1e4 %.4f, 1e5 %.4f (tol at 1e5: 0.1); "
                "inversions %d (allowed 1)",
                med[1000], med[10000], med[100000], inversions);
  detail = buf;
  return med[100000] <= 0.1 && inversions <= 1;
}

// ---- criterion 5: rate bracket ----
bool crit_rate(std::string& detail) {
  SweepSpec spec;
  spec.target = symmetric_pair_1d(0.8);
  spec.k = 2;
  spec.profile = {0.0, 1.0, 0.0, 1.0};
  spec.n_values = {1000, 10000, 100000, 1000000};
  spec.trials = 10;
  spec.seed = 105;
  const SweepResult result = run_sweep(spec);
  int failures = 0;
  for (const auto& r : result.rows) failures += !r.error.empty();
  const auto [slope, intercept] = fit_rate(result);
  (void)intercept;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "log-log slope %.4f (bracket [-0.5, -0.097]), %d row errors",
                slope, failures);
  detail = buf;
  return failures == 0 && slope >= -0.5 && slope <= -0.097;
}

// ---- criterion 6: clean-data leverage ----
bool crit_leverage(std::string& detail) {
  const int d = 8, k = 2;
  const long long n = 200000;
  int beats_noisy = 0, beats_clean_only = 0;
  const int trials = 10;
  for (int seed = 0; seed < trials; ++seed) {
    Rng rng(hash_combine(106, seed));
    VectorXd u(d);
    for (int c = 0; c < d; ++c) u(c) = rng.next_gaussian();
    u.normalize();
    AtomicDistribution truth;
    truth.dim = d;
    truth.atoms.resize(2, d);
    truth.atoms.row(0) = (0.8 * u).transpose();
    truth.atoms.row(1) = (-0.8 * u).transpose();
    truth.weights = VectorXd::Constant(2, 0.5);

    EstimatorConfig cfg;
    cfg.k = k;
    cfg.seed = hash_combine(107, seed);

    auto run_config = [&](double clean_frac, double sigma_noisy,
                          long long total) {
      std::vector<double> sigmas(total, sigma_noisy);
      const long long nc = std::llround(clean_frac * double(total));
      for (long long i = 0; i < nc; ++i) sigmas[i] = 0.0;
      HeteroDataset data =
          sample_mixture(truth, sigmas, hash_combine(cfg.seed, 1));
      data = lift_noise(data, 1.0, hash_combine(cfg.seed, 2));
      const auto res = estimate_hd(data, cfg);
      return wasserstein1(truth, res.dist);
    };

    const double w_mixed = run_config(0.1, 3.0, n);
    const double w_noisy = run_config(0.0, 3.0, n);
    const double w_clean_small = run_config(1.0, 0.0, n / 10);
    beats_noisy += w_mixed < w_noisy;
    beats_clean_only += w_mixed < w_clean_small;
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "mixed beats noisy-only %d/10, beats clean-only %d/10 "
                "(need >= 8 both)",
                beats_noisy, beats_clean_only);
  detail = buf;
  return beats_noisy >= 8 && beats_clean_only >= 8;
}

// ---- criterion 7: pricing reproduction ----
struct BoxSpec {
  double sigma;
  std::vector<int> datasets;  // indices into the table list
  double lo, hi;              // printed endpoints
};

bool crit_pricing(std::string& detail) {
  // Verbatim benchmark scores: clean-only rows then mixed rows per noise
  // level, per dataset; the 0%-clean rows fall below the clean-fraction
  // threshold and are ignored by price_bounds.
  auto mk = [](const char* name,
               std::initializer_list<std::pair<double, double>> clean,
               std::initializer_list<std::tuple<double, double, double>> mixed) {
    PricingTable t;
    t.dataset = name;
    for (auto [p, s] : clean) t.rows.push_back({p, std::nullopt, s});
    for (auto [sigma, p, s] : mixed) t.rows.push_back({p, sigma, s});
    return t;
  };

  const PricingTable cifar = mk(
      "cifar",
      {{1.0, 1.99}, {0.9, 2.07}, {0.7, 2.20}, {0.5, 2.40}, {0.3, 3.99}, {0.1, 17.30}},
      {{0.05, 0.9, 2.04}, {0.05, 0.7, 2.04}, {0.05, 0.5, 2.06}, {0.05, 0.3, 2.11}, {0.05, 0.1, 2.17}, {0.05, 0.0, 8.78},
       {0.10, 0.9, 2.06}, {0.10, 0.7, 2.14}, {0.10, 0.5, 2.15}, {0.10, 0.3, 2.24}, {0.10, 0.1, 2.34}, {0.10, 0.0, 25.55},
       {0.20, 0.9, 2.06}, {0.20, 0.7, 2.14}, {0.20, 0.5, 2.24}, {0.20, 0.3, 2.42}, {0.20, 0.1, 2.81}, {0.20, 0.0, 60.73}});
  const PricingTable celeba = mk(
      "celeba",
      {{1.0, 2.40}, {0.9, 2.50}, {0.7, 2.68}, {0.5, 2.83}, {0.3, 3.72}, {0.1, 11.92}},
      {{0.05, 0.9, 2.40}, {0.05, 0.7, 2.45}, {0.05, 0.5, 2.45}, {0.05, 0.3, 2.50}, {0.05, 0.1, 2.50}, {0.05, 0.0, 12.77},
       {0.10, 0.9, 2.40}, {0.10, 0.7, 2.48}, {0.10, 0.5, 2.51}, {0.10, 0.3, 2.51}, {0.10, 0.1, 2.67}, {0.10, 0.0, 45.90},
       {0.20, 0.9, 2.50}, {0.20, 0.7, 2.51}, {0.20, 0.5, 2.52}, {0.20, 0.3, 2.67}, {0.20, 0.1, 2.75}, {0.20, 0.0, 61.14}});
  const PricingTable imagenet = mk(
      "imagenet",
      {{1.0, 1.41}, {0.9, 1.50}, {0.7, 1.65}, {0.5, 2.15}, {0.3, 4.34}, {0.1, 10.57}},
      {{0.05, 0.9, 1.46}, {0.05, 0.7, 1.46}, {0.05, 0.5, 1.46}, {0.05, 0.3, 1.47}, {0.05, 0.1, 1.51}, {0.05, 0.0, 2.40},
       {0.10, 0.9, 1.48}, {0.10, 0.7, 1.48}, {0.10, 0.5, 1.49}, {0.10, 0.3, 1.49}, {0.10, 0.1, 1.57}, {0.10, 0.0, 6.23},
       {0.20, 0.9, 1.50}, {0.20, 0.7, 1.51}, {0.20, 0.5, 1.51}, {0.20, 0.3, 1.59}, {0.20, 0.1, 1.68}, {0.20, 0.0, 18.08}});
  const std::vector<PricingTable> tables = {cifar, celeba, imagenet};

  // Tie tolerance 0.005: differences below the table's printed resolution
  // are ties. The library default of 0.02 would discard the 0.01-level
  // comparisons several published endpoints require.
  const double tie_tol = 0.005;

  // The published intervals, with their dataset groupings.
  const std::vector<BoxSpec> boxes = {
      {0.05, {0, 1}, 7.0 / 6.0, 1.25},
      {0.05, {2}, 1.125, 7.0 / 6.0},
      {0.10, {0, 1}, 1.25, 1.5},
      {0.10, {2}, 1.125, 7.0 / 6.0},
      {0.20, {0, 1, 2}, 1.5, 1.75},
  };

  std::string msg;
  int failed = 0;

  // Worked single-pair example: c_{0.2} <= 6/7.
  {
    PricingTable pairtab;
    pairtab.dataset = "pair";
    pairtab.rows.push_back({0.9, std::nullopt, 2.07});
    pairtab.rows.push_back({0.3, 0.2, 2.42});
    const auto b = price_bounds(pairtab, 0.1, tie_tol);
    const bool ok = b.size() == 1 &&
                    std::abs(b[0].inv_c_lower - 7.0 / 6.0) < 1e-12;
    msg += std::string(ok ? "pair-example ok" : "pair-example FAILED");
    failed += !ok;
  }

  for (const BoxSpec& box : boxes) {
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    bool empty = false;
    std::string group;
    for (int ti : box.datasets) {
      group += tables[ti].dataset[0];
      try {
        for (const auto& b : price_bounds(tables[ti], 0.1, tie_tol)) {
          if (b.sigma != box.sigma) continue;
          lo = std::max(lo, b.inv_c_lower);
          hi = std::min(hi, b.inv_c_upper);
        }
      } catch (const InconsistentTable&) {
        empty = true;
      }
    }
    // Compare at the printed precision (two or three decimals: 0.005 slack).
    const bool ok = !empty && lo <= hi && std::abs(lo - box.lo) <= 0.005 &&
                    std::abs(hi - box.hi) <= 0.005;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "; sigma=%.2f %s: [%.4f,%.4f] vs printed [%.3f,%.3f]%s",
                  box.sigma, group.c_str(), lo, hi, box.lo, box.hi,
                  ok ? ""
                     : (empty || lo > hi ? " INFEASIBLE" : " MISMATCH"));
    msg += buf;
    failed += !ok;
  }
  detail = msg;
  return failed == 0;
}

// ---- criterion 8: partition guarantee ----
bool crit_partition(std::string& detail) {
  Rng rng(108);
  int done = 0;
  double worst_ratio = std::numeric_limits<double>::infinity();
  while (done < 1000) {
    const int m = 1 + static_cast<int>(rng.next_below(8));
    const int n = 8 * m + static_cast<int>(rng.next_below(128));
    std::vector<double> w(n);
    double sum = 0.0;
    for (auto& x : w) {
      x = rng.next_double();
      sum += x;
    }
    const double cap = sum / (4.0 * m);
    bool valid = true;
    for (double x : w)
      if (x > cap) valid = false;
    if (!valid) continue;
    ++done;
    const auto p = greedy_partition(w, m);
    std::vector<double> sums(m, 0.0);
    for (int i = 0; i < n; ++i) sums[p.assignment[i]] += w[i];
    const double target = sum / (2.0 * m);
    for (int j = 0; j < m; ++j)
      worst_ratio = std::min(worst_ratio, sums[j] / target);
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "min bucket/(sum/2m) ratio %.4f over 1000 trials (need >= 1)",
                worst_ratio);
  detail = buf;
  return worst_ratio >= 1.0 - 1e-12;
}

// ---- criterion 9: sampler fidelity ----
bool crit_sampler(std::string& detail) {
  const auto truth = symmetric_pair_1d(1.0);
  const auto sched = NoiseSchedule::make_default(truth.radius(), 128);
  const auto h = make_analytic_denoiser(truth, sched);
  const int n = 10000;

  auto empirical_w1 = [&](bool truncated) {
    AtomicDistribution emp;
    emp.dim = 1;
    emp.atoms.resize(n, 1);
    emp.weights = VectorXd::Constant(n, 1.0 / n);
    for (int i = 0; i < n; ++i) {
      const std::uint64_t s = hash_combine(109, i);
      emp.atoms(i, 0) =
          truncated
              ? truncated_sample(h, 1, sched, AmbientConfig::at(0.2), s)(0)
              : ode_sample(h, 1, sched, s)(0);
    }
    return wasserstein1_1d(emp, truth);
  };

  const double w_full = empirical_w1(false);
  const double w_trunc = empirical_w1(true);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "full-sampling W1 %.4f (tol 0.05); truncated %.4f (tol full "
                "+ 0.05)",
                w_full, w_trunc);
  detail = buf;
  return w_full <= 0.05 && w_trunc <= w_full + 0.05;
}

// ---- criterion 10: effective-sample-size algebra ----
bool crit_ess(std::string& detail) {
  // The two-level identity normalizes by the clean samples' weight, so it
  // presumes a positive clean fraction; the grid starts at p = 0.1.
  double worst = 0.0;
  for (int k : {1, 2, 3, 4}) {
    for (double p : {0.1, 0.25, 0.5, 0.75, 0.9, 1.0}) {
      for (double sigma : {1.0, 1.5, 2.0, 3.0, 5.0, 10.0}) {
        const int n = 1000;
        const int nc = static_cast<int>(std::lround(p * n));
        std::vector<double> sigmas(n, sigma);
        for (int i = 0; i < nc; ++i) sigmas[i] = 1.0;
        const auto ess = effective_sample_sizes(sigmas, k);
        const double pc = double(nc) / n;
        const double expect =
            pc + (1.0 - pc) / std::pow(sigma, 4.0 * k - 2.0);
        worst = std::max(worst, std::abs(ess.n_l / n - expect));
        const double expect_d = pc + (1.0 - pc) / std::pow(sigma, 4.0);
        worst = std::max(worst, std::abs(ess.n_d / n - expect_d));
      }
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "max identity error %.3g (tol 1e-12)",
                worst);
  detail = buf;
  return worst <= 1e-12;
}

}  // namespace

int main() {
  std::vector<Criterion> criteria = {
      {1, "noise-elevation identity", crit_identity},
      {2, "quadrature round-trip", crit_roundtrip},
      {3, "moment projection", crit_projection},
      {4, "1D estimator consistency", crit_consistency},
      {5, "rate bracket", crit_rate},
      {6, "clean-data leverage", crit_leverage},
      {7, "pricing reproduction", crit_pricing},
      {8, "partition guarantee", crit_partition},
      {9, "sampler fidelity", crit_sampler},
      {10, "effective-sample-size algebra", crit_ess},
  };

  int failures = 0;
  for (auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    std::printf("[%s] %2d. %s: %s (%.1f s)\n", ok ? "PASS" : "FAIL", c.id,
                c.name.c_str(), detail.c_str(), secs);
    std::fflush(stdout);
    failures += !ok;
  }
  std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failures,
              criteria.size());
  return failures;
}

// Command-line harness: dataset generation, estimation, sampling, sweeps,
// pricing, and the noise-elevation identity checker.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "amm/ambient.hpp"
#include "amm/distributions.hpp"
#include "amm/estimators.hpp"
#include "amm/io.hpp"
#include "amm/kernels.hpp"
#include "amm/pricing.hpp"
#include "amm/rng.hpp"
#include "amm/sweep.hpp"

namespace {

using namespace amm;

struct GlobalOpts {
  bool seed_set = false;
  std::uint64_t seed = 0;
  std::string config_path;
  nlohmann::json config;

  // Precedence: --seed flag > AMBIENT_MOMENTS_SEED env > config > 0.
  std::uint64_t resolve_seed() const {
    if (seed_set) return seed;
    if (const char* env = std::getenv("AMBIENT_MOMENTS_SEED"))
      return std::strtoull(env, nullptr, 10);
    if (config.contains("seed")) return config["seed"].get<std::uint64_t>();
    return 0;
  }

  template <typename T>
  T config_value(const std::string& key, T fallback) const {
    if (config.contains(key)) return config[key].get<T>();
    return fallback;
  }

  void load_config() {
    if (config_path.empty()) return;
    std::ifstream in(config_path);
    if (!in) throw Error("cannot open config " + config_path);
    in >> config;
  }
};

EstimatorConfig make_estimator_config(const GlobalOpts& g, int k) {
  EstimatorConfig cfg;
  cfg.k = k;
  cfg.seed = g.resolve_seed();
  cfg.delta = g.config_value("delta", cfg.delta);
  cfg.net_extra_directions =
      g.config_value("net_extra_directions", cfg.net_extra_directions);
  cfg.mom_constant = g.config_value("mom_constant", cfg.mom_constant);
  cfg.weight_net_step =
      g.config_value("weight_net_step", cfg.weight_net_step);
  cfg.candidate_cap = g.config_value<long long>("candidate_cap", cfg.candidate_cap);
  return cfg;
}

int run_lemma1_check(int trials, double tol, std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    Rng sub = rng.fork(static_cast<std::uint64_t>(t));
    const int dim = 1 + static_cast<int>(sub.next_below(3));
    const int k = 1 + static_cast<int>(sub.next_below(3));
    AtomicDistribution d;
    d.dim = dim;
    d.atoms.resize(k, dim);
    d.weights.resize(k);
    double wsum = 0.0;
    for (int i = 0; i < k; ++i) {
      for (int c = 0; c < dim; ++c) d.atoms(i, c) = 2.0 * sub.next_double() - 1.0;
      d.weights(i) = 0.05 + sub.next_double();
      wsum += d.weights(i);
    }
    d.weights /= wsum;

    const double sigma_tn = 2.0 * sub.next_double();
    const double sigma_t = sigma_tn + 0.05 + 3.0 * sub.next_double();
    VectorXd x(dim);
    for (int c = 0; c < dim; ++c) x(c) = 4.0 * sub.next_gaussian();

    NoiseSchedule sched;
    sched.T = sigma_t + 1.0;
    sched.grid = {sched.T, 0.0};
    const DenoiserOracle h_tn = make_partial_denoiser(d, sigma_tn, sched);
    const VectorXd elevated = tweedie_elevated(h_tn, sigma_t, sigma_tn, x);
    const VectorXd direct = gmm_posterior_mean(d, sigma_t, x);
    const double rel =
        (elevated - direct).norm() / std::max(1.0, direct.norm());
    worst = std::max(worst, rel);
  }
  std::cout << "lemma1-check: " << trials << " trials, max relative error "
            << worst << " (tol " << tol << ")\n";
  return worst <= tol ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learning k-atomic mixtures from heterogeneously noisy samples"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_flag_callback("--version", [] {
    std::cout << "ambient-moments 1.0 (kernels: "
              << kernels::backend_name() << ")\n";
    std::exit(0);
  });
  auto* seed_opt = app.add_option("--seed", g.seed, "Base seed");
  app.add_option("--config", g.config_path, "JSON config with defaults");

  std::string out, dist_path, data_path, report_path, table_path, spec_path;
  long long n = 100;
  int k = 1;
  double clean_fraction = 0.0, sigma_noisy = 1.0, sigma_clean = 0.0;
  double floor = 1.0;
  double interval_r = 0.0;
  int steps = 128;
  double truncate_at = -1.0;
  double min_clean = 0.1, tie_tol = 0.02;
  bool emit_svg = false;
  int trials = 200;
  double tol = 1e-9;

  auto* gen = app.add_subcommand("gen", "Sample a dataset from a distribution");
  gen->add_option("--dist", dist_path, "Distribution JSON")->required();
  gen->add_option("--n", n, "Sample count")->required();
  gen->add_option("--clean-fraction", clean_fraction, "Fraction at sigma-clean");
  gen->add_option("--sigma", sigma_noisy, "Noise level of the noisy part");
  gen->add_option("--sigma-clean", sigma_clean, "Noise level of the clean part");
  gen->add_option("--out", out, "Output dataset CSV")->required();

  auto* est = app.add_subcommand("estimate", "Estimate a mixture from a dataset");
  est->add_option("--data", data_path, "Dataset CSV")->required();
  est->add_option("--k", k, "Number of atoms")->required();
  est->add_option("--floor", floor, "Noise floor for lifting");
  est->add_option("--interval", interval_r, "Use [-R, R] instead of auto");
  est->add_option("--out", out, "Output distribution JSON")->required();
  est->add_option("--report", report_path, "Report JSON path");

  auto* est1d = app.add_subcommand("estimate1d", "1D denoised method of moments");
  est1d->add_option("--data", data_path, "Dataset CSV (d = 1)")->required();
  est1d->add_option("--k", k, "Number of atoms")->required();
  est1d->add_option("--floor", floor, "Noise floor for lifting");
  est1d->add_option("--interval", interval_r, "Use [-R, R] instead of auto");
  est1d->add_option("--out", out, "Output distribution JSON")->required();
  est1d->add_option("--report", report_path, "Report JSON path");

  auto* smp = app.add_subcommand("sample", "Draw samples with the analytic denoiser");
  smp->add_option("--dist", dist_path, "Distribution JSON")->required();
  smp->add_option("--n", n, "Sample count")->required();
  smp->add_option("--steps", steps, "Reverse grid size");
  smp->add_option("--truncate-at", truncate_at, "Stop at this noise level");
  smp->add_option("--out", out, "Output samples CSV")->required();

  auto* swp = app.add_subcommand("sweep", "Run an error-vs-n experiment");
  swp->add_option("--spec", spec_path, "Sweep spec JSON")->required();
  swp->add_option("--out", out, "Output results CSV")->required();
  swp->add_flag("--emit-svg", emit_svg, "Also write a log-log SVG chart");

  auto* prc = app.add_subcommand("price", "Derive noisy-sample price bounds");
  prc->add_option("--table", table_path, "Scores CSV")->required();
  prc->add_option("--min-clean", min_clean, "Minimum clean fraction");
  prc->add_option("--tie-tol", tie_tol, "Score tie tolerance");
  prc->add_option("--out", out, "Output bounds JSON")->required();

  auto* lem = app.add_subcommand("lemma1-check", "Verify the noise-elevation identity");
  lem->add_option("--trials", trials, "Trial count");
  lem->add_option("--tol", tol, "Relative error tolerance");

  // Global flags (--seed, --config) may appear after the subcommand name.
  for (CLI::App* sub : {gen, est, est1d, smp, swp, prc, lem})
    sub->fallthrough();

  CLI11_PARSE(app, argc, argv);
  g.seed_set = seed_opt->count() > 0;

  try {
    g.load_config();
    const std::uint64_t seed = g.resolve_seed();

    if (gen->parsed()) {
      const AtomicDistribution dist = io::read_distribution(dist_path);
      const long long n_clean = std::llround(clean_fraction * static_cast<double>(n));
      std::vector<double> sigmas(static_cast<std::size_t>(n), sigma_noisy);
      for (long long i = 0; i < n_clean && i < n; ++i)
        sigmas[static_cast<std::size_t>(i)] = sigma_clean;
      io::write_dataset(sample_mixture(dist, sigmas, seed), out);
    } else if (est->parsed() || est1d->parsed()) {
      HeteroDataset data = io::read_dataset(data_path);
      if (est1d->parsed() && data.dim() != 1)
        throw InvalidArgument("estimate1d: dataset must be one-dimensional");
      data = lift_noise(data, floor, hash_combine(seed, 0x6c696674ULL));
      const EstimatorConfig cfg = make_estimator_config(g, k);
      const std::pair<double, double> ival =
          interval_r > 0.0 ? std::pair<double, double>{-interval_r, interval_r}
                           : auto_interval(data);
      EstimateResult res;
      if (data.dim() == 1) {
        std::vector<double> xs(data.points.data(), data.points.data() + data.n());
        std::vector<double> sg(data.sigmas.data(), data.sigmas.data() + data.n());
        const Ddm1dResult r = ddm_1d_ex(xs, sg, k, ival);
        res.dist = r.dist;
        res.report.subspace = MatrixXd::Identity(1, 1);
        res.report.moment_residuals = {r.moment_residual};
        res.report.w1_residuals = {0.0};
        res.report.interval_lo = ival.first;
        res.report.interval_hi = ival.second;
        const EffectiveSampleSizes ess = effective_sample_sizes(sg, k);
        res.report.n_d = ess.n_d;
        res.report.n_l = ess.n_l;
      } else {
        res = estimate_hd(data, cfg,
                          interval_r > 0.0 ? std::optional(ival) : std::nullopt);
      }
      io::write_distribution(res.dist, out);
      if (report_path.empty())
        report_path = out.substr(0, out.find_last_of('.')) + ".report.json";
      io::write_report(res.report, report_path);
    } else if (smp->parsed()) {
      const AtomicDistribution dist = io::read_distribution(dist_path);
      const NoiseSchedule sched =
          NoiseSchedule::make_default(dist.radius(), steps);
      const DenoiserOracle h = make_analytic_denoiser(dist, sched);
      RowMat points(n, dist.dim);
      for (long long i = 0; i < n; ++i) {
        const std::uint64_t s = hash_combine(seed, static_cast<std::uint64_t>(i));
        const VectorXd x =
            truncate_at >= 0.0
                ? truncated_sample(h, dist.dim, sched,
                                   AmbientConfig::at(truncate_at), s)
                : ode_sample(h, dist.dim, sched, s);
        points.row(static_cast<int>(i)) = x.transpose();
      }
      io::write_samples(points, out);
    } else if (swp->parsed()) {
      std::ifstream in(spec_path);
      if (!in) throw Error("cannot open " + spec_path);
      std::ostringstream ss;
      ss << in.rdbuf();
      SweepSpec spec = parse_sweep_spec(
          ss.str(), std::filesystem::path(spec_path).parent_path().string());
      if (g.seed_set) spec.seed = seed;
      const SweepResult result = run_sweep(spec);
      write_sweep_csv(result, out);
      if (emit_svg)
        write_sweep_svg(result, out.substr(0, out.find_last_of('.')) + ".svg");
      int failures = 0;
      for (const SweepRow& r : result.rows) failures += !r.error.empty();
      if (failures > 0)
        std::cerr << "sweep: " << failures << " rows recorded errors\n";
    } else if (prc->parsed()) {
      const std::vector<PricingTable> tables = io::read_pricing_tables(table_path);
      std::vector<std::pair<std::string, PricingBound>> all;
      for (const PricingTable& t : tables)
        for (const PricingBound& b : price_bounds(t, min_clean, tie_tol))
          all.emplace_back(t.dataset, b);
      io::write_bounds(all, out);
    } else if (lem->parsed()) {
      return run_lemma1_check(trials, tol, seed);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

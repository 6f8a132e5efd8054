#include "amm/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "amm/distributions.hpp"
#include "amm/estimators.hpp"
#include "amm/io.hpp"
#include "amm/pricing.hpp"
#include "amm/rng.hpp"

namespace amm {

void SweepSpec::validate() const {
  target.validate();
  if (k < 1) throw InvalidArgument("sweep spec: k must be >= 1");
  if (trials < 1) throw InvalidArgument("sweep spec: trials must be >= 1");
  if (n_values.empty()) throw InvalidArgument("sweep spec: empty n list");
  long long prev = 0;
  for (long long n : n_values) {
    if (n <= prev) throw InvalidArgument("sweep spec: n values must be positive ascending");
    prev = n;
  }
  if (!(profile.clean_fraction >= 0.0 && profile.clean_fraction <= 1.0))
    throw InvalidArgument("sweep spec: clean fraction outside [0,1]");
  if (!(profile.lift_floor > 0.0))
    throw InvalidArgument("sweep spec: lift floor must be positive");
}

SweepResult run_sweep(const SweepSpec& spec) {
  spec.validate();
  SweepResult result;
  const int d = spec.target.dim;

  for (long long n : spec.n_values) {
    for (int trial = 0; trial < spec.trials; ++trial) {
      SweepRow row;
      row.n = n;
      row.p = spec.profile.clean_fraction;
      row.sigma = spec.profile.sigma_noisy;
      row.trial = trial;
      row.seed = spec.seed + hash_combine(static_cast<std::uint64_t>(n),
                                          static_cast<std::uint64_t>(trial));
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const long long n_clean = std::llround(spec.profile.clean_fraction *
                                               static_cast<double>(n));
        std::vector<double> sigmas(static_cast<std::size_t>(n),
                                   spec.profile.sigma_noisy);
        for (long long i = 0; i < n_clean && i < n; ++i)
          sigmas[static_cast<std::size_t>(i)] = spec.profile.sigma_clean;

        HeteroDataset data = sample_mixture(spec.target, sigmas, row.seed);
        data = lift_noise(data, spec.profile.lift_floor,
                          hash_combine(row.seed, 0x6c696674ULL));

        EstimatorConfig cfg;
        cfg.k = spec.k;
        cfg.seed = row.seed;
        cfg.net_extra_directions = spec.net_extra_directions;

        AtomicDistribution est;
        if (d == 1) {
          std::vector<double> xs(data.points.data(),
                                 data.points.data() + data.n());
          std::vector<double> sg(data.sigmas.data(),
                                 data.sigmas.data() + data.n());
          est = ddm_1d(xs, sg, spec.k, auto_interval(data));
        } else {
          est = estimate_hd(data, cfg).dist;
        }
        row.w1_error = d == 1 ? wasserstein1_1d(spec.target, est)
                              : wasserstein1(spec.target, est);
        const EffectiveSampleSizes ess = effective_sample_sizes(
            std::vector<double>(data.sigmas.data(),
                                data.sigmas.data() + data.n()),
            spec.k);
        row.n_d = ess.n_d;
        row.n_l = ess.n_l;
      } catch (const std::exception& e) {
        row.w1_error = std::numeric_limits<double>::quiet_NaN();
        row.error = e.what();
      }
      const auto t1 = std::chrono::steady_clock::now();
      row.wall_ms =
          std::chrono::duration<double, std::milli>(t1 - t0).count();
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

namespace {

std::map<long long, double> median_per_n(const SweepResult& result) {
  std::map<long long, std::vector<double>> groups;
  for (const SweepRow& r : result.rows)
    if (std::isfinite(r.w1_error)) groups[r.n].push_back(r.w1_error);
  std::map<long long, double> medians;
  for (auto& [n, v] : groups) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size();
    medians[n] = m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
  }
  return medians;
}

}  // namespace

std::pair<double, double> fit_rate(const SweepResult& result) {
  const auto medians = median_per_n(result);
  if (medians.size() < 3)
    throw InvalidArgument("fit_rate: need >= 3 distinct n values");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (const auto& [n, med] : medians) {
    const double x = std::log(static_cast<double>(n));
    const double y = std::log(std::max(med, 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  const double denom = m * sxx - sx * sx;
  const double slope = (m * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / m;
  return {slope, intercept};
}

void write_sweep_csv(const SweepResult& result, const std::string& path,
                     bool include_wall_ms) {
  std::ostringstream out;
  out << "n,p,sigma,trial,seed,w1_error,n_d,n_l,wall_ms,error\n";
  for (const SweepRow& r : result.rows) {
    out << r.n << "," << io::format_double(r.p) << ","
        << io::format_double(r.sigma) << "," << r.trial << "," << r.seed << ","
        << io::format_double(r.w1_error) << "," << io::format_double(r.n_d)
        << "," << io::format_double(r.n_l) << ","
        << (include_wall_ms ? io::format_double(r.wall_ms) : std::string("0"))
        << "," << r.error << "\n";
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  f << out.str();
}

SweepResult read_sweep_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error("empty sweep CSV");
  SweepResult result;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        f.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur.push_back(c);
      }
    }
    f.push_back(cur);
    if (f.size() < 10) throw Error("sweep CSV: ragged row");
    SweepRow r;
    r.n = std::stoll(f[0]);
    r.p = std::stod(f[1]);
    r.sigma = std::stod(f[2]);
    r.trial = std::stoi(f[3]);
    r.seed = std::stoull(f[4]);
    r.w1_error = std::stod(f[5]);
    r.n_d = std::stod(f[6]);
    r.n_l = std::stod(f[7]);
    r.wall_ms = std::stod(f[8]);
    r.error = f[9];
    result.rows.push_back(std::move(r));
  }
  return result;
}

void write_sweep_svg(const SweepResult& result, const std::string& path) {
  const auto medians = median_per_n(result);
  if (medians.empty()) throw InvalidArgument("write_sweep_svg: no finite rows");

  const double width = 640, height = 420, ml = 70, mr = 20, mt = 20, mb = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& [n, med] : medians) {
    const double x = std::log10(static_cast<double>(n));
    const double y = std::log10(std::max(med, 1e-12));
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  if (xmax - xmin < 1e-9) xmax = xmin + 1.0;
  if (ymax - ymin < 1e-9) ymax = ymin + 1.0;
  auto px = [&](double x) {
    return ml + (x - xmin) / (xmax - xmin) * (width - ml - mr);
  };
  auto py = [&](double y) {
    return height - mb - (y - ymin) / (ymax - ymin) * (height - mt - mb);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\""
      << width - mr << "\" y2=\"" << height - mb
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
      << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
  svg << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" "
         "points=\"";
  for (const auto& [n, med] : medians)
    svg << px(std::log10(static_cast<double>(n))) << ","
        << py(std::log10(std::max(med, 1e-12))) << " ";
  svg << "\"/>\n";
  for (const auto& [n, med] : medians) {
    svg << "<circle cx=\"" << px(std::log10(static_cast<double>(n)))
        << "\" cy=\"" << py(std::log10(std::max(med, 1e-12)))
        << "\" r=\"3\" fill=\"steelblue\"/>\n";
    svg << "<text x=\"" << px(std::log10(static_cast<double>(n))) << "\" y=\""
        << height - mb + 18 << "\" font-size=\"11\" text-anchor=\"middle\">"
        << n << "</text>\n";
  }
  svg << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 12
      << "\" font-size=\"13\" text-anchor=\"middle\">n (log scale)</text>\n";
  svg << "<text x=\"16\" y=\"" << (mt + height - mb) / 2
      << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 "
         "16 "
      << (mt + height - mb) / 2 << ")\">median W1 (log scale)</text>\n";
  svg << "</svg>\n";

  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  f << svg.str();
}

SweepSpec parse_sweep_spec(const std::string& json_text,
                           const std::string& base_dir) {
  const nlohmann::json j = nlohmann::json::parse(json_text);
  SweepSpec spec;
  if (j.contains("dist") && j["dist"].is_string()) {
    std::string p = j["dist"].get<std::string>();
    if (!p.empty() && p[0] != '/' && !base_dir.empty()) p = base_dir + "/" + p;
    spec.target = io::read_distribution(p);
  } else if (j.contains("dist")) {
    spec.target = io::parse_distribution(j["dist"].dump());
  } else {
    throw InvalidArgument("sweep spec: missing dist");
  }
  spec.k = j.at("k").get<int>();
  spec.profile.clean_fraction = j.value("clean_fraction", 0.0);
  spec.profile.sigma_noisy = j.value("sigma", 1.0);
  spec.profile.sigma_clean = j.value("sigma_clean", 0.0);
  spec.profile.lift_floor = j.value("lift_floor", 1.0);
  for (const auto& n : j.at("n_values")) spec.n_values.push_back(n.get<long long>());
  spec.trials = j.value("trials", 1);
  spec.seed = j.value("seed", 0ULL);
  spec.net_extra_directions = j.value("net_extra_directions", 64);
  return spec;
}

}  // namespace amm

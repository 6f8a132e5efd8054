#include "amm/hermite.hpp"

#include <cmath>

#include "amm/kernels.hpp"

namespace amm {

namespace {

// coeff[r][j] = r! (-1/2)^j / (j! (r-2j)!), built by the exact ratio
// recurrence c_{j+1} = c_j * (-1/2) (r-2j)(r-2j-1) / (j+1). Every factor is
// an exactly representable small rational, so rounding stays at machine eps
// per step.
std::vector<std::vector<double>> build_coeff_table(int max_degree) {
  std::vector<std::vector<double>> table(max_degree + 1);
  for (int r = 0; r <= max_degree; ++r) {
    table[r].resize(r / 2 + 1);
    table[r][0] = 1.0;
    for (int j = 0; 2 * (j + 1) <= r; ++j) {
      const double num = static_cast<double>(r - 2 * j) * (r - 2 * j - 1);
      table[r][j + 1] = table[r][j] * (-0.5) * num / (j + 1);
    }
  }
  return table;
}

const std::vector<std::vector<double>>& coeff_table() {
  static const std::vector<std::vector<double>> table =
      build_coeff_table(kDefaultDegreeCap);
  return table;
}

void check_degree(int r, int max_degree, const char* who) {
  if (r < 0) throw InvalidArgument(std::string(who) + ": degree must be >= 0");
  if (r > max_degree || r > kDefaultDegreeCap)
    throw CapacityExceeded(std::string(who) + ": degree exceeds cap", r);
}

}  // namespace

double hermite(int r, double x, int max_degree) {
  check_degree(r, max_degree, "hermite");
  if (r == 0) return 1.0;
  double hm = 1.0, h = x;
  for (int m = 1; m < r; ++m) {
    const double next = x * h - m * hm;
    hm = h;
    h = next;
  }
  return h;
}

const std::vector<double>& gamma_coefficients(int r, int max_degree) {
  check_degree(r, max_degree, "gamma_coefficients");
  return coeff_table()[r];
}

double gamma_poly(int r, double sigma, double x, int max_degree) {
  check_degree(r, max_degree, "gamma_poly");
  if (!(sigma >= 0.0)) throw InvalidArgument("gamma_poly: sigma must be >= 0");
  const std::vector<double>& c = coeff_table()[r];
  const double v = sigma * sigma;
  double xp[kDefaultDegreeCap + 1];
  xp[0] = 1.0;
  for (int m = 1; m <= r; ++m) xp[m] = xp[m - 1] * x;
  double g = 0.0, vj = 1.0;
  for (int j = 0; 2 * j <= r; ++j) {
    g += c[j] * vj * xp[r - 2 * j];
    vj *= v;
  }
  return g;
}

WeightScheme weight_scheme(const std::vector<double>& sigmas, int q) {
  if (sigmas.empty()) throw InvalidArgument("weight_scheme: empty sigmas");
  if (q < 1) throw InvalidArgument("weight_scheme: q must be >= 1");
  double smin = sigmas[0];
  for (double s : sigmas) {
    if (!(s > 0.0))
      throw InvalidArgument("weight_scheme: sigma must be > 0 (lift first)");
    smin = std::min(smin, s);
  }
  WeightScheme w;
  w.exponent = q;
  w.alphas.resize(static_cast<int>(sigmas.size()));
  double sum = 0.0;
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    const double a = std::pow(smin / sigmas[i], q);
    w.alphas(static_cast<int>(i)) = a;
    sum += a;
  }
  w.alphas /= sum;
  return w;
}

MomentVector weighted_moments(const std::vector<double>& xs,
                              const std::vector<double>& sigmas, int k) {
  if (k < 1) throw InvalidArgument("weighted_moments: k must be >= 1");
  if (xs.size() != sigmas.size() || xs.empty())
    throw InvalidArgument("weighted_moments: bad input sizes");
  const int order = 2 * k - 1;
  check_degree(order, kDefaultDegreeCap, "weighted_moments");

  const WeightScheme w = weight_scheme(sigmas, 4 * k - 2);

  // Flatten the coefficient table into the row-major layout the kernel
  // expects: row r holds the coefficients of g_r.
  const std::size_t stride = static_cast<std::size_t>(order) / 2 + 1;
  std::vector<double> coeff(static_cast<std::size_t>(order + 1) * stride, 0.0);
  for (int r = 0; r <= order; ++r) {
    const auto& row = coeff_table()[r];
    for (std::size_t j = 0; j < row.size(); ++j)
      coeff[static_cast<std::size_t>(r) * stride + j] = row[j];
  }

  std::vector<double> sigma2(sigmas.size());
  for (std::size_t i = 0; i < sigmas.size(); ++i)
    sigma2[i] = sigmas[i] * sigmas[i];

  MomentVector m;
  m.values.assign(order, 0.0);
  kernels::moment_accumulate(xs.data(), sigma2.data(), w.alphas.data(),
                             xs.size(), order, coeff.data(), stride,
                             m.values.data());
  return m;
}

MomentVector weighted_moments(
    const std::vector<std::pair<double, double>>& data_1d, int k) {
  std::vector<double> xs(data_1d.size()), sigmas(data_1d.size());
  for (std::size_t i = 0; i < data_1d.size(); ++i) {
    xs[i] = data_1d[i].first;
    sigmas[i] = data_1d[i].second;
  }
  return weighted_moments(xs, sigmas, k);
}

double moment_variance_bound(int r, double sigma, double M, double c_var) {
  if (r < 1) throw InvalidArgument("moment_variance_bound: r must be >= 1");
  if (!(sigma >= 0.0) || !(M > 0.0))
    throw InvalidArgument("moment_variance_bound: need sigma >= 0, M > 0");
  return std::pow(c_var * (M + sigma * std::sqrt(static_cast<double>(r))),
                  2.0 * r);
}

}  // namespace amm

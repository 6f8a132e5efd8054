#include "amm/kernels.hpp"

namespace amm::kernels::detail {

void moment_accumulate_scalar(const double* x, const double* sigma2,
                              const double* alpha, std::size_t n, int order,
                              const double* coeff, std::size_t coeff_stride,
                              double* out) {
  // xp[m] = x^m up to the requested order; vp[j] = sigma2^j.
  double xp[64], vp[32];
  xp[0] = 1.0;
  vp[0] = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i];
    const double vi = sigma2[i];
    const double ai = alpha[i];
    for (int m = 1; m <= order; ++m) xp[m] = xp[m - 1] * xi;
    for (int j = 1; 2 * j <= order; ++j) vp[j] = vp[j - 1] * vi;
    for (int r = 1; r <= order; ++r) {
      const double* cr = coeff + static_cast<std::size_t>(r) * coeff_stride;
      double g = 0.0;
      for (int j = 0; 2 * j <= r; ++j) g += cr[j] * vp[j] * xp[r - 2 * j];
      out[r - 1] += ai * g;
    }
  }
}

void project_points_scalar(const double* points, std::size_t n,
                           std::size_t dim, const double* dir, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = points + i * dim;
    double acc = 0.0;
    for (std::size_t d = 0; d < dim; ++d) acc += row[d] * dir[d];
    out[i] = acc;
  }
}

void weighted_outer_scalar(const double* points, const double* alpha,
                           std::size_t n, std::size_t dim, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = points + i * dim;
    const double ai = alpha[i];
    for (std::size_t a = 0; a < dim; ++a) {
      const double s = ai * row[a];
      double* outa = out + a * dim;
      for (std::size_t b = 0; b < dim; ++b) outa[b] += s * row[b];
    }
  }
}

void sq_dist_batch_scalar(const double* points, std::size_t n,
                          const double* atoms, std::size_t k, std::size_t dim,
                          double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = points + i * dim;
    for (std::size_t j = 0; j < k; ++j) {
      const double* mu = atoms + j * dim;
      double acc = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = row[d] - mu[d];
        acc += diff * diff;
      }
      out[i * k + j] = acc;
    }
  }
}

}  // namespace amm::kernels::detail

// AVX2/FMA variants of the scalar kernels. Compiled with -mavx2 -mfma and
// selected at runtime; falls back to the scalar implementations when the
// translation unit is built without AVX2 support.

#include "amm/kernels.hpp"

#ifdef __AVX2__

#include <immintrin.h>

namespace amm::kernels::detail {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

}  // namespace

void moment_accumulate_avx2(const double* x, const double* sigma2,
                            const double* alpha, std::size_t n, int order,
                            const double* coeff, std::size_t coeff_stride,
                            double* out) {
  __m256d acc[64];
  for (int r = 0; r < order; ++r) acc[r] = _mm256_setzero_pd();

  __m256d xp[64], vp[32];
  xp[0] = _mm256_set1_pd(1.0);
  vp[0] = _mm256_set1_pd(1.0);

  const std::size_t tail = n - n % 4;
  for (std::size_t i = 0; i < tail; i += 4) {
    const __m256d xi = _mm256_loadu_pd(x + i);
    const __m256d vi = _mm256_loadu_pd(sigma2 + i);
    const __m256d ai = _mm256_loadu_pd(alpha + i);
    for (int m = 1; m <= order; ++m) xp[m] = _mm256_mul_pd(xp[m - 1], xi);
    for (int j = 1; 2 * j <= order; ++j) vp[j] = _mm256_mul_pd(vp[j - 1], vi);
    for (int r = 1; r <= order; ++r) {
      const double* cr = coeff + static_cast<std::size_t>(r) * coeff_stride;
      __m256d g = _mm256_setzero_pd();
      for (int j = 0; 2 * j <= r; ++j) {
        const __m256d term = _mm256_mul_pd(vp[j], xp[r - 2 * j]);
        g = _mm256_fmadd_pd(_mm256_set1_pd(cr[j]), term, g);
      }
      acc[r - 1] = _mm256_fmadd_pd(ai, g, acc[r - 1]);
    }
  }
  for (int r = 0; r < order; ++r) out[r] += hsum(acc[r]);
  if (tail < n) {
    moment_accumulate_scalar(x + tail, sigma2 + tail, alpha + tail, n - tail,
                             order, coeff, coeff_stride, out);
  }
}

void project_points_avx2(const double* points, std::size_t n, std::size_t dim,
                         const double* dir, double* out) {
  const std::size_t dtail = dim - dim % 4;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = points + i * dim;
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t d = 0; d < dtail; d += 4) {
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(row + d),
                            _mm256_loadu_pd(dir + d), acc);
    }
    double s = hsum(acc);
    for (std::size_t d = dtail; d < dim; ++d) s += row[d] * dir[d];
    out[i] = s;
  }
}

void weighted_outer_avx2(const double* points, const double* alpha,
                         std::size_t n, std::size_t dim, double* out) {
  const std::size_t dtail = dim - dim % 4;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = points + i * dim;
    const double ai = alpha[i];
    for (std::size_t a = 0; a < dim; ++a) {
      const __m256d s = _mm256_set1_pd(ai * row[a]);
      double* outa = out + a * dim;
      for (std::size_t b = 0; b < dtail; b += 4) {
        _mm256_storeu_pd(outa + b,
                         _mm256_fmadd_pd(s, _mm256_loadu_pd(row + b),
                                         _mm256_loadu_pd(outa + b)));
      }
      const double ss = ai * row[a];
      for (std::size_t b = dtail; b < dim; ++b) outa[b] += ss * row[b];
    }
  }
}

void sq_dist_batch_avx2(const double* points, std::size_t n,
                        const double* atoms, std::size_t k, std::size_t dim,
                        double* out) {
  const std::size_t dtail = dim - dim % 4;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = points + i * dim;
    for (std::size_t j = 0; j < k; ++j) {
      const double* mu = atoms + j * dim;
      __m256d acc = _mm256_setzero_pd();
      for (std::size_t d = 0; d < dtail; d += 4) {
        const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(row + d),
                                           _mm256_loadu_pd(mu + d));
        acc = _mm256_fmadd_pd(diff, diff, acc);
      }
      double s = hsum(acc);
      for (std::size_t d = dtail; d < dim; ++d) {
        const double diff = row[d] - mu[d];
        s += diff * diff;
      }
      out[i * k + j] = s;
    }
  }
}

}  // namespace amm::kernels::detail

#else  // !__AVX2__

namespace amm::kernels::detail {

void moment_accumulate_avx2(const double* x, const double* sigma2,
                            const double* alpha, std::size_t n, int order,
                            const double* coeff, std::size_t coeff_stride,
                            double* out) {
  moment_accumulate_scalar(x, sigma2, alpha, n, order, coeff, coeff_stride,
                           out);
}
void project_points_avx2(const double* points, std::size_t n, std::size_t dim,
                         const double* dir, double* out) {
  project_points_scalar(points, n, dim, dir, out);
}
void weighted_outer_avx2(const double* points, const double* alpha,
                         std::size_t n, std::size_t dim, double* out) {
  weighted_outer_scalar(points, alpha, n, dim, out);
}
void sq_dist_batch_avx2(const double* points, std::size_t n,
                        const double* atoms, std::size_t k, std::size_t dim,
                        double* out) {
  sq_dist_batch_scalar(points, n, atoms, k, dim, out);
}

}  // namespace amm::kernels::detail

#endif

#pragma once

#include <cstddef>
#include <string>

namespace amm::kernels {

enum class Backend { kScalar, kAvx2 };

/// Active backend. Defaults to the best instruction set the CPU supports;
/// the AMBIENT_MOMENTS_KERNELS environment variable ("scalar", "avx2",
/// "auto") overrides, and set_backend() overrides both.
Backend backend();
void set_backend(Backend b);
bool avx2_supported();
std::string backend_name();

/// out[r-1] += sum_i alpha[i] * g_r(x[i], sigma2[i]) for r = 1..order, where
/// g_r is the degree-r noise-adjusted polynomial with coefficient table
/// coeff[r][j] (see hermite.cpp): g_r(x, v) = sum_j coeff[r][j] v^j x^(r-2j).
/// `coeff` is row-major with stride `coeff_stride`.
void moment_accumulate(const double* x, const double* sigma2,
                       const double* alpha, std::size_t n, int order,
                       const double* coeff, std::size_t coeff_stride,
                       double* out);

/// out[i] = dot(points[i*dim .. i*dim+dim), dir) for i in [0, n).
void project_points(const double* points, std::size_t n, std::size_t dim,
                    const double* dir, double* out);

/// out (dim x dim, row-major) = sum_i alpha[i] * x_i x_i^T with x_i row i of
/// `points`. `out` must be zero-initialized by the caller.
void weighted_outer(const double* points, const double* alpha, std::size_t n,
                    std::size_t dim, double* out);

/// out[i*k + j] = squared Euclidean distance between point i and atom j.
void sq_dist_batch(const double* points, std::size_t n, const double* atoms,
                   std::size_t k, std::size_t dim, double* out);

namespace detail {
void moment_accumulate_scalar(const double* x, const double* sigma2,
                              const double* alpha, std::size_t n, int order,
                              const double* coeff, std::size_t coeff_stride,
                              double* out);
void project_points_scalar(const double* points, std::size_t n,
                           std::size_t dim, const double* dir, double* out);
void weighted_outer_scalar(const double* points, const double* alpha,
                           std::size_t n, std::size_t dim, double* out);
void sq_dist_batch_scalar(const double* points, std::size_t n,
                          const double* atoms, std::size_t k, std::size_t dim,
                          double* out);

void moment_accumulate_avx2(const double* x, const double* sigma2,
                            const double* alpha, std::size_t n, int order,
                            const double* coeff, std::size_t coeff_stride,
                            double* out);
void project_points_avx2(const double* points, std::size_t n, std::size_t dim,
                         const double* dir, double* out);
void weighted_outer_avx2(const double* points, const double* alpha,
                         std::size_t n, std::size_t dim, double* out);
void sq_dist_batch_avx2(const double* points, std::size_t n,
                        const double* atoms, std::size_t k, std::size_t dim,
                        double* out);
}  // namespace detail

}  // namespace amm::kernels

#include "amm/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace amm::kernels {

namespace {

Backend detect_backend() {
  if (const char* env = std::getenv("AMBIENT_MOMENTS_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::kScalar;
    if (std::strcmp(env, "avx2") == 0 && avx2_supported())
      return Backend::kAvx2;
    // "auto" and unrecognized values fall through to detection.
  }
  return avx2_supported() ? Backend::kAvx2 : Backend::kScalar;
}

Backend& active() {
  static Backend b = detect_backend();
  return b;
}

}  // namespace

bool avx2_supported() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend backend() { return active(); }

void set_backend(Backend b) {
  if (b == Backend::kAvx2 && !avx2_supported()) b = Backend::kScalar;
  active() = b;
}

std::string backend_name() {
  return active() == Backend::kAvx2 ? "avx2" : "scalar";
}

void moment_accumulate(const double* x, const double* sigma2,
                       const double* alpha, std::size_t n, int order,
                       const double* coeff, std::size_t coeff_stride,
                       double* out) {
  if (active() == Backend::kAvx2)
    detail::moment_accumulate_avx2(x, sigma2, alpha, n, order, coeff,
                                   coeff_stride, out);
  else
    detail::moment_accumulate_scalar(x, sigma2, alpha, n, order, coeff,
                                     coeff_stride, out);
}

void project_points(const double* points, std::size_t n, std::size_t dim,
                    const double* dir, double* out) {
  if (active() == Backend::kAvx2)
    detail::project_points_avx2(points, n, dim, dir, out);
  else
    detail::project_points_scalar(points, n, dim, dir, out);
}

void weighted_outer(const double* points, const double* alpha, std::size_t n,
                    std::size_t dim, double* out) {
  if (active() == Backend::kAvx2)
    detail::weighted_outer_avx2(points, alpha, n, dim, out);
  else
    detail::weighted_outer_scalar(points, alpha, n, dim, out);
}

void sq_dist_batch(const double* points, std::size_t n, const double* atoms,
                   std::size_t k, std::size_t dim, double* out) {
  if (active() == Backend::kAvx2)
    detail::sq_dist_batch_avx2(points, n, atoms, k, dim, out);
  else
    detail::sq_dist_batch_scalar(points, n, atoms, k, dim, out);
}

}  // namespace amm::kernels

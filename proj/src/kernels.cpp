#include "lidarsem/kernels.hpp"

#include <stdexcept>

namespace lidarsem::kernels {
namespace {

const detail::Ops* ops_for(Backend b) {
#ifdef LIDARSEM_BUILD_AVX2
  if (b == Backend::Avx2) return &detail::avx2_ops;
#endif
  if (b == Backend::Avx2) throw std::runtime_error("AVX2 backend not built");
  return &detail::scalar_ops;
}

Backend g_backend = detect_backend();
const detail::Ops* g_ops = ops_for(g_backend);

}  // namespace

Backend detect_backend() {
#ifdef LIDARSEM_BUILD_AVX2
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
    return Backend::Avx2;
  }
#endif
  return Backend::Scalar;
}

Backend active_backend() { return g_backend; }

void set_backend(Backend b) {
  if (b == Backend::Avx2 && detect_backend() != Backend::Avx2) {
    throw std::runtime_error("host does not support the AVX2 backend");
  }
  g_backend = b;
  g_ops = ops_for(b);
}

void range3(const double* x, const double* y, const double* z, double* out,
            std::size_t n) {
  g_ops->range3(x, y, z, out, n);
}

double dot(const double* a, const double* b, std::size_t n) { return g_ops->dot(a, b, n); }

void axpy(double a, const double* x, double* y, std::size_t n) { g_ops->axpy(a, x, y, n); }

void exp_batch(const double* x, double* out, std::size_t n) { g_ops->exp_batch(x, out, n); }

void log_batch(const double* x, double* out, std::size_t n) { g_ops->log_batch(x, out, n); }

void softmax2(const double* a0, const double* a1, double* xi, std::size_t n) {
  g_ops->softmax2(a0, a1, xi, n);
}

void logodds_accumulate(double* L, const double* xi, double prior_logodds, std::size_t n) {
  g_ops->logodds_accumulate(L, xi, prior_logodds, n);
}

void sigmoid(const double* L, double* p, std::size_t n) { g_ops->sigmoid(L, p, n); }

}  // namespace lidarsem::kernels

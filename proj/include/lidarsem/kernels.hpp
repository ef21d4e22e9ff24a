#ifndef LIDARSEM_KERNELS_HPP
#define LIDARSEM_KERNELS_HPP

#include <cstddef>

// Data-parallel inner loops of the pipeline. Every kernel exists as a
// scalar reference implementation and, on capable x86 hosts, an AVX2
// variant selected at runtime. The two are equivalence-tested; callers
// go through the dispatching front ends below.
namespace lidarsem::kernels {

enum class Backend { Scalar, Avx2 };

// Best backend the host supports.
Backend detect_backend();
Backend active_backend();
// Force a backend (tests); Avx2 on a host without it throws.
void set_backend(Backend b);

// out[i] = sqrt(x[i]^2 + y[i]^2 + z[i]^2)
void range3(const double* x, const double* y, const double* z, double* out, std::size_t n);

double dot(const double* a, const double* b, std::size_t n);

// y[i] += a * x[i]
void axpy(double a, const double* x, double* y, std::size_t n);

void exp_batch(const double* x, double* out, std::size_t n);
void log_batch(const double* x, double* out, std::size_t n);

// xi[i] = exp(a1[i] - m) / (exp(a1[i] - m) + exp(a0[i] - m)), m = max of the pair.
void softmax2(const double* a0, const double* a1, double* xi, std::size_t n);

// L[i] += logit(clamp(xi[i])) - prior_logodds, clamp to [1e-6, 1 - 1e-6].
void logodds_accumulate(double* L, const double* xi, double prior_logodds, std::size_t n);

// p[i] = 1 / (1 + exp(-L[i]))
void sigmoid(const double* L, double* p, std::size_t n);

namespace detail {
struct Ops {
  void (*range3)(const double*, const double*, const double*, double*, std::size_t);
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*exp_batch)(const double*, double*, std::size_t);
  void (*log_batch)(const double*, double*, std::size_t);
  void (*softmax2)(const double*, const double*, double*, std::size_t);
  void (*logodds_accumulate)(double*, const double*, double, std::size_t);
  void (*sigmoid)(const double*, double*, std::size_t);
};
extern const Ops scalar_ops;
#ifdef LIDARSEM_BUILD_AVX2
extern const Ops avx2_ops;
#endif
}  // namespace detail

}  // namespace lidarsem::kernels

#endif

#include <cmath>

#include "lidarsem/kernels.hpp"

namespace lidarsem::kernels {
namespace {

void range3_scalar(const double* x, const double* y, const double* z, double* out,
                   std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::sqrt(x[i] * x[i] + y[i] * y[i] + z[i] * z[i]);
  }
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void exp_scalar(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(x[i]);
}

void log_scalar(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::log(x[i]);
}

void softmax2_scalar(const double* a0, const double* a1, double* xi, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double m = a0[i] > a1[i] ? a0[i] : a1[i];
    double e0 = std::exp(a0[i] - m);
    double e1 = std::exp(a1[i] - m);
    xi[i] = e1 / (e0 + e1);
  }
}

void logodds_scalar(double* L, const double* xi, double prior_logodds, std::size_t n) {
  constexpr double kLo = 1e-6;
  constexpr double kHi = 1.0 - 1e-6;
  for (std::size_t i = 0; i < n; ++i) {
    double p = xi[i] < kLo ? kLo : (xi[i] > kHi ? kHi : xi[i]);
    L[i] += std::log(p / (1.0 - p)) - prior_logodds;
  }
}

void sigmoid_scalar(const double* L, double* p, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) p[i] = 1.0 / (1.0 + std::exp(-L[i]));
}

}  // namespace

namespace detail {
const Ops scalar_ops = {range3_scalar, dot_scalar,     axpy_scalar,
                        exp_scalar,    log_scalar,     softmax2_scalar,
                        logodds_scalar, sigmoid_scalar};
}  // namespace detail

}  // namespace lidarsem::kernels

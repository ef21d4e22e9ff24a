#include <immintrin.h>

#include <cmath>

#include "lidarsem/kernels.hpp"

// AVX2 variants, 4 doubles per lane. exp/log use the classic Cephes
// rational approximations; agreement with libm is checked by the
// equivalence tests at 1e-12 relative.
namespace lidarsem::kernels {
namespace {

inline __m256d poly5(__m256d x, double c0, double c1, double c2, double c3, double c4,
                     double c5) {
  __m256d r = _mm256_set1_pd(c0);
  r = _mm256_fmadd_pd(r, x, _mm256_set1_pd(c1));
  r = _mm256_fmadd_pd(r, x, _mm256_set1_pd(c2));
  r = _mm256_fmadd_pd(r, x, _mm256_set1_pd(c3));
  r = _mm256_fmadd_pd(r, x, _mm256_set1_pd(c4));
  r = _mm256_fmadd_pd(r, x, _mm256_set1_pd(c5));
  return r;
}

// 2^n for integer n in a double lane, via exponent bits.
inline __m256d pow2i(__m256d n) {
  __m128i n32 = _mm256_cvtpd_epi32(n);
  __m256i n64 = _mm256_cvtepi32_epi64(n32);
  __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
  return _mm256_castsi256_pd(bits);
}

inline __m256d exp_pd(__m256d x) {
  const __m256d max_x = _mm256_set1_pd(708.0);
  const __m256d min_x = _mm256_set1_pd(-708.0);
  __m256d clamped = _mm256_min_pd(_mm256_max_pd(x, min_x), max_x);

  const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
  __m256d n = _mm256_round_pd(_mm256_mul_pd(clamped, log2e),
                              _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  // r = x - n*ln2, split constant for accuracy
  const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);
  __m256d r = _mm256_fnmadd_pd(n, ln2_hi, clamped);
  r = _mm256_fnmadd_pd(n, ln2_lo, r);

  __m256d rr = _mm256_mul_pd(r, r);
  // Cephes exp: e^r = 1 + 2r P(r^2) / (Q(r^2) - r P(r^2))
  __m256d P = _mm256_set1_pd(1.26177193074810590878e-4);
  P = _mm256_fmadd_pd(P, rr, _mm256_set1_pd(3.02994407707441961300e-2));
  P = _mm256_fmadd_pd(P, rr, _mm256_set1_pd(9.99999999999999999910e-1));
  P = _mm256_mul_pd(P, r);
  __m256d Q = _mm256_set1_pd(3.00198505138664455042e-6);
  Q = _mm256_fmadd_pd(Q, rr, _mm256_set1_pd(2.52448340349684104192e-3));
  Q = _mm256_fmadd_pd(Q, rr, _mm256_set1_pd(2.27265548208155028766e-1));
  Q = _mm256_fmadd_pd(Q, rr, _mm256_set1_pd(2.0));
  __m256d e = _mm256_div_pd(P, _mm256_sub_pd(Q, P));
  e = _mm256_fmadd_pd(_mm256_set1_pd(2.0), e, _mm256_set1_pd(1.0));
  return _mm256_mul_pd(e, pow2i(n));
}

// Natural log for strictly positive normal inputs (probabilities here).
inline __m256d log_pd(__m256d x) {
  const __m256i exp_mask = _mm256_set1_epi64x(0x7ffull << 52);
  const __m256i mant_mask = _mm256_set1_epi64x((1ull << 52) - 1);
  const __m256i half_bits = _mm256_set1_epi64x(0x3fe0000000000000ull);  // 0.5

  __m256i bits = _mm256_castpd_si256(x);
  __m256i e_i = _mm256_sub_epi64(
      _mm256_srli_epi64(_mm256_and_si256(bits, exp_mask), 52), _mm256_set1_epi64x(1022));
  __m256d m = _mm256_castsi256_pd(
      _mm256_or_si256(_mm256_and_si256(bits, mant_mask), half_bits));  // [0.5, 1)

  // int64 -> double, exponents are tiny so the int32 path is exact
  alignas(32) long long ev[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(ev), e_i);
  __m256d e = _mm256_set_pd(double(ev[3]), double(ev[2]), double(ev[1]), double(ev[0]));

  const __m256d sqrth = _mm256_set1_pd(0.70710678118654752440);
  __m256d below = _mm256_cmp_pd(m, sqrth, _CMP_LT_OQ);
  e = _mm256_sub_pd(e, _mm256_and_pd(below, _mm256_set1_pd(1.0)));
  // m < sqrt(1/2): use 2m - 1, else m - 1
  __m256d xm = _mm256_sub_pd(
      _mm256_add_pd(m, _mm256_and_pd(below, m)), _mm256_set1_pd(1.0));

  __m256d z = _mm256_mul_pd(xm, xm);
  __m256d P = poly5(xm, 1.01875663804580931796e-4, 4.97494994976747001425e-1,
                    4.70579119878881725854e0, 1.44989225341610930846e1,
                    1.79368678507819816313e1, 7.70838733755885391666e0);
  __m256d Q = _mm256_add_pd(xm, _mm256_set1_pd(1.12873587189167450590e1));
  Q = _mm256_fmadd_pd(Q, xm, _mm256_set1_pd(4.52279145837532221105e1));
  Q = _mm256_fmadd_pd(Q, xm, _mm256_set1_pd(8.29875266912776603211e1));
  Q = _mm256_fmadd_pd(Q, xm, _mm256_set1_pd(7.11544750618563894466e1));
  Q = _mm256_fmadd_pd(Q, xm, _mm256_set1_pd(2.31251620126765340583e1));

  __m256d y = _mm256_mul_pd(_mm256_mul_pd(xm, z), _mm256_div_pd(P, Q));
  y = _mm256_fnmadd_pd(e, _mm256_set1_pd(2.121944400546905827679e-4), y);
  y = _mm256_fnmadd_pd(_mm256_set1_pd(0.5), z, y);
  __m256d res = _mm256_add_pd(xm, y);
  res = _mm256_fmadd_pd(e, _mm256_set1_pd(0.693359375), res);
  return res;
}

void range3_avx2(const double* x, const double* y, const double* z, double* out,
                 std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vx = _mm256_loadu_pd(x + i);
    __m256d vy = _mm256_loadu_pd(y + i);
    __m256d vz = _mm256_loadu_pd(z + i);
    __m256d s = _mm256_mul_pd(vx, vx);
    s = _mm256_fmadd_pd(vy, vy, s);
    s = _mm256_fmadd_pd(vz, vz, s);
    _mm256_storeu_pd(out + i, _mm256_sqrt_pd(s));
  }
  for (; i < n; ++i) out[i] = std::sqrt(x[i] * x[i] + y[i] * y[i] + z[i] * z[i]);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double s = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void exp_avx2(const double* x, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, exp_pd(_mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = std::exp(x[i]);
}

void log_avx2(const double* x, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, log_pd(_mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = std::log(x[i]);
}

void softmax2_avx2(const double* a0, const double* a1, double* xi, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v0 = _mm256_loadu_pd(a0 + i);
    __m256d v1 = _mm256_loadu_pd(a1 + i);
    __m256d m = _mm256_max_pd(v0, v1);
    __m256d e0 = exp_pd(_mm256_sub_pd(v0, m));
    __m256d e1 = exp_pd(_mm256_sub_pd(v1, m));
    _mm256_storeu_pd(xi + i, _mm256_div_pd(e1, _mm256_add_pd(e0, e1)));
  }
  for (; i < n; ++i) {
    double m = a0[i] > a1[i] ? a0[i] : a1[i];
    double e0 = std::exp(a0[i] - m);
    double e1 = std::exp(a1[i] - m);
    xi[i] = e1 / (e0 + e1);
  }
}

void logodds_avx2(double* L, const double* xi, double prior_logodds, std::size_t n) {
  const __m256d lo = _mm256_set1_pd(1e-6);
  const __m256d hi = _mm256_set1_pd(1.0 - 1e-6);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d prior = _mm256_set1_pd(prior_logodds);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d p = _mm256_min_pd(_mm256_max_pd(_mm256_loadu_pd(xi + i), lo), hi);
    __m256d odds = _mm256_div_pd(p, _mm256_sub_pd(one, p));
    __m256d upd = _mm256_sub_pd(log_pd(odds), prior);
    _mm256_storeu_pd(L + i, _mm256_add_pd(_mm256_loadu_pd(L + i), upd));
  }
  for (; i < n; ++i) {
    double p = xi[i] < 1e-6 ? 1e-6 : (xi[i] > 1.0 - 1e-6 ? 1.0 - 1e-6 : xi[i]);
    L[i] += std::log(p / (1.0 - p)) - prior_logodds;
  }
}

void sigmoid_avx2(const double* L, double* p, std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d e = exp_pd(_mm256_sub_pd(_mm256_setzero_pd(), _mm256_loadu_pd(L + i)));
    _mm256_storeu_pd(p + i, _mm256_div_pd(one, _mm256_add_pd(one, e)));
  }
  for (; i < n; ++i) p[i] = 1.0 / (1.0 + std::exp(-L[i]));
}

}  // namespace

namespace detail {
const Ops avx2_ops = {range3_avx2, dot_avx2,     axpy_avx2,    exp_avx2,
                      log_avx2,    softmax2_avx2, logodds_avx2, sigmoid_avx2};
}  // namespace detail

}  // namespace lidarsem::kernels

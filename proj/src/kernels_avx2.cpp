// AVX2+FMA variants of the inner-loop kernels. Compiled with -mavx2 -mfma;
// only reached through the runtime dispatch in kernels.cpp.

#include "eprlab/kernels.hpp"

#include <cmath>
#include <cstdint>
#include <immintrin.h>

namespace eprlab::kernels {
namespace {

// ---- vector exp, Cephes rational approximation ----------------------------
// e^x = 2^n * e^r with r = x - n*ln2 reduced to [-ln2/2, ln2/2], then
// e^r = 1 + 2r P(r^2) / (Q(r^2) - r P(r^2)). ~1 ulp over the reduced range.

constexpr double kLog2E = 1.4426950408889634073599;
constexpr double kC1 = 6.93145751953125e-1;
constexpr double kC2 = 1.42860682030941723212e-6;

constexpr double kExpP0 = 1.26177193074810590878e-4;
constexpr double kExpP1 = 3.02994407707441961300e-2;
constexpr double kExpP2 = 9.99999999999999999910e-1;
constexpr double kExpQ0 = 3.00198505138664455042e-6;
constexpr double kExpQ1 = 2.52448340349684104192e-3;
constexpr double kExpQ2 = 2.27265548208155028766e-1;
constexpr double kExpQ3 = 2.00000000000000000005e0;

inline __m256d exp4(__m256d x) {
  const __m256d underflow = _mm256_cmp_pd(x, _mm256_set1_pd(-708.0), _CMP_LT_OQ);
  x = _mm256_min_pd(x, _mm256_set1_pd(709.0));

  const __m256d px =
      _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(kLog2E)),
                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  const __m128i n32 = _mm256_cvtpd_epi32(px);

  x = _mm256_fnmadd_pd(px, _mm256_set1_pd(kC1), x);
  x = _mm256_fnmadd_pd(px, _mm256_set1_pd(kC2), x);

  const __m256d xx = _mm256_mul_pd(x, x);
  __m256d p = _mm256_set1_pd(kExpP0);
  p = _mm256_fmadd_pd(p, xx, _mm256_set1_pd(kExpP1));
  p = _mm256_fmadd_pd(p, xx, _mm256_set1_pd(kExpP2));
  p = _mm256_mul_pd(p, x);
  __m256d q = _mm256_set1_pd(kExpQ0);
  q = _mm256_fmadd_pd(q, xx, _mm256_set1_pd(kExpQ1));
  q = _mm256_fmadd_pd(q, xx, _mm256_set1_pd(kExpQ2));
  q = _mm256_fmadd_pd(q, xx, _mm256_set1_pd(kExpQ3));
  const __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  __m256d y = _mm256_fmadd_pd(_mm256_set1_pd(2.0), e, _mm256_set1_pd(1.0));

  // scale by 2^n through the exponent field
  const __m256i n64 = _mm256_cvtepi32_epi64(n32);
  const __m256i bits =
      _mm256_slli_epi64(_mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
  y = _mm256_mul_pd(y, _mm256_castsi256_pd(bits));
  return _mm256_andnot_pd(underflow, y);
}

// ---- vector sincos, Cephes octant reduction --------------------------------

constexpr double kDP1 = 7.85398125648498535156e-1;
constexpr double kDP2 = 3.77489470793079817668e-8;
constexpr double kDP3 = 2.69515142907905952645e-15;
constexpr double kFourOverPi = 1.27323954473516268615;

constexpr double kSinC[6] = {
    1.58962301576546568060e-10, -2.50507477628578072866e-8,
    2.75573136213857245213e-6,  -1.98412698295895385996e-4,
    8.33333333332211858878e-3,  -1.66666666666666307295e-1};
constexpr double kCosC[6] = {
    -1.13585365213876817300e-11, 2.08757008419747316778e-9,
    -2.75573141792967388112e-7,  2.48015872888517179954e-5,
    -1.38888888888730564116e-3,  4.16666666666665929218e-2};

inline __m256d poly5(__m256d z, const double* c) {
  __m256d p = _mm256_set1_pd(c[0]);
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(c[1]));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(c[2]));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(c[3]));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(c[4]));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(c[5]));
  return p;
}

inline void sincos4(__m256d x, __m256d* s_out, __m256d* c_out) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const __m256d xa = _mm256_andnot_pd(sign_mask, x);
  const __m256d x_neg = _mm256_and_pd(x, sign_mask);

  // octant index, rounded up to even
  const __m256d q =
      _mm256_floor_pd(_mm256_mul_pd(xa, _mm256_set1_pd(kFourOverPi)));
  __m128i j32 = _mm256_cvttpd_epi32(q);
  j32 = _mm_add_epi32(j32, _mm_and_si128(j32, _mm_set1_epi32(1)));
  const __m256d y = _mm256_cvtepi32_pd(j32);
  j32 = _mm_and_si128(j32, _mm_set1_epi32(7));

  // j in {0,2,4,6}: >=4 flips both results, j&3==2 swaps the polynomials
  const __m128i ge4_32 = _mm_cmpgt_epi32(j32, _mm_set1_epi32(3));
  const __m128i swap_32 = _mm_cmpeq_epi32(_mm_and_si128(j32, _mm_set1_epi32(3)),
                                          _mm_set1_epi32(2));
  const __m256d ge4 = _mm256_castsi256_pd(_mm256_cvtepi32_epi64(ge4_32));
  const __m256d swap = _mm256_castsi256_pd(_mm256_cvtepi32_epi64(swap_32));

  // extended-precision argument reduction
  __m256d z = _mm256_fnmadd_pd(y, _mm256_set1_pd(kDP1), xa);
  z = _mm256_fnmadd_pd(y, _mm256_set1_pd(kDP2), z);
  z = _mm256_fnmadd_pd(y, _mm256_set1_pd(kDP3), z);
  const __m256d zz = _mm256_mul_pd(z, z);

  const __m256d sinp =
      _mm256_fmadd_pd(_mm256_mul_pd(z, zz), poly5(zz, kSinC), z);
  __m256d cosp = _mm256_fnmadd_pd(zz, _mm256_set1_pd(0.5), _mm256_set1_pd(1.0));
  cosp = _mm256_fmadd_pd(_mm256_mul_pd(zz, zz), poly5(zz, kCosC), cosp);

  __m256d s = _mm256_blendv_pd(sinp, cosp, swap);
  __m256d c = _mm256_blendv_pd(cosp, sinp, swap);

  const __m256d sin_flip = _mm256_xor_pd(x_neg, _mm256_and_pd(ge4, sign_mask));
  const __m256d cos_flip =
      _mm256_xor_pd(_mm256_and_pd(ge4, sign_mask), _mm256_and_pd(swap, sign_mask));
  *s_out = _mm256_xor_pd(s, sin_flip);
  *c_out = _mm256_xor_pd(c, cos_flip);
}

// ---- backend entry points ---------------------------------------------------

void vexp_avx2(const double* x, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, exp4(_mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = std::exp(x[i]);
}

void gaussian_avx2(const double* x, double* out, std::size_t n, double center,
                   double neg_coeff) {
  const __m256d c = _mm256_set1_pd(center);
  const __m256d k = _mm256_set1_pd(neg_coeff);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d t = _mm256_sub_pd(_mm256_loadu_pd(x + i), c);
    _mm256_storeu_pd(out + i, exp4(_mm256_mul_pd(k, _mm256_mul_pd(t, t))));
  }
  for (; i < n; ++i) {
    const double t = x[i] - center;
    out[i] = std::exp(neg_coeff * t * t);
  }
}

void convolve_same_avx2(const double* src, std::size_t n, const double* kernel,
                        std::size_t taps, double* out) {
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(taps / 2);
  const std::ptrdiff_t sn = static_cast<std::ptrdiff_t>(n);
  const std::ptrdiff_t st = static_cast<std::ptrdiff_t>(taps);

  auto edge = [&](std::ptrdiff_t i) {
    const std::ptrdiff_t t0 = std::max<std::ptrdiff_t>(0, half - i);
    const std::ptrdiff_t t1 = std::min(st, sn + half - i);
    double acc = 0.0;
    for (std::ptrdiff_t t = t0; t < t1; ++t) acc += kernel[t] * src[i + t - half];
    out[i] = acc;
  };

  const std::ptrdiff_t lo = std::min(half, sn);
  const std::ptrdiff_t hi = std::max(lo, sn - (st - 1 - half));
  for (std::ptrdiff_t i = 0; i < lo; ++i) edge(i);
  for (std::ptrdiff_t i = hi; i < sn; ++i) edge(i);

  std::ptrdiff_t i = lo;
  for (; i + 4 <= hi; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    const double* base = src + i - half;
    for (std::ptrdiff_t t = 0; t < st; ++t)
      acc = _mm256_fmadd_pd(_mm256_set1_pd(kernel[t]),
                            _mm256_loadu_pd(base + t), acc);
    _mm256_storeu_pd(out + i, acc);
  }
  for (; i < hi; ++i) edge(i);
}

void weighted_trig_sum_avx2(const double* vals, const double* x, std::size_t n,
                            double freq, double* cos_out, double* sin_out) {
  const __m256d f = _mm256_set1_pd(freq);
  __m256d cacc = _mm256_setzero_pd();
  __m256d sacc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d s, c;
    sincos4(_mm256_mul_pd(f, _mm256_loadu_pd(x + i)), &s, &c);
    const __m256d v = _mm256_loadu_pd(vals + i);
    cacc = _mm256_fmadd_pd(v, c, cacc);
    sacc = _mm256_fmadd_pd(v, s, sacc);
  }
  if (i < n) {  // pad the tail, zero weights contribute nothing
    alignas(32) double xt[4] = {0, 0, 0, 0};
    alignas(32) double vt[4] = {0, 0, 0, 0};
    for (std::size_t t = i; t < n; ++t) {
      xt[t - i] = x[t];
      vt[t - i] = vals[t];
    }
    __m256d s, c;
    sincos4(_mm256_mul_pd(f, _mm256_load_pd(xt)), &s, &c);
    const __m256d v = _mm256_load_pd(vt);
    cacc = _mm256_fmadd_pd(v, c, cacc);
    sacc = _mm256_fmadd_pd(v, s, sacc);
  }
  alignas(32) double cbuf[4], sbuf[4];
  _mm256_store_pd(cbuf, cacc);
  _mm256_store_pd(sbuf, sacc);
  *cos_out = (cbuf[0] + cbuf[1]) + (cbuf[2] + cbuf[3]);
  *sin_out = (sbuf[0] + sbuf[1]) + (sbuf[2] + sbuf[3]);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  alignas(32) double buf[4];
  _mm256_store_pd(buf, acc);
  double r = (buf[0] + buf[1]) + (buf[2] + buf[3]);
  for (; i < n; ++i) r += a[i] * b[i];
  return r;
}

double sum_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  alignas(32) double buf[4];
  _mm256_store_pd(buf, acc);
  double r = (buf[0] + buf[1]) + (buf[2] + buf[3]);
  for (; i < n; ++i) r += x[i];
  return r;
}

double max_avx2(const double* x, std::size_t n) {
  if (n == 0) return 0.0;
  __m256d acc = _mm256_set1_pd(x[0]);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_max_pd(acc, _mm256_loadu_pd(x + i));
  alignas(32) double buf[4];
  _mm256_store_pd(buf, acc);
  double r = std::max(std::max(buf[0], buf[1]), std::max(buf[2], buf[3]));
  for (; i < n; ++i) r = std::max(r, x[i]);
  return r;
}

}  // namespace

const Backend* avx2_backend_impl() {
  static const Backend backend{
      "avx2",          vexp_avx2, gaussian_avx2, convolve_same_avx2,
      weighted_trig_sum_avx2, dot_avx2,  sum_avx2,      max_avx2,
  };
  return &backend;
}

}  // namespace eprlab::kernels

#include "eprlab/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace eprlab::kernels {
namespace {

void vexp_scalar(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(x[i]);
}

void gaussian_scalar(const double* x, double* out, std::size_t n,
                     double center, double neg_coeff) {
  for (std::size_t i = 0; i < n; ++i) {
    const double t = x[i] - center;
    out[i] = std::exp(neg_coeff * t * t);
  }
}

void convolve_same_scalar(const double* src, std::size_t n,
                          const double* kernel, std::size_t taps,
                          double* out) {
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(taps / 2);
  const std::ptrdiff_t sn = static_cast<std::ptrdiff_t>(n);
  for (std::ptrdiff_t i = 0; i < sn; ++i) {
    const std::ptrdiff_t t0 = std::max<std::ptrdiff_t>(0, half - i);
    const std::ptrdiff_t t1 =
        std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(taps), sn + half - i);
    double acc = 0.0;
    for (std::ptrdiff_t t = t0; t < t1; ++t) acc += kernel[t] * src[i + t - half];
    out[i] = acc;
  }
}

void weighted_trig_sum_scalar(const double* vals, const double* x,
                              std::size_t n, double freq,
                              double* cos_out, double* sin_out) {
  double c = 0.0, s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = freq * x[i];
    c += vals[i] * std::cos(a);
    s += vals[i] * std::sin(a);
  }
  *cos_out = c;
  *sin_out = s;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double max_scalar(const double* x, std::size_t n) {
  double m = n ? x[0] : 0.0;
  for (std::size_t i = 1; i < n; ++i) m = std::max(m, x[i]);
  return m;
}

}  // namespace

const Backend& scalar() {
  static const Backend backend{
      "scalar",          vexp_scalar, gaussian_scalar, convolve_same_scalar,
      weighted_trig_sum_scalar, dot_scalar,  sum_scalar,      max_scalar,
  };
  return backend;
}

}  // namespace eprlab::kernels

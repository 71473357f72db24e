#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace eprlab::kernels {

/// Dispatch table for the data-parallel inner loops. Every entry has a
/// scalar reference implementation; wider variants must agree with it to
/// tight floating-point tolerance (see tests/test_kernels.cpp).
struct Backend {
  const char* name;

  /// out[i] = exp(x[i])
  void (*vexp)(const double* x, double* out, std::size_t n);

  /// out[i] = exp(neg_coeff * (x[i] - center)^2), neg_coeff <= 0
  void (*gaussian)(const double* x, double* out, std::size_t n,
                   double center, double neg_coeff);

  /// Zero-padded same-size convolution. taps must be odd; the kernel is
  /// centered, out[i] = sum_t kernel[t] * src[i + t - taps/2].
  void (*convolve_same)(const double* src, std::size_t n,
                        const double* kernel, std::size_t taps, double* out);

  /// cos_out = sum_i vals[i]*cos(freq*x[i]), sin_out likewise with sin.
  void (*weighted_trig_sum)(const double* vals, const double* x,
                            std::size_t n, double freq,
                            double* cos_out, double* sin_out);

  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* x, std::size_t n);
  double (*max_value)(const double* x, std::size_t n);
};

/// Plain-loop reference backend (always available).
const Backend& scalar();

/// AVX2+FMA backend, or nullptr when the CPU lacks the instructions.
const Backend* avx2();

/// Backend selected at startup: widest supported one, unless the
/// EPRLAB_KERNELS environment variable names one explicitly.
const Backend& active();

/// All backends usable on this machine, scalar first.
std::vector<const Backend*> available();

/// Convenience wrappers over active().
inline void vexp(const double* x, double* out, std::size_t n) {
  active().vexp(x, out, n);
}
inline void gaussian(const double* x, double* out, std::size_t n,
                     double center, double neg_coeff) {
  active().gaussian(x, out, n, center, neg_coeff);
}
inline void convolve_same(const double* src, std::size_t n,
                          const double* kernel, std::size_t taps,
                          double* out) {
  active().convolve_same(src, n, kernel, taps, out);
}
inline void weighted_trig_sum(const double* vals, const double* x,
                              std::size_t n, double freq,
                              double* cos_out, double* sin_out) {
  active().weighted_trig_sum(vals, x, n, freq, cos_out, sin_out);
}
inline double dot(const double* a, const double* b, std::size_t n) {
  return active().dot(a, b, n);
}
inline double sum(const double* x, std::size_t n) { return active().sum(x, n); }
inline double max_value(const double* x, std::size_t n) {
  return active().max_value(x, n);
}

}  // namespace eprlab::kernels

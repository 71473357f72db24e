#include "eprlab/patterns.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "eprlab/kernels.hpp"

namespace eprlab {

namespace {

constexpr double kQuadConvergenceTol = 1e-4;

struct Segment {
  double lo, hi;
};

// Smooth pieces of the transmission between [-halfwidth, halfwidth], skipping
// regions where it vanishes identically.
std::vector<Segment> smooth_segments(const Aperture& aperture,
                                     double halfwidth) {
  std::vector<double> cuts = transmission_breakpoints(aperture);
  cuts.push_back(-halfwidth);
  cuts.push_back(halfwidth);
  std::sort(cuts.begin(), cuts.end());
  std::vector<Segment> segments;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i];
    const double hi = cuts[i + 1];
    if (hi - lo <= 0.0) continue;
    if (transmission(aperture, 0.5 * (lo + hi)) == 0.0) continue;
    segments.push_back({lo, hi});
  }
  if (segments.empty())
    throw std::invalid_argument("aperture transmits nothing inside the window");
  return segments;
}

// Trapezoid abscissas and weights over the smooth segments, with the weights
// folded into a value multiplier so downstream sums need no special casing.
struct QuadratureGrid {
  std::vector<double> x;
  std::vector<double> w;
};

QuadratureGrid segmented_trapezoid(const std::vector<Segment>& segments,
                                   double step) {
  QuadratureGrid q;
  for (const Segment& s : segments) {
    const double len = s.hi - s.lo;
    const int n = std::max(9, static_cast<int>(std::ceil(len / step)) + 1);
    const double h = len / (n - 1);
    for (int i = 0; i < n; ++i) {
      q.x.push_back(s.lo + i * h);
      q.w.push_back((i == 0 || i == n - 1) ? 0.5 * h : h);
    }
  }
  return q;
}

double transform_halfwidth(const Aperture& aperture) {
  return std::visit(
      [](const auto& a) -> double {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, DoubleSlitEffective>) {
          return 6.0 * a.mode_waist_mm;
        } else if constexpr (std::is_same_v<T, RectSlit>) {
          return 0.5 * a.width_mm;
        } else if constexpr (std::is_same_v<T, GaussianPinhole>) {
          return 6.0 * a.waist_mm;
        } else {
          throw std::invalid_argument(
              "open aperture has no integrable transmission");
        }
      },
      aperture);
}

void renormalize_to_peak(std::vector<double>& values) {
  const double peak = kernels::max_value(values.data(), values.size());
  if (!(peak > 0.0))
    throw std::invalid_argument("pattern is identically zero, cannot normalize");
  for (double& v : values) v /= peak;
}

PatternCurve make_curve(const Grid& grid, std::vector<double> values,
                        PatternKind kind) {
  PatternCurve curve;
  curve.positions = grid.positions();
  curve.values = std::move(values);
  curve.kind = kind;
  curve.normalization = Normalization::max_one;
  return curve;
}

}  // namespace

std::vector<double> Grid::positions() const {
  validate();
  std::vector<double> p(points);
  for (int i = 0; i < points; ++i) p[i] = position(i);
  return p;
}

void Grid::validate() const {
  if (points < 2) throw std::invalid_argument("grid needs at least 2 points");
  if (!(max_mm > min_mm)) throw std::invalid_argument("grid bounds reversed");
  if (!std::isfinite(min_mm) || !std::isfinite(max_mm))
    throw std::invalid_argument("grid bounds must be finite");
}

double PatternCurve::dx() const {
  if (positions.size() < 2)
    throw std::invalid_argument("curve needs at least 2 points");
  return (positions.back() - positions.front()) /
         static_cast<double>(positions.size() - 1);
}

double PatternCurve::value_at(double x_mm) const {
  const double step = dx();
  const double t = (x_mm - positions.front()) / step;
  if (t <= 0.0) return values.front();
  const double last = static_cast<double>(values.size() - 1);
  if (t >= last) return values.back();
  const auto i = static_cast<std::size_t>(t);
  const double frac = t - static_cast<double>(i);
  return values[i] + frac * (values[i + 1] - values[i]);
}

void PatternCurve::validate() const {
  if (positions.size() != values.size())
    throw std::invalid_argument("positions/values size mismatch");
  if (positions.size() < 2)
    throw std::invalid_argument("curve needs at least 2 points");
  const double step = dx();
  if (!(step > 0.0)) throw std::invalid_argument("positions must increase");
  for (std::size_t i = 0; i + 1 < positions.size(); ++i) {
    const double gap = positions[i + 1] - positions[i];
    if (std::abs(gap - step) > 1e-9 * std::max(1.0, std::abs(step)))
      throw std::invalid_argument("positions must be uniformly spaced");
  }
  for (double v : values)
    if (!(v >= 0.0)) throw std::invalid_argument("curve values must be >= 0");
}

std::vector<double> gaussian_kernel(double dx, double sigma) {
  if (!(dx > 0.0)) throw std::invalid_argument("kernel step must be positive");
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw std::invalid_argument("kernel sigma must be >= 0");
  const int half = static_cast<int>(std::ceil(8.0 * sigma / dx));
  if (half < 1) return {1.0};
  std::vector<double> k(2 * half + 1);
  const double inv = -0.5 / (sigma * sigma);
  for (int i = -half; i <= half; ++i)
    k[i + half] = std::exp(inv * (i * dx) * (i * dx));
  const double total = kernels::sum(k.data(), k.size());
  for (double& v : k) v /= total;
  return k;
}

std::vector<double> detector_intensity_kernel(const Aperture& detector,
                                              double dx) {
  validate_aperture(detector);
  if (std::holds_alternative<OpenAperture>(detector)) return {1.0};
  if (const auto* slit = std::get_if<RectSlit>(&detector)) {
    // cell-overlap discretization keeps the effective width exact even when
    // the slit is not an integer number of cells
    const double half_cells = 0.5 * slit->width_mm / dx;
    if (half_cells <= 0.5) return {1.0};
    const int m = static_cast<int>(std::ceil(half_cells - 0.5));
    std::vector<double> k(2 * m + 1);
    for (int t = -m; t <= m; ++t) {
      const double lo = std::max(t - 0.5, -half_cells);
      const double hi = std::min(t + 0.5, half_cells);
      k[t + m] = std::max(0.0, hi - lo);
    }
    const double total = kernels::sum(k.data(), k.size());
    for (double& v : k) v /= total;
    return k;
  }
  if (const auto* pinhole = std::get_if<GaussianPinhole>(&detector)) {
    // |exp(-x^2/w^2)|^2 is a Gaussian of sigma w/2
    return gaussian_kernel(dx, 0.5 * pinhole->waist_mm);
  }
  // generic: sample |t|^2 across its transform window
  const double half_w = transform_halfwidth(detector);
  const int half = static_cast<int>(std::ceil(half_w / dx));
  if (half < 1) return {1.0};
  std::vector<double> k(2 * half + 1);
  for (int i = -half; i <= half; ++i) {
    const double t = transmission(detector, i * dx);
    k[i + half] = t * t;
  }
  const double total = kernels::sum(k.data(), k.size());
  if (!(total > 0.0)) return {1.0};
  for (double& v : k) v /= total;
  return k;
}

PatternCurve ideal_ghost_image(const Aperture& aperture, const Grid& grid) {
  validate_aperture(aperture);
  grid.validate();
  const double feature = characteristic_width(aperture);
  if (std::isfinite(feature) && feature / grid.dx() < 16.0)
    throw std::invalid_argument(
        "grid too coarse: fewer than 16 points across the aperture feature");
  std::vector<double> values(grid.points);
  for (int i = 0; i < grid.points; ++i) {
    const double t = transmission(aperture, grid.position(i));
    values[i] = t * t;
  }
  renormalize_to_peak(values);
  return make_curve(grid, std::move(values), PatternKind::image);
}

PatternCurve ideal_ghost_interference(const Aperture& aperture,
                                      double lambda_nm, double f2_mm,
                                      const Grid& grid) {
  validate_aperture(aperture);
  grid.validate();
  const double half_w = transform_halfwidth(aperture);
  const auto segments = smooth_segments(aperture, half_w);
  double total_len = 0.0;
  for (const Segment& s : segments) total_len += s.hi - s.lo;
  const QuadratureGrid q = segmented_trapezoid(segments, total_len / 4096.0);

  std::vector<double> weighted(q.x.size());
  for (std::size_t j = 0; j < q.x.size(); ++j)
    weighted[j] = transmission(aperture, q.x[j]) * q.w[j];

  std::vector<double> values(grid.points);
  for (int i = 0; i < grid.points; ++i) {
    const double f = focal_plane_frequency(grid.position(i), lambda_nm, f2_mm);
    double c = 0.0, s = 0.0;
    kernels::weighted_trig_sum(weighted.data(), q.x.data(), q.x.size(), f, &c,
                               &s);
    values[i] = c * c + s * s;
  }
  renormalize_to_peak(values);
  return make_curve(grid, std::move(values), PatternKind::interference);
}

PatternCurve blurred_pattern(const PatternCurve& ideal, double blur_sigma_mm,
                             const Aperture& detector) {
  ideal.validate();
  if (!(blur_sigma_mm >= 0.0) || !std::isfinite(blur_sigma_mm))
    throw std::invalid_argument("blur sigma must be >= 0");
  const double span = ideal.max_position() - ideal.min_position();
  if (6.0 * blur_sigma_mm > 0.5 * span)
    throw std::invalid_argument("blur larger than the grid window");

  const double step = ideal.dx();
  std::vector<double> out = ideal.values;
  std::vector<double> tmp(out.size());

  const std::vector<double> gk = gaussian_kernel(step, blur_sigma_mm);
  if (gk.size() > 1) {
    kernels::convolve_same(out.data(), out.size(), gk.data(), gk.size(),
                           tmp.data());
    out.swap(tmp);
  }
  const std::vector<double> dk = detector_intensity_kernel(detector, step);
  if (dk.size() > 1) {
    kernels::convolve_same(out.data(), out.size(), dk.data(), dk.size(),
                           tmp.data());
    out.swap(tmp);
  }
  renormalize_to_peak(out);

  PatternCurve curve = ideal;
  curve.values = std::move(out);
  return curve;
}

PatternCurve predicted_image(const DoubleGaussianState& state,
                             const Aperture& aperture,
                             const OpticsConfig& optics,
                             const Aperture& detector, const Grid& grid) {
  optics.validate();
  const double blur = std::abs(optics.magnification_imaging_arm) *
                      std::sqrt(marginal_variances(state).var_x_minus);
  return blurred_pattern(ideal_ghost_image(aperture, grid), blur, detector);
}

PatternCurve predicted_interference(const DoubleGaussianState& state,
                                    const Aperture& aperture,
                                    const OpticsConfig& optics,
                                    const Aperture& detector,
                                    const Grid& grid) {
  optics.validate();
  const double blur = focal_plane_position(
      std::sqrt(marginal_variances(state).var_p_plus), optics.lambda_nm,
      optics.f2_mm);
  return blurred_pattern(
      ideal_ghost_interference(aperture, optics.lambda_nm, optics.f2_mm, grid),
      blur, detector);
}

namespace {

std::vector<double> oracle_image_values(const DoubleGaussianState& state,
                                        const Aperture& aperture,
                                        const Grid& x1_grid,
                                        const Aperture& detector,
                                        double magnification, double step) {
  const double half_w = transform_halfwidth(aperture);
  const QuadratureGrid q =
      segmented_trapezoid(smooth_segments(aperture, half_w), step);
  const std::size_t n = q.x.size();

  const double sm = state.sigma_minus();
  const double sp = state.sigma_plus();
  const double alpha = 0.5 / (sm * sm);
  const double beta = 0.5 / (sp * sp);
  const double sum_coef = alpha + beta;
  const double cross_coef = 2.0 * (alpha - beta);

  // weighted object intensity and the x2-only exponent piece
  std::vector<double> g2w(n), base(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = transmission(aperture, q.x[j]);
    g2w[j] = t * t * q.w[j];
    base[j] = -sum_coef * q.x[j] * q.x[j];
  }

  std::vector<double> arg(n), ex(n);
  std::vector<double> values(x1_grid.points);
  for (int i = 0; i < x1_grid.points; ++i) {
    const double x1 = x1_grid.position(i) / magnification;
    const double c1 = cross_coef * x1;
    const double c0 = -sum_coef * x1 * x1;
    for (std::size_t j = 0; j < n; ++j) arg[j] = base[j] + c1 * q.x[j] + c0;
    kernels::vexp(arg.data(), ex.data(), n);
    values[i] = kernels::dot(ex.data(), g2w.data(), n);
  }

  const std::vector<double> dk =
      detector_intensity_kernel(detector, x1_grid.dx());
  if (dk.size() > 1) {
    std::vector<double> tmp(values.size());
    kernels::convolve_same(values.data(), values.size(), dk.data(), dk.size(),
                           tmp.data());
    values.swap(tmp);
  }
  renormalize_to_peak(values);
  return values;
}

std::vector<double> oracle_interference_values(const DoubleGaussianState& state,
                                               const Aperture& aperture,
                                               const OpticsConfig& optics,
                                               const Grid& focal_grid,
                                               const Aperture& detector,
                                               double step) {
  const double half_w = transform_halfwidth(aperture);
  const QuadratureGrid q =
      segmented_trapezoid(smooth_segments(aperture, half_w), step);
  const std::size_t n = q.x.size();

  const double sm = state.sigma_minus();
  const double sp = state.sigma_plus();
  const double qm = 0.25 / (sm * sm);
  const double qp = 0.25 / (sp * sp);
  const double a = qm + qp;
  // gamma = a - h^2/a rewritten cancellation-free
  const double gamma = 4.0 * qm * qp / a;
  const double mu = (qm - qp) / a;

  std::vector<double> weighted(n);
  for (std::size_t j = 0; j < n; ++j)
    weighted[j] = transmission(aperture, q.x[j]) *
                  std::exp(-gamma * q.x[j] * q.x[j]) * q.w[j];

  std::vector<double> values(focal_grid.points);
  for (int i = 0; i < focal_grid.points; ++i) {
    const double p = focal_plane_frequency(focal_grid.position(i),
                                           optics.lambda_nm, optics.f2_mm);
    double c = 0.0, s = 0.0;
    kernels::weighted_trig_sum(weighted.data(), q.x.data(), n, mu * p, &c, &s);
    const double env = std::exp(-p * p / (4.0 * a));
    values[i] = env * env * (c * c + s * s);
  }

  const std::vector<double> dk =
      detector_intensity_kernel(detector, focal_grid.dx());
  if (dk.size() > 1) {
    std::vector<double> tmp(values.size());
    kernels::convolve_same(values.data(), values.size(), dk.data(), dk.size(),
                           tmp.data());
    values.swap(tmp);
  }
  renormalize_to_peak(values);
  return values;
}

double max_abs_difference(const std::vector<double>& a,
                          const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

PatternCurve oracle_image_pattern(const DoubleGaussianState& state,
                                  const Aperture& aperture,
                                  const Grid& x1_grid, const Aperture& detector,
                                  double magnification) {
  if (state.dimension() != 1)
    throw std::invalid_argument("oracle patterns need a dimension-1 state");
  if (!(magnification > 0.0))
    throw std::invalid_argument("magnification must be positive");
  validate_aperture(aperture);
  x1_grid.validate();

  const double feature = characteristic_width(aperture);
  const double step =
      std::min(state.sigma_minus() / 32.0,
               std::isfinite(feature) ? feature / 256.0 : 1e9);
  const std::vector<double> coarse = oracle_image_values(
      state, aperture, x1_grid, detector, magnification, step);
  const std::vector<double> fine = oracle_image_values(
      state, aperture, x1_grid, detector, magnification, 0.5 * step);
  if (max_abs_difference(coarse, fine) > kQuadConvergenceTol)
    throw std::runtime_error("image oracle quadrature did not converge");
  return make_curve(x1_grid, std::move(fine), PatternKind::image);
}

PatternCurve oracle_interference_pattern(const DoubleGaussianState& state,
                                         const Aperture& aperture,
                                         const OpticsConfig& optics,
                                         const Grid& focal_grid,
                                         const Aperture& detector) {
  if (state.dimension() != 1)
    throw std::invalid_argument("oracle patterns need a dimension-1 state");
  validate_aperture(aperture);
  optics.validate();
  focal_grid.validate();

  const double feature = characteristic_width(aperture);
  // oscillation wavelength at the window edge bounds the usable step
  const double p_max = std::abs(focal_plane_frequency(
      std::max(std::abs(focal_grid.min_mm), std::abs(focal_grid.max_mm)),
      optics.lambda_nm, optics.f2_mm));
  const double osc = p_max > 0.0 ? 2.0 * std::numbers::pi / p_max : 1e9;
  const double step = std::min(std::isfinite(feature) ? feature / 256.0 : 1e9,
                               osc / 16.0);
  const std::vector<double> coarse = oracle_interference_values(
      state, aperture, optics, focal_grid, detector, step);
  const std::vector<double> fine = oracle_interference_values(
      state, aperture, optics, focal_grid, detector, 0.5 * step);
  if (max_abs_difference(coarse, fine) > kQuadConvergenceTol)
    throw std::runtime_error("interference oracle quadrature did not converge");
  return make_curve(focal_grid, std::move(fine), PatternKind::interference);
}

double sup_norm_difference(const PatternCurve& a, const PatternCurve& b) {
  if (a.values.size() != b.values.size())
    throw std::invalid_argument("curves have different grids");
  if (std::abs(a.positions.front() - b.positions.front()) > 1e-9 ||
      std::abs(a.positions.back() - b.positions.back()) > 1e-9)
    throw std::invalid_argument("curves have different grids");
  return max_abs_difference(a.values, b.values);
}

}  // namespace eprlab

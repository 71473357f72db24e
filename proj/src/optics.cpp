#include "eprlab/optics.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace eprlab {

namespace {
void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw std::invalid_argument(std::string(what) + " must be positive");
}
}  // namespace

void validate_aperture(const Aperture& aperture) {
  std::visit(
      [](const auto& a) {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, DoubleSlitEffective>) {
          require_positive(a.bar_width_mm, "bar width");
          require_positive(a.mode_waist_mm, "mode waist");
        } else if constexpr (std::is_same_v<T, RectSlit>) {
          require_positive(a.width_mm, "slit width");
        } else if constexpr (std::is_same_v<T, GaussianPinhole>) {
          require_positive(a.waist_mm, "pinhole waist");
        }
      },
      aperture);
}

double transmission(const Aperture& aperture, double x_mm) {
  return std::visit(
      [x_mm](const auto& a) -> double {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, DoubleSlitEffective>) {
          if (std::abs(x_mm) < 0.5 * a.bar_width_mm) return 0.0;
          return std::exp(-x_mm * x_mm / (a.mode_waist_mm * a.mode_waist_mm));
        } else if constexpr (std::is_same_v<T, RectSlit>) {
          return std::abs(x_mm) <= 0.5 * a.width_mm ? 1.0 : 0.0;
        } else if constexpr (std::is_same_v<T, GaussianPinhole>) {
          return std::exp(-x_mm * x_mm / (a.waist_mm * a.waist_mm));
        } else {
          return 1.0;
        }
      },
      aperture);
}

std::vector<double> transmission_breakpoints(const Aperture& aperture) {
  return std::visit(
      [](const auto& a) -> std::vector<double> {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, DoubleSlitEffective>) {
          return {-0.5 * a.bar_width_mm, 0.5 * a.bar_width_mm};
        } else if constexpr (std::is_same_v<T, RectSlit>) {
          return {-0.5 * a.width_mm, 0.5 * a.width_mm};
        } else {
          return {};
        }
      },
      aperture);
}

double characteristic_width(const Aperture& aperture) {
  return std::visit(
      [](const auto& a) -> double {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, DoubleSlitEffective>) {
          return std::min(a.bar_width_mm, a.mode_waist_mm);
        } else if constexpr (std::is_same_v<T, RectSlit>) {
          return a.width_mm;
        } else if constexpr (std::is_same_v<T, GaussianPinhole>) {
          return a.waist_mm;
        } else {
          return std::numeric_limits<double>::infinity();
        }
      },
      aperture);
}

RayTransfer RayTransfer::then(const RayTransfer& next) const {
  return {next.a * a + next.b * c, next.a * b + next.b * d,
          next.c * a + next.d * c, next.c * b + next.d * d};
}

RayTransfer free_space(double distance_mm) {
  require_positive(distance_mm, "propagation distance");
  return {1.0, distance_mm, 0.0, 1.0};
}

RayTransfer thin_lens(double focal_mm) {
  require_positive(focal_mm, "focal length");
  return {1.0, 0.0, -1.0 / focal_mm, 1.0};
}

RayTransfer four_f(double fa_mm, double fb_mm) {
  require_positive(fa_mm, "focal length");
  require_positive(fb_mm, "focal length");
  return {-fb_mm / fa_mm, 0.0, 0.0, -fa_mm / fb_mm};
}

void OpticsConfig::validate() const {
  require_positive(lambda_nm, "wavelength");
  require_positive(f1_mm, "f1");
  require_positive(f2_mm, "f2");
  require_positive(fc_mm, "fc");
  require_positive(magnification_imaging_arm, "imaging-arm magnification");
}

double focal_plane_position(double p_tilde, double lambda_nm, double f2_mm) {
  require_positive(lambda_nm, "wavelength");
  require_positive(f2_mm, "f2");
  const double lambda_mm = lambda_nm * 1e-6;
  return lambda_mm * f2_mm * p_tilde / (2.0 * std::numbers::pi);
}

double focal_plane_frequency(double x_mm, double lambda_nm, double f2_mm) {
  require_positive(lambda_nm, "wavelength");
  require_positive(f2_mm, "f2");
  const double lambda_mm = lambda_nm * 1e-6;
  return 2.0 * std::numbers::pi * x_mm / (lambda_mm * f2_mm);
}

}  // namespace eprlab

#pragma once

#include <variant>
#include <vector>

namespace eprlab {

// ---- apertures --------------------------------------------------------------

/// Blocking bar of width bar_width_mm centered on a collimated Gaussian mode
/// of waist mode_waist_mm: amplitude exp(-x^2/w0^2) outside the bar, zero
/// behind it. This is the object whose ghost image and ghost interference the
/// pipeline predicts.
struct DoubleSlitEffective {
  double bar_width_mm;
  double mode_waist_mm;
};

/// Hard detection slit, unit transmission across its width.
struct RectSlit {
  double width_mm;
};

/// Fiber-head acceptance, amplitude exp(-x^2/waist^2).
struct GaussianPinhole {
  double waist_mm;
};

struct OpenAperture {};

using Aperture =
    std::variant<DoubleSlitEffective, RectSlit, GaussianPinhole, OpenAperture>;

/// Throws std::invalid_argument on non-positive widths.
void validate_aperture(const Aperture& aperture);

/// Amplitude transmission in [0, 1] at transverse position x.
double transmission(const Aperture& aperture, double x_mm);

/// Positions where the transmission jumps; quadratures split their grids
/// here instead of stepping across the discontinuity.
std::vector<double> transmission_breakpoints(const Aperture& aperture);

/// Smallest feature length of the aperture, used for grid-resolution guards.
/// Open apertures have no scale and return +infinity.
double characteristic_width(const Aperture& aperture);

// ---- paraxial ray transfer ----------------------------------------------------

/// 2x2 ABCD map acting on (x, theta). Determinant is 1 for every element
/// built here and for any composition of them.
struct RayTransfer {
  double a, b, c, d;

  /// Composition: *this first, then next.
  RayTransfer then(const RayTransfer& next) const;
  double determinant() const { return a * d - b * c; }
};

RayTransfer free_space(double distance_mm);
RayTransfer thin_lens(double focal_mm);
/// Two-lens relay: [[-fb/fa, 0], [0, -fa/fb]].
RayTransfer four_f(double fa_mm, double fb_mm);

// ---- configuration and the lens momentum map ---------------------------------

struct OpticsConfig {
  double lambda_nm = 795.0;
  double f1_mm = 500.0;
  double f2_mm = 32.0;
  double fc_mm = 11.07;
  double magnification_imaging_arm = 1.0;

  void validate() const;
};

/// Back-focal-plane position of transverse wavenumber p_tilde (rad/mm):
/// x = lambda * f2 * p_tilde / (2 pi).
double focal_plane_position(double p_tilde, double lambda_nm, double f2_mm);

/// Inverse map: spatial frequency probed at focal-plane position x.
double focal_plane_frequency(double x_mm, double lambda_nm, double f2_mm);

}  // namespace eprlab

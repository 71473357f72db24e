#pragma once

#include <vector>

#include "eprlab/optics.hpp"
#include "eprlab/state.hpp"

namespace eprlab {

/// Uniform evaluation grid, endpoints included.
struct Grid {
  double min_mm = 0.0;
  double max_mm = 0.0;
  int points = 0;

  static Grid symmetric(double halfwidth_mm, int points) {
    return {-halfwidth_mm, halfwidth_mm, points};
  }
  double dx() const { return (max_mm - min_mm) / (points - 1); }
  double position(int i) const { return min_mm + i * dx(); }
  std::vector<double> positions() const;
  void validate() const;
};

enum class PatternKind { image, interference };
enum class Normalization { max_one, area_one };

/// A coincidence-rate profile over a uniform position grid.
struct PatternCurve {
  std::vector<double> positions;
  std::vector<double> values;
  PatternKind kind = PatternKind::image;
  Normalization normalization = Normalization::max_one;

  double dx() const;
  double min_position() const { return positions.front(); }
  double max_position() const { return positions.back(); }
  /// Linear interpolation, clamped to the edge values outside the grid.
  double value_at(double x_mm) const;
  void validate() const;
};

/// Unit-sum Gaussian kernel sampled on the grid step; {1} when sigma is not
/// resolvable at this step.
std::vector<double> gaussian_kernel(double dx, double sigma);

/// Unit-sum intensity acceptance |t|^2 of a detector aperture sampled on the
/// grid step; {1} for open or unresolvable detectors.
std::vector<double> detector_intensity_kernel(const Aperture& detector,
                                              double dx);

/// |transmission|^2 on the grid, peak-normalized. The dip of the double-slit
/// object sits at zero; twin maxima at the bar edges.
PatternCurve ideal_ghost_image(const Aperture& aperture, const Grid& grid);

/// |Fourier transform of the transmission|^2 mapped to the lens focal plane
/// (spatial frequency 2*pi*x/(lambda*f2)), peak-normalized, maximal at zero.
PatternCurve ideal_ghost_interference(const Aperture& aperture,
                                      double lambda_nm, double f2_mm,
                                      const Grid& grid);

/// Ideal curve convolved with a unit-area Gaussian of width blur_sigma and
/// with the detector acceptance, then re-normalized to peak 1.
PatternCurve blurred_pattern(const PatternCurve& ideal, double blur_sigma_mm,
                             const Aperture& detector);

/// Fit-model image prediction: blur sigma = |M| * sqrt(var_x_minus).
PatternCurve predicted_image(const DoubleGaussianState& state,
                             const Aperture& aperture,
                             const OpticsConfig& optics,
                             const Aperture& detector, const Grid& grid);

/// Fit-model interference prediction: blur sigma is the focal-plane footprint
/// lambda*f2*sqrt(var_p_plus)/(2*pi).
PatternCurve predicted_interference(const DoubleGaussianState& state,
                                    const Aperture& aperture,
                                    const OpticsConfig& optics,
                                    const Aperture& detector, const Grid& grid);

/// Exact image pattern straight from the wavefunction, free of the
/// Gaussian-convolution approximation: the joint position density weighted by
/// the object's intensity transmission, integrated over the object arm by
/// segmented quadrature, then detector-convolved. A doubled-grid convergence
/// check rejects unconverged quadratures.
PatternCurve oracle_image_pattern(const DoubleGaussianState& state,
                                  const Aperture& aperture,
                                  const Grid& x1_grid,
                                  const Aperture& detector,
                                  double magnification = 1.0);

/// Exact interference pattern from the wavefunction: single-mode projection
/// of the object arm (coherent amplitude integral), analytic transform over
/// the scanned arm, squared modulus mapped to the focal plane and convolved
/// with the fiber acceptance. Same convergence contract as the image oracle.
PatternCurve oracle_interference_pattern(const DoubleGaussianState& state,
                                         const Aperture& aperture,
                                         const OpticsConfig& optics,
                                         const Grid& focal_grid,
                                         const Aperture& detector);

/// Largest absolute difference between two curves sharing a grid.
double sup_norm_difference(const PatternCurve& a, const PatternCurve& b);

}  // namespace eprlab

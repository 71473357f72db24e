#pragma once

#include <optional>
#include <string>
#include <vector>

#include "eprlab/criteria.hpp"
#include "eprlab/optics.hpp"
#include "eprlab/patterns.hpp"
#include "eprlab/synth.hpp"

namespace eprlab {

struct FitResult {
  double amplitude = 0.0;
  double background = 0.0;
  double center_mm = 0.0;
  double blur_sigma_mm = 0.0;
  double amplitude_err = 0.0;
  double background_err = 0.0;
  double center_err = 0.0;
  double blur_sigma_err = 0.0;
  double chi2_per_dof = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Set when the data constrain the blur so weakly that its curvature row is
  /// numerically singular (flat scans and the like).
  bool blur_unbounded = false;
  std::string method = "gauss_newton";
};

struct FitOptions {
  int max_iterations = 200;
  double tolerance = 1e-10;  // relative cost change
  std::optional<FitResult> init;
};

/// Weighted least squares of background + amplitude * [ideal (*) Gaussian(blur)
/// (*) detector](x - center) against the scan, weights 1/max(counts, 1).
/// Damped Gauss-Newton with numerically differenced Jacobians; falls back to
/// simplex descent when the normal equations degenerate. Parameter errors come
/// from the inverse curvature at the optimum.
FitResult fit_pattern(const CoincidenceScan& scan, const PatternCurve& ideal,
                      const Aperture& detector, const FitOptions& options = {});

/// Same fit on real-valued data (noise-free pipelines).
FitResult fit_pattern_values(const std::vector<double>& positions,
                             const std::vector<double>& y,
                             const PatternCurve& ideal,
                             const Aperture& detector,
                             const FitOptions& options = {});

/// Detector scales subtracted in quadrature from the fitted blurs. Zero
/// widths attribute the whole fitted blur to the state.
struct DetectorWidths {
  double image_slit_mm = 0.0;
  double interference_fiber_waist_mm = 0.0;
};

struct ExtractedVariances {
  VarianceMeasurement measurement;
  /// Fitted blur below the detector resolution; the variance was clamped to
  /// zero (sub-resolution correlation).
  bool clamped_x = false;
  bool clamped_p = false;
};

/// (dx_-)^2 = max(0, blur_img^2 - (slit/sqrt(12))^2) / M^2 and
/// (dp_+)^2 = (2 pi / (lambda f2))^2 * max(0, blur_int^2 - (waist/2)^2),
/// uncertainties propagated first order from the fit errors.
ExtractedVariances extract_variances(const FitResult& image_fit,
                                     const FitResult& interference_fit,
                                     const OpticsConfig& optics,
                                     const DetectorWidths& widths);

}  // namespace eprlab

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "eprlab/optics.hpp"
#include "eprlab/patterns.hpp"
#include "eprlab/state.hpp"
#include "eprlab/synth.hpp"

namespace eprlab {

/// Thrown on malformed or inconsistent configuration input; the CLI maps it
/// to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ArmBudget {
  double peak_counts = 0.0;
  double snr = 30.0;  // accidental floor = peak / snr
  double duration_s = 0.0;

  CountBudget count_budget() const { return {peak_counts, 1.0 / snr}; }
};

struct ScanRange {
  double min_mm = 0.0;
  double max_mm = 0.0;
  double step_mm = 0.0;

  std::vector<double> positions() const;
};

struct GridSettings {
  // odd point counts keep the symmetry center on the grid
  double image_halfwidth_mm = 8.0;
  int image_points = 4097;
  double interference_halfwidth_mm = 0.1;
  int interference_points = 4097;
  /// Model resolution used inside fits; coarser than the output grids.
  int fit_points = 1025;
};

struct FitSettings {
  /// Convolve the detector acceptance into the fit model (and attribute the
  /// whole fitted blur to the state at extraction).
  bool model_detector = true;
  /// Quadrature-subtract the detector widths at extraction instead. Cannot be
  /// combined with model_detector, that would remove the detector twice.
  bool subtract_resolution = false;
  int max_iterations = 200;
  double tolerance = 1e-10;
};

/// Everything one run needs. Defaults reproduce the source experiment:
/// effective state of the photon-spin-wave row, storage broadening calibrated
/// to the second row, published optics and count budgets.
struct ExperimentConfig {
  double var_x_minus_mm2 = 0.230;
  double var_p_plus_per_mm2 = 0.807;

  StorageChannel storage{0.102, 0.632, 0.25};
  OpticsConfig optics{};

  double bar_width_mm = 1.04;
  double mode_waist_mm = 1.1;
  double slit_width_mm = 0.4;
  double fiber_waist_mm = 0.0025;

  ArmBudget budget_image{252.0, 30.0, 1000.0};
  ArmBudget budget_interference{344.0, 30.0, 200.0};
  ArmBudget budget_image_stored{219.0, 30.0, 3000.0};
  ArmBudget budget_interference_stored{290.0, 30.0, 500.0};

  ScanRange scan_image{-4.0, 4.0, 0.1};
  ScanRange scan_interference{-0.06, 0.06, 0.002};

  GridSettings grids{};
  FitSettings fit{};

  std::uint64_t seed = 20240809;

  void validate() const;

  DoubleGaussianState state() const;
  DoubleGaussianState stored_state() const;
  Aperture object_aperture() const;
  Aperture image_detector() const;
  Aperture interference_detector() const;
  Grid image_grid(int points = 0) const;
  Grid interference_grid(int points = 0) const;

  std::string to_json_string() const;
  static ExperimentConfig from_json_string(const std::string& text);
  static ExperimentConfig load(const std::string& path);
  void save(const std::string& path) const;
};

}  // namespace eprlab

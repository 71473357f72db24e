#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eprlab/config.hpp"
#include "eprlab/criteria.hpp"
#include "eprlab/fit.hpp"
#include "eprlab/patterns.hpp"
#include "eprlab/synth.hpp"

namespace eprlab {

/// Everything one arm of the experiment needs, derived from a config.
struct ArmSetup {
  PatternKind kind = PatternKind::image;
  PatternCurve ideal;      // output-resolution ideal curve
  PatternCurve predicted;  // blurred prediction used for synthesis
  PatternCurve fit_ideal;  // coarser ideal used inside fits
  Aperture fit_detector;   // detector convolved into the fit model
  std::vector<double> scan_positions;
  ArmBudget budget;
};

ArmSetup build_arm(const ExperimentConfig& config, PatternKind kind,
                   bool stored);

/// Wavefunction-exact counterpart of the arm's predicted curve.
PatternCurve build_arm_oracle(const ExperimentConfig& config, PatternKind kind,
                              bool stored);

/// Extraction widths implied by the fit settings (zero when the detector is
/// already part of the fit model).
DetectorWidths extraction_widths(const ExperimentConfig& config);

/// Stable per-scan seed: one root, one index per (row, arm, seed number).
std::uint64_t scan_seed(std::uint64_t root, int row, PatternKind kind,
                        int seed_index);

struct SeedOutcome {
  double var_x = 0.0;
  double var_p = 0.0;
  double product = 0.0;
  Regime regime = Regime::classical;
  bool fits_converged = false;
};

struct RowOutcome {
  std::string label;
  double target_var_x = 0.0;
  double target_var_p = 0.0;
  double target_product = 0.0;
  Regime expected_regime = Regime::classical;
  double median_var_x = 0.0;
  double median_var_p = 0.0;
  double median_product = 0.0;
  int regime_matches = 0;
  int seeds = 0;
  bool pass = false;
  std::vector<SeedOutcome> per_seed;
};

struct ReproduceOptions {
  int seeds = 10;
  bool noise = true;
  bool storage_on = true;
};

struct ReproduceSummary {
  RowOutcome row1, row2;
  bool pass = false;

  std::string table() const;
  std::string to_json() const;
};

/// Full two-row reproduction: both storage stages, all seeds, through synthesis,
/// fitting, extraction, and classification. Throws FitFailure when a fit does
/// not converge (CLI exit code 3).
ReproduceSummary run_reproduce(const ExperimentConfig& config,
                               const ReproduceOptions& options);

struct FitFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace eprlab

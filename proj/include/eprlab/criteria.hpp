#pragma once

#include <string>

namespace eprlab {

/// A measured (or synthesized) pair of collective variances with one-sigma
/// uncertainties, in the hbar=1 wavenumber units used throughout.
struct VarianceMeasurement {
  double var_x_minus = 0.0;  // mm^2
  double err_x = 0.0;        // mm^2
  double var_p_plus = 0.0;   // rad^2/mm^2
  double err_p = 0.0;        // rad^2/mm^2
  std::string label;

  void validate() const;
};

enum class Regime { epr_paradox, entangled, classical };

const char* regime_name(Regime regime);
Regime regime_from_name(const std::string& name);

struct CriterionCheck {
  bool satisfied;
  double product;
};

/// Steering-grade test: variance product strictly below 1/4.
CriterionCheck paradox_criterion(const VarianceMeasurement& m);

/// Entanglement test: variance product strictly below 1.
CriterionCheck inseparability_criterion(const VarianceMeasurement& m);

/// Sum-form test value var_x/scale + scale*var_p for a positive scale.
double duan_sum(const VarianceMeasurement& m, double scale);

/// Scale minimizing duan_sum: sqrt(var_x / var_p).
double duan_scale_optimum(const VarianceMeasurement& m);

/// duan_sum evaluated at its optimal scale; equals 2*sqrt(product), so the
/// sum form is below 2 exactly when the product form is below 1.
double duan_sum_minimized(const VarianceMeasurement& m);

struct CriterionReport {
  double product = 0.0;
  double product_err = 0.0;
  double duan_sum_optimized = 0.0;
  Regime regime = Regime::classical;
  /// Distance of the product from the boundary that decided the regime, in
  /// units of product_err. Infinite when the inputs carry no uncertainty.
  double sigma_margin = 0.0;
  /// Marks an error-free measurement (sigma_margin reported as infinite).
  bool exact = false;
};

/// Product, first-order error propagation, regime, and margin.
CriterionReport classify(const VarianceMeasurement& m);

}  // namespace eprlab

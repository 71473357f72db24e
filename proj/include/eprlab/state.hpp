#pragma once

namespace eprlab {

/// Two-party pure Gaussian wavefunction parameterized by the widths of the
/// position-sum and position-difference coordinates. Momenta are wavenumbers
/// (rad/mm), so variance products are dimensionless and the entanglement
/// thresholds sit at 1/4 and 1.
///
/// dimension selects the normalization prefactor: 1 for the single measured
/// transverse axis the pipeline works in, 2 for the two-axis form whose
/// prefactors match the source formulas verbatim.
class DoubleGaussianState {
 public:
  DoubleGaussianState(double sigma_minus_mm, double sigma_plus_mm,
                      int dimension = 1);

  /// Builds the state whose marginal variances are the given measured pair:
  /// sigma_minus = sqrt(var_x_minus), sigma_plus = 1/sqrt(var_p_plus).
  static DoubleGaussianState from_variances(double var_x_minus_mm2,
                                            double var_p_plus_per_mm2,
                                            int dimension = 1);

  double sigma_minus() const { return sigma_minus_; }
  double sigma_plus() const { return sigma_plus_; }
  int dimension() const { return dimension_; }

  /// var_x_minus * var_p_plus in algebraically reduced form
  /// (sigma_minus/sigma_plus)^2; exactly 1 whenever the widths are equal.
  double paradox_product() const {
    const double r = sigma_minus_ / sigma_plus_;
    return r * r;
  }

 private:
  double sigma_minus_;
  double sigma_plus_;
  int dimension_;
};

/// Additive Gaussian broadening of both collective quadratures picked up in
/// a storage step; efficiency only rescales achievable count budgets.
struct StorageChannel {
  double beta_x_mm2 = 0.0;
  double beta_p_per_mm2 = 0.0;
  double efficiency = 1.0;

  void validate() const;
};

/// Momentum-space wavefunction at wavenumbers (pa, pb), rad/mm.
double momentum_wavefunction(const DoubleGaussianState& state, double pa,
                             double pb);

/// Position-space wavefunction at (ra, rb), mm.
double position_wavefunction(const DoubleGaussianState& state, double ra,
                             double rb);

struct MarginalVariances {
  double var_x_minus;  // mm^2
  double var_p_plus;   // rad^2/mm^2
  double var_x_plus;   // mm^2
  double var_p_minus;  // rad^2/mm^2
};

/// Per-axis collective variances of the pure state.
MarginalVariances marginal_variances(const DoubleGaussianState& state);

/// Post-storage state: var_x_minus grows by beta_x, var_p_plus by beta_p.
/// Throws std::domain_error when the broadened variances leave the family of
/// valid pure states (product above 1 would need a mixed state).
DoubleGaussianState apply_storage(const DoubleGaussianState& state,
                                  const StorageChannel& channel);

}  // namespace eprlab

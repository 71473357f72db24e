#include "eprlab/state.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace eprlab {

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v))
    throw std::invalid_argument(std::string(what) + " must be finite");
}

double prefactor_momentum(const DoubleGaussianState& s) {
  const double full = s.sigma_plus() * s.sigma_minus() / std::numbers::pi;
  return s.dimension() == 2 ? full : std::sqrt(full);
}

double prefactor_position(const DoubleGaussianState& s) {
  const double full =
      1.0 / (std::numbers::pi * s.sigma_plus() * s.sigma_minus());
  return s.dimension() == 2 ? full : std::sqrt(full);
}

}  // namespace

DoubleGaussianState::DoubleGaussianState(double sigma_minus_mm,
                                         double sigma_plus_mm, int dimension)
    : sigma_minus_(sigma_minus_mm),
      sigma_plus_(sigma_plus_mm),
      dimension_(dimension) {
  if (!(sigma_minus_ > 0.0) || !std::isfinite(sigma_minus_))
    throw std::invalid_argument("sigma_minus must be positive");
  if (!(sigma_plus_ > 0.0) || !std::isfinite(sigma_plus_))
    throw std::invalid_argument("sigma_plus must be positive");
  if (sigma_plus_ < sigma_minus_)
    throw std::invalid_argument(
        "sigma_plus < sigma_minus: flipped correlation ordering is rejected "
        "rather than relabeled");
  if (dimension_ != 1 && dimension_ != 2)
    throw std::invalid_argument("dimension must be 1 or 2");
}

DoubleGaussianState DoubleGaussianState::from_variances(
    double var_x_minus_mm2, double var_p_plus_per_mm2, int dimension) {
  if (!(var_x_minus_mm2 > 0.0) || !(var_p_plus_per_mm2 > 0.0))
    throw std::invalid_argument("variances must be positive");
  return DoubleGaussianState(std::sqrt(var_x_minus_mm2),
                             1.0 / std::sqrt(var_p_plus_per_mm2), dimension);
}

void StorageChannel::validate() const {
  if (!(beta_x_mm2 >= 0.0) || !std::isfinite(beta_x_mm2))
    throw std::invalid_argument("beta_x must be >= 0");
  if (!(beta_p_per_mm2 >= 0.0) || !std::isfinite(beta_p_per_mm2))
    throw std::invalid_argument("beta_p must be >= 0");
  if (!(efficiency > 0.0) || efficiency > 1.0)
    throw std::invalid_argument("efficiency must be in (0, 1]");
}

double momentum_wavefunction(const DoubleGaussianState& state, double pa,
                             double pb) {
  require_finite(pa, "pa");
  require_finite(pb, "pb");
  const double sp = state.sigma_plus();
  const double sm = state.sigma_minus();
  const double sum = pa + pb;
  const double diff = pa - pb;
  return prefactor_momentum(state) *
         std::exp(-0.25 * (sp * sp * sum * sum + sm * sm * diff * diff));
}

double position_wavefunction(const DoubleGaussianState& state, double ra,
                             double rb) {
  require_finite(ra, "ra");
  require_finite(rb, "rb");
  const double sp = state.sigma_plus();
  const double sm = state.sigma_minus();
  const double sum = ra + rb;
  const double diff = ra - rb;
  return prefactor_position(state) *
         std::exp(-0.25 * (diff * diff / (sm * sm) + sum * sum / (sp * sp)));
}

MarginalVariances marginal_variances(const DoubleGaussianState& state) {
  const double sm2 = state.sigma_minus() * state.sigma_minus();
  const double sp2 = state.sigma_plus() * state.sigma_plus();
  return {sm2, 1.0 / sp2, sp2, 1.0 / sm2};
}

DoubleGaussianState apply_storage(const DoubleGaussianState& state,
                                  const StorageChannel& channel) {
  channel.validate();
  const MarginalVariances m = marginal_variances(state);
  const double var_x = m.var_x_minus + channel.beta_x_mm2;
  const double var_p = m.var_p_plus + channel.beta_p_per_mm2;
  if (var_x * var_p > 1.0)
    throw std::domain_error(
        "storage broadening exceeds the pure-state bound "
        "(var_x_minus * var_p_plus > 1); not representable in this family");
  return DoubleGaussianState::from_variances(var_x, var_p, state.dimension());
}

}  // namespace eprlab

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eprlab/optics.hpp"
#include "eprlab/patterns.hpp"
#include "eprlab/state.hpp"

namespace eprlab {

/// Expected peak coincidence count and the flat accidental floor relative to
/// it (floor = background_fraction * peak_expected).
struct CountBudget {
  double peak_expected = 0.0;
  double background_fraction = 0.0;

  void validate() const;
  /// Budget reachable after a storage step of the given retrieval efficiency.
  CountBudget scaled_by_efficiency(double efficiency) const;
};

/// One synthesized or measured coincidence scan. Reproducible bit-exactly
/// from (curve parameters, seed); every scan position draws from its own
/// derived stream, so generation order never matters.
struct CoincidenceScan {
  std::string arm;  // "image" | "interference"
  std::vector<double> positions;
  std::vector<long long> counts;
  double duration_s = 0.0;
  std::uint64_t seed = 0;
  std::string meta_json;  // sidecar payload, persisted next to the CSV

  void validate() const;
};

/// Poisson counts around background + peak * curve(position).
CoincidenceScan synthesize(const PatternCurve& curve, const CountBudget& budget,
                           const std::vector<double>& positions,
                           std::uint64_t seed, double duration_s = 0.0);

struct PhaseSpaceSample {
  double x1, p1, x2, p2;
};

/// Draws from the positive Wigner function of the pure state: independent
/// Gaussian collective coordinates with Var(x1-x2) = sigma_minus^2,
/// Var(x1+x2) = sigma_plus^2, Var(p1+p2) = 1/sigma_plus^2,
/// Var(p1-p2) = 1/sigma_minus^2; position and momentum blocks independent.
std::vector<PhaseSpaceSample> wigner_sample(const DoubleGaussianState& state,
                                            std::size_t n, std::uint64_t seed,
                                            int threads = 1);

/// Ray-level Monte Carlo of the ghost image: object arm accepted with
/// probability |transmission|^2, scan arm binned through the detection slit.
/// Interference is an amplitude effect and has no ray-level counterpart; no
/// such generator exists for that arm.
CoincidenceScan mc_ghost_image(const DoubleGaussianState& state,
                               const Aperture& aperture,
                               const RectSlit& detector,
                               const std::vector<double>& positions,
                               std::size_t n, std::uint64_t seed,
                               double magnification = 1.0, int threads = 1);

}  // namespace eprlab

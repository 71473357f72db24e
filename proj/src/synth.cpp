#include "eprlab/synth.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>

#include "eprlab/rng.hpp"

namespace eprlab {

namespace {

constexpr std::size_t kChunk = 8192;

void check_positions(const std::vector<double>& positions) {
  if (positions.empty()) throw std::invalid_argument("no scan positions");
  for (std::size_t i = 0; i + 1 < positions.size(); ++i)
    if (!(positions[i] < positions[i + 1]))
      throw std::invalid_argument("scan positions must be strictly increasing");
}

// Deterministic chunk fan-out: worker threads race, output is index-keyed.
void run_chunks(std::size_t chunk_count, int threads,
                const std::function<void(std::size_t)>& body) {
  if (threads <= 1 || chunk_count <= 1) {
    for (std::size_t c = 0; c < chunk_count; ++c) body(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunk_count) return;
      body(c);
    }
  };
  std::vector<std::thread> pool;
  const int n = std::min<int>(threads, static_cast<int>(chunk_count));
  pool.reserve(n);
  for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace

void CountBudget::validate() const {
  if (!(peak_expected > 0.0) || !std::isfinite(peak_expected))
    throw std::invalid_argument("peak_expected must be positive");
  if (!(background_fraction >= 0.0) || background_fraction >= 1.0)
    throw std::invalid_argument("background_fraction must be in [0, 1)");
}

CountBudget CountBudget::scaled_by_efficiency(double efficiency) const {
  validate();
  if (!(efficiency > 0.0) || efficiency > 1.0)
    throw std::invalid_argument("efficiency must be in (0, 1]");
  return {peak_expected * efficiency, background_fraction};
}

void CoincidenceScan::validate() const {
  if (positions.size() != counts.size())
    throw std::invalid_argument("positions/counts size mismatch");
  check_positions(positions);
  for (long long c : counts)
    if (c < 0) throw std::invalid_argument("counts must be >= 0");
}

CoincidenceScan synthesize(const PatternCurve& curve, const CountBudget& budget,
                           const std::vector<double>& positions,
                           std::uint64_t seed, double duration_s) {
  curve.validate();
  budget.validate();
  check_positions(positions);
  for (double x : positions)
    if (x < curve.min_position() || x > curve.max_position())
      throw std::invalid_argument("scan position outside the curve domain");

  const double background = budget.background_fraction * budget.peak_expected;
  CoincidenceScan scan;
  scan.arm = curve.kind == PatternKind::image ? "image" : "interference";
  scan.positions = positions;
  scan.counts.resize(positions.size());
  scan.duration_s = duration_s;
  scan.seed = seed;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const double mean =
        background + budget.peak_expected * curve.value_at(positions[i]);
    rng::Stream stream(rng::derive_seed(seed, i));
    scan.counts[i] = stream.next_poisson(mean);
  }
  return scan;
}

std::vector<PhaseSpaceSample> wigner_sample(const DoubleGaussianState& state,
                                            std::size_t n, std::uint64_t seed,
                                            int threads) {
  if (state.dimension() != 1)
    throw std::invalid_argument("wigner_sample needs a dimension-1 state");
  if (n == 0) throw std::invalid_argument("sample count must be positive");

  const double sm = state.sigma_minus();
  const double sp = state.sigma_plus();
  std::vector<PhaseSpaceSample> out(n);
  const std::size_t chunk_count = (n + kChunk - 1) / kChunk;
  run_chunks(chunk_count, threads, [&](std::size_t c) {
    rng::Stream stream(rng::derive_seed(seed, c));
    const std::size_t lo = c * kChunk;
    const std::size_t hi = std::min(n, lo + kChunk);
    for (std::size_t i = lo; i < hi; ++i) {
      const double d = sm * stream.next_normal();
      const double s = sp * stream.next_normal();
      const double dp = stream.next_normal() / sm;
      const double sp_draw = stream.next_normal() / sp;
      out[i] = {0.5 * (s + d), 0.5 * (sp_draw + dp), 0.5 * (s - d),
                0.5 * (sp_draw - dp)};
    }
  });
  return out;
}

CoincidenceScan mc_ghost_image(const DoubleGaussianState& state,
                               const Aperture& aperture,
                               const RectSlit& detector,
                               const std::vector<double>& positions,
                               std::size_t n, std::uint64_t seed,
                               double magnification, int threads) {
  if (state.dimension() != 1)
    throw std::invalid_argument("mc_ghost_image needs a dimension-1 state");
  if (n == 0) throw std::invalid_argument("sample count must be positive");
  if (!(magnification > 0.0))
    throw std::invalid_argument("magnification must be positive");
  validate_aperture(Aperture{detector});
  validate_aperture(aperture);
  check_positions(positions);

  const double sm = state.sigma_minus();
  const double sp = state.sigma_plus();
  const double half_slit = 0.5 * detector.width_mm;
  const std::size_t bins = positions.size();
  const std::size_t chunk_count = (n + kChunk - 1) / kChunk;

  std::vector<std::vector<long long>> partial(chunk_count);
  run_chunks(chunk_count, threads, [&](std::size_t c) {
    std::vector<long long> local(bins, 0);
    rng::Stream stream(rng::derive_seed(seed, c));
    const std::size_t lo = c * kChunk;
    const std::size_t hi = std::min(n, lo + kChunk);
    for (std::size_t i = lo; i < hi; ++i) {
      const double d = sm * stream.next_normal();
      const double s = sp * stream.next_normal();
      const double x1 = 0.5 * (s + d);
      const double x2 = 0.5 * (s - d);
      const double t = transmission(aperture, x2);
      if (stream.next_unit() > t * t) continue;
      const double scan_pos = x1 * magnification;
      // slit windows may overlap: score every matching position
      const auto first = std::lower_bound(positions.begin(), positions.end(),
                                          scan_pos - half_slit);
      for (auto it = first;
           it != positions.end() && *it < scan_pos + half_slit; ++it)
        ++local[static_cast<std::size_t>(it - positions.begin())];
    }
    partial[c] = std::move(local);
  });

  CoincidenceScan scan;
  scan.arm = "image";
  scan.positions = positions;
  scan.counts.assign(bins, 0);
  scan.seed = seed;
  for (const auto& local : partial)
    for (std::size_t b = 0; b < bins; ++b) scan.counts[b] += local[b];
  return scan;
}

}  // namespace eprlab

#include <doctest.h>

#include <cmath>
#include <set>

#include "eprlab/pipeline.hpp"

using namespace eprlab;

TEST_CASE("arm setups derive consistently from the config") {
  ExperimentConfig config;
  const ArmSetup image = build_arm(config, PatternKind::image, false);
  CHECK(image.ideal.kind == PatternKind::image);
  CHECK(image.scan_positions.size() == 81);
  CHECK(image.budget.peak_counts == 252.0);
  CHECK(image.scan_positions.front() == doctest::Approx(-4.0));
  CHECK(image.scan_positions.back() == doctest::Approx(4.0));

  const ArmSetup stored = build_arm(config, PatternKind::image, true);
  CHECK(stored.budget.peak_counts == 219.0);
  // stored state is broader, so its predicted dip is shallower
  const std::size_t mid = image.predicted.values.size() / 2;
  CHECK(stored.predicted.values[mid] > image.predicted.values[mid]);

  const ArmSetup interference =
      build_arm(config, PatternKind::interference, false);
  CHECK(interference.ideal.kind == PatternKind::interference);
  CHECK(interference.scan_positions.size() == 61);
  CHECK(interference.budget.peak_counts == 344.0);
}

TEST_CASE("extraction widths follow the fit settings") {
  ExperimentConfig config;
  const DetectorWidths modeled = extraction_widths(config);
  CHECK(modeled.image_slit_mm == 0.0);
  CHECK(modeled.interference_fiber_waist_mm == 0.0);

  config.fit.model_detector = false;
  config.fit.subtract_resolution = true;
  const DetectorWidths subtracted = extraction_widths(config);
  CHECK(subtracted.image_slit_mm == 0.4);
  CHECK(subtracted.interference_fiber_waist_mm == 0.0025);
}

TEST_CASE("scan seeds are unique per row, arm, and repetition") {
  std::set<std::uint64_t> seen;
  for (int row : {0, 1})
    for (PatternKind kind : {PatternKind::image, PatternKind::interference})
      for (int s = 0; s < 50; ++s)
        seen.insert(scan_seed(20240809, row, kind, s));
  CHECK(seen.size() == 200);
}

TEST_CASE("noise-free reproduction lands within five percent") {
  ExperimentConfig config;
  ReproduceOptions options;
  options.seeds = 1;
  options.noise = false;
  const ReproduceSummary summary = run_reproduce(config, options);
  CHECK(summary.pass);
  CHECK(summary.row1.expected_regime == Regime::epr_paradox);
  CHECK(summary.row2.expected_regime == Regime::entangled);
  CHECK(std::abs(summary.row1.median_product - summary.row1.target_product) <=
        0.05 * summary.row1.target_product);
  CHECK(std::abs(summary.row2.median_product - summary.row2.target_product) <=
        0.05 * summary.row2.target_product);
}

TEST_CASE("storage-off reproduces the first row twice") {
  ExperimentConfig config;
  ReproduceOptions options;
  options.seeds = 2;
  options.storage_on = false;
  const ReproduceSummary summary = run_reproduce(config, options);
  CHECK(summary.row2.target_product ==
        doctest::Approx(summary.row1.target_product));
  CHECK(summary.row2.expected_regime == summary.row1.expected_regime);
  CHECK(std::abs(summary.row2.median_product - summary.row1.target_product) <=
        0.25 * summary.row1.target_product);
}

TEST_CASE("stochastic reproduction with a few seeds") {
  ExperimentConfig config;
  ReproduceOptions options;
  options.seeds = 3;
  const ReproduceSummary summary = run_reproduce(config, options);
  CHECK(summary.row1.per_seed.size() == 3);
  CHECK(summary.row2.per_seed.size() == 3);
  for (const SeedOutcome& s : summary.row1.per_seed) {
    CHECK(s.fits_converged);
    CHECK(s.product > 0.0);
  }
  const std::string table = summary.table();
  CHECK(table.find("photon_spin_wave") != std::string::npos);
  const std::string json_text = summary.to_json();
  CHECK(json_text.find("median_product_hbar2") != std::string::npos);
}

TEST_CASE("reproduction summaries are seed-deterministic") {
  ExperimentConfig config;
  ReproduceOptions options;
  options.seeds = 2;
  const ReproduceSummary a = run_reproduce(config, options);
  const ReproduceSummary b = run_reproduce(config, options);
  CHECK(a.to_json() == b.to_json());

  config.seed += 1;
  const ReproduceSummary c = run_reproduce(config, options);
  CHECK(a.to_json() != c.to_json());
}

#include <doctest.h>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <string>

#include "eprlab/config.hpp"
#include "eprlab/io.hpp"
#include "eprlab/rng.hpp"

using namespace eprlab;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("default config is valid and carries the published constants") {
  ExperimentConfig config;
  CHECK_NOTHROW(config.validate());
  CHECK(config.bar_width_mm == 1.04);
  CHECK(config.mode_waist_mm == 1.1);
  CHECK(config.slit_width_mm == 0.4);
  CHECK(config.optics.lambda_nm == 795.0);
  CHECK(config.optics.f1_mm == 500.0);
  CHECK(config.optics.f2_mm == 32.0);
  CHECK(config.budget_image.peak_counts == 252.0);
  CHECK(config.budget_interference.peak_counts == 344.0);
  CHECK(config.budget_image_stored.peak_counts == 219.0);
  CHECK(config.budget_interference_stored.peak_counts == 290.0);
  CHECK(config.scan_interference.step_mm == 0.002);
}

TEST_CASE("config round trip is the identity") {
  ExperimentConfig config;
  config.var_x_minus_mm2 = 0.2;
  config.seed = (1ull << 60) + 12345;  // needs the string form to survive
  config.scan_image.step_mm = 0.2;
  const std::string text = config.to_json_string();
  const ExperimentConfig back = ExperimentConfig::from_json_string(text);
  CHECK(back.to_json_string() == text);
  CHECK(back.seed == config.seed);

  const std::string path = temp_path("eprlab_cfg_roundtrip.json");
  config.save(path);
  const ExperimentConfig loaded = ExperimentConfig::load(path);
  CHECK(loaded.to_json_string() == text);
  std::remove(path.c_str());
}

TEST_CASE("unknown keys are rejected") {
  CHECK_THROWS_AS(ExperimentConfig::from_json_string(R"({"bogus": 1})"),
                  ConfigError);
  CHECK_THROWS_AS(
      ExperimentConfig::from_json_string(R"({"optics": {"f3_mm": 1}})"),
      ConfigError);
  CHECK_THROWS_AS(
      ExperimentConfig::from_json_string(R"({"state": {"sigma": 0.5}})"),
      ConfigError);
}

TEST_CASE("state accepts sigmas or variances but not both") {
  const ExperimentConfig via_sigma = ExperimentConfig::from_json_string(
      R"({"state": {"sigma_minus_mm": 0.5, "sigma_plus_mm": 2.0}})");
  CHECK(via_sigma.var_x_minus_mm2 == doctest::Approx(0.25));
  CHECK(via_sigma.var_p_plus_per_mm2 == doctest::Approx(0.25));
  CHECK_THROWS_AS(ExperimentConfig::from_json_string(
                      R"({"state": {"sigma_minus_mm": 0.5, "sigma_plus_mm": 2,
                          "var_x_minus_mm2": 0.23}})"),
                  ConfigError);
}

TEST_CASE("inconsistent settings fail validation") {
  CHECK_THROWS_AS(ExperimentConfig::from_json_string(
                      R"({"fit": {"model_detector": true,
                          "subtract_resolution": true}})"),
                  ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json_string(
                      R"({"scan": {"image": {"min_mm": -20, "max_mm": 20,
                          "step_mm": 0.1}}})"),
                  ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json_string(
                      R"({"budgets": {"image": {"peak_counts": -5}}})"),
                  ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json_string("not json"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json_string(
                      R"({"state": {"var_x_minus_mm2": 4.0,
                          "var_p_plus_per_mm2": 4.0}})"),
                  ConfigError);  // flipped ordering rejected at construction
}

TEST_CASE("seed parses from number or string") {
  CHECK(ExperimentConfig::from_json_string(R"({"seed": 7})").seed == 7);
  CHECK(ExperimentConfig::from_json_string(R"({"seed": "7"})").seed == 7);
  CHECK(ExperimentConfig::from_json_string(R"({"seed": "18446744073709551615"})")
            .seed == 18446744073709551615ull);
  CHECK_THROWS_AS(ExperimentConfig::from_json_string(R"({"seed": "x"})"),
                  ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json_string(R"({"seed": -4})"),
                  ConfigError);
}

TEST_CASE("format_double round-trips") {
  rng::Stream s(31);
  for (int i = 0; i < 1000; ++i) {
    const double v = (s.next_unit() - 0.5) * std::pow(10.0, 30.0 * (s.next_unit() - 0.5));
    const std::string text = io::format_double(v);
    double back = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), back);
    REQUIRE(res.ec == std::errc());
    CHECK(back == v);
  }
}

TEST_CASE("pattern CSV bytes are stable") {
  PatternCurve curve;
  curve.positions = {-1.0, 0.0, 1.0};
  curve.values = {0.25, 1.0, 0.25};
  const std::string p1 = temp_path("eprlab_curve_a.csv");
  const std::string p2 = temp_path("eprlab_curve_b.csv");
  io::write_pattern_csv(p1, curve);
  io::write_pattern_csv(p2, curve);
  CHECK(io::read_text_file(p1) == io::read_text_file(p2));
  CHECK(io::read_text_file(p1).rfind("position_mm,value\n", 0) == 0);
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST_CASE("scan CSV and sidecar round trip") {
  CoincidenceScan scan;
  scan.arm = "interference";
  scan.positions = {-0.002, 0.0, 0.002};
  scan.counts = {11, 344, 12};
  scan.duration_s = 200.0;
  scan.seed = (1ull << 62) + 99;
  scan.meta_json = R"({"note":"test"})";

  const std::string path = temp_path("eprlab_scan.csv");
  io::write_scan_csv(path, scan);
  const CoincidenceScan back = io::read_scan_csv(path);
  CHECK(back.arm == scan.arm);
  CHECK(back.positions == scan.positions);
  CHECK(back.counts == scan.counts);
  CHECK(back.duration_s == scan.duration_s);
  CHECK(back.seed == scan.seed);
  std::remove(path.c_str());
  std::remove(io::sidecar_path_for(path).c_str());
}

TEST_CASE("measurement and report JSON carry the fixed field names") {
  VarianceMeasurement m{0.230, 0.021, 0.807, 0.163, "row1"};
  const std::string path = temp_path("eprlab_measurement.json");
  io::write_text_file(path, io::measurement_to_json(m));
  const VarianceMeasurement back = io::measurement_from_json_file(path);
  CHECK(back.var_x_minus == m.var_x_minus);
  CHECK(back.err_p == m.err_p);
  CHECK(back.label == m.label);
  std::remove(path.c_str());

  const std::string report = io::criterion_report_to_json(m, classify(m));
  for (const char* key :
       {"var_x_minus_mm2", "var_p_plus_per_mm2", "product_hbar2",
        "product_err", "regime", "duan_sum_optimized"}) {
    CAPTURE(key);
    CHECK(report.find(std::string("\"") + key + "\"") != std::string::npos);
  }
}

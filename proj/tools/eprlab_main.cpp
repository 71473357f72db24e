// eprlab: position-momentum ghost imaging/interference laboratory.
// Verbs: predict | synthesize | fit | criteria | reproduce.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "eprlab/config.hpp"
#include "eprlab/io.hpp"
#include "eprlab/pipeline.hpp"

namespace {

using namespace eprlab;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitFit = 3;
constexpr int kExitAcceptance = 4;

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  std::string arm = "image";
  bool stored = false;
};

ExperimentConfig load_config(const CommonArgs& args) {
  ExperimentConfig config = args.config_path.empty()
                                ? ExperimentConfig{}
                                : ExperimentConfig::load(args.config_path);
  if (args.seed_override) config.seed = *args.seed_override;
  config.validate();
  return config;
}

PatternKind parse_arm(const std::string& arm) {
  if (arm == "image") return PatternKind::image;
  if (arm == "interference") return PatternKind::interference;
  throw ConfigError("arm must be image or interference");
}

std::string stem_of(const std::string& path) {
  const auto dot = path.rfind(".csv");
  if (dot != std::string::npos && dot == path.size() - 4)
    return path.substr(0, dot);
  return path;
}

int cmd_predict(const CommonArgs& args, const std::string& out,
                bool with_oracle) {
  const ExperimentConfig config = load_config(args);
  const PatternKind kind = parse_arm(args.arm);
  const ArmSetup arm = build_arm(config, kind, args.stored);
  io::write_pattern_csv(out, arm.predicted);
  io::write_pattern_csv(stem_of(out) + ".ideal.csv", arm.ideal);
  std::cout << "wrote " << out << " and " << stem_of(out) << ".ideal.csv\n";
  if (with_oracle) {
    const PatternCurve oracle = build_arm_oracle(config, kind, args.stored);
    const std::string oracle_path = stem_of(out) + ".oracle.csv";
    io::write_pattern_csv(oracle_path, oracle);
    const double gap = sup_norm_difference(arm.predicted, oracle);
    std::cout << "wrote " << oracle_path
              << "; sup-norm gap model vs oracle: " << io::format_double(gap)
              << "\n";
  }
  return kExitOk;
}

int cmd_synthesize(const CommonArgs& args, const std::string& out) {
  const ExperimentConfig config = load_config(args);
  const PatternKind kind = parse_arm(args.arm);
  const ArmSetup arm = build_arm(config, kind, args.stored);
  const std::uint64_t seed =
      scan_seed(config.seed, args.stored ? 1 : 0, kind, 0);
  CoincidenceScan scan =
      synthesize(arm.predicted, arm.budget.count_budget(), arm.scan_positions,
                 seed, arm.budget.duration_s);
  nlohmann::json meta;
  meta["stored"] = args.stored;
  meta["peak_counts"] = arm.budget.peak_counts;
  meta["snr"] = arm.budget.snr;
  meta["root_seed"] = std::to_string(config.seed);
  scan.meta_json = meta.dump();
  io::write_scan_csv(out, scan);
  std::cout << "wrote " << out << " and " << io::sidecar_path_for(out) << "\n";
  return kExitOk;
}

int cmd_fit(const CommonArgs& args, const std::string& image_path,
            const std::string& interference_path, const std::string& out) {
  if (image_path.empty() && interference_path.empty())
    throw ConfigError("fit needs --image and/or --interference scans");
  const ExperimentConfig config = load_config(args);
  const FitOptions fit_opts{config.fit.max_iterations, config.fit.tolerance,
                            std::nullopt};

  nlohmann::json out_json;
  std::optional<FitResult> image_fit, interference_fit;
  if (!image_path.empty()) {
    const CoincidenceScan scan = io::read_scan_csv(image_path);
    const ArmSetup arm = build_arm(config, PatternKind::image, args.stored);
    image_fit = fit_pattern(scan, arm.fit_ideal, arm.fit_detector, fit_opts);
    out_json["image_fit"] =
        nlohmann::json::parse(io::fit_result_to_json(*image_fit));
  }
  if (!interference_path.empty()) {
    const CoincidenceScan scan = io::read_scan_csv(interference_path);
    const ArmSetup arm =
        build_arm(config, PatternKind::interference, args.stored);
    interference_fit =
        fit_pattern(scan, arm.fit_ideal, arm.fit_detector, fit_opts);
    out_json["interference_fit"] =
        nlohmann::json::parse(io::fit_result_to_json(*interference_fit));
  }
  const bool all_converged =
      (!image_fit || image_fit->converged) &&
      (!interference_fit || interference_fit->converged);

  if (image_fit && interference_fit && all_converged) {
    ExtractedVariances ext = extract_variances(
        *image_fit, *interference_fit, config.optics, extraction_widths(config));
    ext.measurement.label = args.stored ? "stored" : "direct";
    out_json["measurement"] =
        nlohmann::json::parse(io::measurement_to_json(ext.measurement));
    out_json["clamped_x"] = ext.clamped_x;
    out_json["clamped_p"] = ext.clamped_p;
  }

  const std::string text = out_json.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    io::write_text_file(out, text);
    std::cout << "wrote " << out << "\n";
  }
  if (!all_converged) {
    std::cerr << "fit did not converge\n";
    return kExitFit;
  }
  return kExitOk;
}

int cmd_criteria(const std::string& in, const std::string& out) {
  const VarianceMeasurement m = io::measurement_from_json_file(in);
  const CriterionReport report = classify(m);
  const std::string text = io::criterion_report_to_json(m, report);
  if (out.empty()) {
    std::cout << text;
  } else {
    io::write_text_file(out, text);
    std::cout << "wrote " << out << "\n";
  }
  return kExitOk;
}

int cmd_reproduce(const CommonArgs& args, int seeds, bool no_noise,
                  bool storage_off, const std::string& out) {
  const ExperimentConfig config = load_config(args);
  ReproduceOptions options;
  options.seeds = seeds;
  options.noise = !no_noise;
  options.storage_on = !storage_off;
  const ReproduceSummary summary = run_reproduce(config, options);
  std::cout << summary.table();
  if (!out.empty()) {
    io::write_text_file(out, summary.to_json());
    std::cout << "wrote " << out << "\n";
  }
  return summary.pass ? kExitOk : kExitAcceptance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"position-momentum EPR ghost imaging/interference laboratory"};
  app.require_subcommand(0, 1);

  CommonArgs common;
  std::string dump_config_path;
  app.add_option("--dump-default-config", dump_config_path,
                 "write the built-in default config to a file and exit");

  auto add_common = [&common](CLI::App* cmd, bool with_arm) {
    cmd->add_option("--config", common.config_path,
                    "config JSON (defaults are built in)");
    cmd->add_option("--seed", common.seed_override, "override the root seed");
    if (with_arm) {
      cmd->add_option("--arm", common.arm, "image | interference");
      cmd->add_flag("--stored", common.stored,
                    "use the post-storage state and budgets");
    }
  };

  auto* predict = app.add_subcommand("predict", "write model pattern curves");
  std::string predict_out = "pattern.csv";
  bool predict_oracle = false;
  add_common(predict, true);
  predict->add_option("--out", predict_out, "output CSV path");
  predict->add_flag("--oracle", predict_oracle,
                    "also write the wavefunction-exact curve and report the "
                    "sup-norm gap");

  auto* synth = app.add_subcommand("synthesize", "write a Poisson coincidence scan");
  std::string synth_out = "scan.csv";
  add_common(synth, true);
  synth->add_option("--out", synth_out, "output CSV path (JSON sidecar beside it)");

  auto* fit = app.add_subcommand("fit", "fit scans and extract variances");
  std::string fit_image, fit_interference, fit_out;
  add_common(fit, true);
  fit->add_option("--image", fit_image, "image-arm scan CSV");
  fit->add_option("--interference", fit_interference, "interference-arm scan CSV");
  fit->add_option("--out", fit_out, "output JSON (stdout when omitted)");

  auto* criteria = app.add_subcommand("criteria", "classify a variance measurement");
  std::string criteria_in, criteria_out;
  criteria->add_option("measurement", criteria_in, "measurement JSON path")
      ->required();
  criteria->add_option("--out", criteria_out, "output JSON (stdout when omitted)");

  auto* reproduce = app.add_subcommand(
      "reproduce", "run the full two-row pipeline across seeds");
  int seeds = 10;
  bool no_noise = false, storage_off = false;
  std::string reproduce_out;
  add_common(reproduce, false);
  reproduce->add_option("--seeds", seeds, "number of seeds per row");
  reproduce->add_flag("--no-noise", no_noise, "fit the noise-free means");
  reproduce->add_flag("--storage-off", storage_off,
                      "identity storage channel for the second row");
  reproduce->add_option("--out", reproduce_out, "summary JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (!dump_config_path.empty()) {
      ExperimentConfig{}.save(dump_config_path);
      std::cout << "wrote " << dump_config_path << "\n";
      return kExitOk;
    }
    if (app.get_subcommands().empty()) {
      std::cerr << app.help();
      return kExitConfig;
    }
    if (predict->parsed()) return cmd_predict(common, predict_out, predict_oracle);
    if (synth->parsed()) return cmd_synthesize(common, synth_out);
    if (fit->parsed())
      return cmd_fit(common, fit_image, fit_interference, fit_out);
    if (criteria->parsed()) return cmd_criteria(criteria_in, criteria_out);
    if (reproduce->parsed())
      return cmd_reproduce(common, seeds, no_noise, storage_off, reproduce_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const FitFailure& e) {
    std::cerr << "fit failure: " << e.what() << "\n";
    return kExitFit;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

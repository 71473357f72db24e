#include "eprlab/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace eprlab {

using nlohmann::json;

std::vector<double> ScanRange::positions() const {
  if (!(step_mm > 0.0) || !(max_mm > min_mm))
    throw ConfigError("scan range needs max > min and a positive step");
  std::vector<double> p;
  const int n = static_cast<int>(std::floor((max_mm - min_mm) / step_mm + 0.5));
  p.reserve(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double x = min_mm + i * step_mm;
    if (x > max_mm + 0.5 * step_mm) break;
    p.push_back(x);
  }
  return p;
}

void ExperimentConfig::validate() const {
  try {
    state();
    storage.validate();
    optics.validate();
    validate_aperture(object_aperture());
    validate_aperture(image_detector());
    validate_aperture(interference_detector());
    for (const ArmBudget* b : {&budget_image, &budget_interference,
                               &budget_image_stored, &budget_interference_stored}) {
      b->count_budget().validate();
      if (!(b->snr > 1.0)) throw std::invalid_argument("snr must exceed 1");
      if (b->duration_s < 0.0)
        throw std::invalid_argument("duration must be >= 0");
    }
    (void)scan_image.positions();
    (void)scan_interference.positions();
    if (grids.image_points < 64 || grids.interference_points < 64 ||
        grids.fit_points < 64)
      throw std::invalid_argument("grids need at least 64 points");
    if (!(grids.image_halfwidth_mm > 0.0) ||
        !(grids.interference_halfwidth_mm > 0.0))
      throw std::invalid_argument("grid halfwidths must be positive");
    if (scan_image.max_mm > grids.image_halfwidth_mm ||
        -scan_image.min_mm > grids.image_halfwidth_mm ||
        scan_interference.max_mm > grids.interference_halfwidth_mm ||
        -scan_interference.min_mm > grids.interference_halfwidth_mm)
      throw std::invalid_argument("scan range exceeds the model grid window");
    if (fit.model_detector && fit.subtract_resolution)
      throw std::invalid_argument(
          "model_detector and subtract_resolution both set: the detector "
          "would be removed twice");
    if (fit.max_iterations < 1 || !(fit.tolerance > 0.0))
      throw std::invalid_argument("bad fit settings");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  } catch (const std::domain_error& e) {
    throw ConfigError(e.what());
  }
}

DoubleGaussianState ExperimentConfig::state() const {
  return DoubleGaussianState::from_variances(var_x_minus_mm2,
                                             var_p_plus_per_mm2, 1);
}

DoubleGaussianState ExperimentConfig::stored_state() const {
  return apply_storage(state(), storage);
}

Aperture ExperimentConfig::object_aperture() const {
  return DoubleSlitEffective{bar_width_mm, mode_waist_mm};
}

Aperture ExperimentConfig::image_detector() const {
  return RectSlit{slit_width_mm};
}

Aperture ExperimentConfig::interference_detector() const {
  return GaussianPinhole{fiber_waist_mm};
}

Grid ExperimentConfig::image_grid(int points) const {
  return Grid::symmetric(grids.image_halfwidth_mm,
                         points > 0 ? points : grids.image_points);
}

Grid ExperimentConfig::interference_grid(int points) const {
  return Grid::symmetric(grids.interference_halfwidth_mm,
                         points > 0 ? points : grids.interference_points);
}

namespace {

void reject_unknown_keys(const json& j, const char* section,
                         std::initializer_list<const char*> known) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : known)
      if (item.key() == k) {
        ok = true;
        break;
      }
    if (!ok)
      throw ConfigError(std::string("unknown key \"") + item.key() +
                        "\" in section " + section);
  }
}

double get_num(const json& j, const char* section, const char* key,
               double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number())
    throw ConfigError(std::string(section) + "." + key + " must be a number");
  return j.at(key).get<double>();
}

std::uint64_t parse_seed(const json& j) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<long long>() >= 0)
    return static_cast<std::uint64_t>(j.get<long long>());
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    try {
      std::size_t pos = 0;
      const std::uint64_t v = std::stoull(s, &pos);
      if (pos == s.size()) return v;
    } catch (...) {
    }
  }
  throw ConfigError("seed must be a non-negative integer or its string form");
}

ArmBudget parse_budget(const json& j, const char* section,
                       const ArmBudget& defaults) {
  reject_unknown_keys(j, section, {"peak_counts", "snr", "duration_s"});
  ArmBudget b = defaults;
  b.peak_counts = get_num(j, section, "peak_counts", defaults.peak_counts);
  b.snr = get_num(j, section, "snr", defaults.snr);
  b.duration_s = get_num(j, section, "duration_s", defaults.duration_s);
  return b;
}

ScanRange parse_scan(const json& j, const char* section,
                     const ScanRange& defaults) {
  reject_unknown_keys(j, section, {"min_mm", "max_mm", "step_mm"});
  ScanRange s = defaults;
  s.min_mm = get_num(j, section, "min_mm", defaults.min_mm);
  s.max_mm = get_num(j, section, "max_mm", defaults.max_mm);
  s.step_mm = get_num(j, section, "step_mm", defaults.step_mm);
  return s;
}

}  // namespace

std::string ExperimentConfig::to_json_string() const {
  json j;
  j["state"] = {{"var_x_minus_mm2", var_x_minus_mm2},
                {"var_p_plus_per_mm2", var_p_plus_per_mm2}};
  j["storage"] = {{"beta_x_mm2", storage.beta_x_mm2},
                  {"beta_p_per_mm2", storage.beta_p_per_mm2},
                  {"efficiency", storage.efficiency}};
  j["optics"] = {{"lambda_nm", optics.lambda_nm},
                 {"f1_mm", optics.f1_mm},
                 {"f2_mm", optics.f2_mm},
                 {"fc_mm", optics.fc_mm},
                 {"magnification_imaging_arm", optics.magnification_imaging_arm}};
  j["apertures"] = {{"bar_width_mm", bar_width_mm},
                    {"mode_waist_mm", mode_waist_mm},
                    {"slit_width_mm", slit_width_mm},
                    {"fiber_waist_mm", fiber_waist_mm}};
  j["budgets"] = {
      {"image",
       {{"peak_counts", budget_image.peak_counts},
        {"snr", budget_image.snr},
        {"duration_s", budget_image.duration_s}}},
      {"interference",
       {{"peak_counts", budget_interference.peak_counts},
        {"snr", budget_interference.snr},
        {"duration_s", budget_interference.duration_s}}},
      {"image_stored",
       {{"peak_counts", budget_image_stored.peak_counts},
        {"snr", budget_image_stored.snr},
        {"duration_s", budget_image_stored.duration_s}}},
      {"interference_stored",
       {{"peak_counts", budget_interference_stored.peak_counts},
        {"snr", budget_interference_stored.snr},
        {"duration_s", budget_interference_stored.duration_s}}}};
  j["scan"] = {{"image",
                {{"min_mm", scan_image.min_mm},
                 {"max_mm", scan_image.max_mm},
                 {"step_mm", scan_image.step_mm}}},
               {"interference",
                {{"min_mm", scan_interference.min_mm},
                 {"max_mm", scan_interference.max_mm},
                 {"step_mm", scan_interference.step_mm}}}};
  j["grids"] = {{"image_halfwidth_mm", grids.image_halfwidth_mm},
                {"image_points", grids.image_points},
                {"interference_halfwidth_mm", grids.interference_halfwidth_mm},
                {"interference_points", grids.interference_points},
                {"fit_points", grids.fit_points}};
  j["fit"] = {{"model_detector", fit.model_detector},
              {"subtract_resolution", fit.subtract_resolution},
              {"max_iterations", fit.max_iterations},
              {"tolerance", fit.tolerance}};
  j["seed"] = std::to_string(seed);
  return j.dump(2) + "\n";
}

ExperimentConfig ExperimentConfig::from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown_keys(j, "<root>",
                      {"state", "storage", "optics", "apertures", "budgets",
                       "scan", "grids", "fit", "seed"});

  ExperimentConfig c;
  if (j.contains("state")) {
    const json& s = j.at("state");
    reject_unknown_keys(s, "state",
                        {"var_x_minus_mm2", "var_p_plus_per_mm2",
                         "sigma_minus_mm", "sigma_plus_mm"});
    const bool has_var =
        s.contains("var_x_minus_mm2") || s.contains("var_p_plus_per_mm2");
    const bool has_sigma =
        s.contains("sigma_minus_mm") || s.contains("sigma_plus_mm");
    if (has_var && has_sigma)
      throw ConfigError("state: give either variances or sigmas, not both");
    if (has_sigma) {
      const double sm = get_num(s, "state", "sigma_minus_mm", 0.0);
      const double sp = get_num(s, "state", "sigma_plus_mm", 0.0);
      if (!(sm > 0.0) || !(sp > 0.0))
        throw ConfigError("state: both sigma_minus_mm and sigma_plus_mm needed");
      c.var_x_minus_mm2 = sm * sm;
      c.var_p_plus_per_mm2 = 1.0 / (sp * sp);
    } else {
      c.var_x_minus_mm2 =
          get_num(s, "state", "var_x_minus_mm2", c.var_x_minus_mm2);
      c.var_p_plus_per_mm2 =
          get_num(s, "state", "var_p_plus_per_mm2", c.var_p_plus_per_mm2);
    }
  }
  if (j.contains("storage")) {
    const json& s = j.at("storage");
    reject_unknown_keys(s, "storage",
                        {"beta_x_mm2", "beta_p_per_mm2", "efficiency"});
    c.storage.beta_x_mm2 =
        get_num(s, "storage", "beta_x_mm2", c.storage.beta_x_mm2);
    c.storage.beta_p_per_mm2 =
        get_num(s, "storage", "beta_p_per_mm2", c.storage.beta_p_per_mm2);
    c.storage.efficiency =
        get_num(s, "storage", "efficiency", c.storage.efficiency);
  }
  if (j.contains("optics")) {
    const json& s = j.at("optics");
    reject_unknown_keys(s, "optics",
                        {"lambda_nm", "f1_mm", "f2_mm", "fc_mm",
                         "magnification_imaging_arm"});
    c.optics.lambda_nm = get_num(s, "optics", "lambda_nm", c.optics.lambda_nm);
    c.optics.f1_mm = get_num(s, "optics", "f1_mm", c.optics.f1_mm);
    c.optics.f2_mm = get_num(s, "optics", "f2_mm", c.optics.f2_mm);
    c.optics.fc_mm = get_num(s, "optics", "fc_mm", c.optics.fc_mm);
    c.optics.magnification_imaging_arm =
        get_num(s, "optics", "magnification_imaging_arm",
                c.optics.magnification_imaging_arm);
  }
  if (j.contains("apertures")) {
    const json& s = j.at("apertures");
    reject_unknown_keys(s, "apertures",
                        {"bar_width_mm", "mode_waist_mm", "slit_width_mm",
                         "fiber_waist_mm"});
    c.bar_width_mm = get_num(s, "apertures", "bar_width_mm", c.bar_width_mm);
    c.mode_waist_mm = get_num(s, "apertures", "mode_waist_mm", c.mode_waist_mm);
    c.slit_width_mm = get_num(s, "apertures", "slit_width_mm", c.slit_width_mm);
    c.fiber_waist_mm =
        get_num(s, "apertures", "fiber_waist_mm", c.fiber_waist_mm);
  }
  if (j.contains("budgets")) {
    const json& s = j.at("budgets");
    reject_unknown_keys(
        s, "budgets", {"image", "interference", "image_stored",
                       "interference_stored"});
    if (s.contains("image"))
      c.budget_image = parse_budget(s.at("image"), "budgets.image", c.budget_image);
    if (s.contains("interference"))
      c.budget_interference = parse_budget(
          s.at("interference"), "budgets.interference", c.budget_interference);
    if (s.contains("image_stored"))
      c.budget_image_stored = parse_budget(
          s.at("image_stored"), "budgets.image_stored", c.budget_image_stored);
    if (s.contains("interference_stored"))
      c.budget_interference_stored =
          parse_budget(s.at("interference_stored"),
                       "budgets.interference_stored", c.budget_interference_stored);
  }
  if (j.contains("scan")) {
    const json& s = j.at("scan");
    reject_unknown_keys(s, "scan", {"image", "interference"});
    if (s.contains("image"))
      c.scan_image = parse_scan(s.at("image"), "scan.image", c.scan_image);
    if (s.contains("interference"))
      c.scan_interference = parse_scan(s.at("interference"),
                                       "scan.interference", c.scan_interference);
  }
  if (j.contains("grids")) {
    const json& s = j.at("grids");
    reject_unknown_keys(s, "grids",
                        {"image_halfwidth_mm", "image_points",
                         "interference_halfwidth_mm", "interference_points",
                         "fit_points"});
    c.grids.image_halfwidth_mm =
        get_num(s, "grids", "image_halfwidth_mm", c.grids.image_halfwidth_mm);
    c.grids.image_points = static_cast<int>(
        get_num(s, "grids", "image_points", c.grids.image_points));
    c.grids.interference_halfwidth_mm =
        get_num(s, "grids", "interference_halfwidth_mm",
                c.grids.interference_halfwidth_mm);
    c.grids.interference_points = static_cast<int>(get_num(
        s, "grids", "interference_points", c.grids.interference_points));
    c.grids.fit_points =
        static_cast<int>(get_num(s, "grids", "fit_points", c.grids.fit_points));
  }
  if (j.contains("fit")) {
    const json& s = j.at("fit");
    reject_unknown_keys(s, "fit",
                        {"model_detector", "subtract_resolution",
                         "max_iterations", "tolerance"});
    if (s.contains("model_detector")) {
      if (!s.at("model_detector").is_boolean())
        throw ConfigError("fit.model_detector must be a boolean");
      c.fit.model_detector = s.at("model_detector").get<bool>();
    }
    if (s.contains("subtract_resolution")) {
      if (!s.at("subtract_resolution").is_boolean())
        throw ConfigError("fit.subtract_resolution must be a boolean");
      c.fit.subtract_resolution = s.at("subtract_resolution").get<bool>();
    }
    c.fit.max_iterations = static_cast<int>(
        get_num(s, "fit", "max_iterations", c.fit.max_iterations));
    c.fit.tolerance = get_num(s, "fit", "tolerance", c.fit.tolerance);
  }
  if (j.contains("seed")) c.seed = parse_seed(j.at("seed"));

  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_string(buf.str());
}

void ExperimentConfig::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write config file: " + path);
  out << to_json_string();
  if (!out) throw ConfigError("failed writing config file: " + path);
}

}  // namespace eprlab

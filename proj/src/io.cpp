#include "eprlab/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace eprlab::io {

using nlohmann::json;

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

void write_binary(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace

void write_text_file(const std::string& path, const std::string& text) {
  write_binary(path, text);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_pattern_csv(const std::string& path, const PatternCurve& curve) {
  curve.validate();
  std::string text = "position_mm,value\n";
  for (std::size_t i = 0; i < curve.positions.size(); ++i) {
    text += format_double(curve.positions[i]);
    text += ',';
    text += format_double(curve.values[i]);
    text += '\n';
  }
  write_binary(path, text);
}

std::string sidecar_path_for(const std::string& csv_path) {
  const auto dot = csv_path.rfind(".csv");
  if (dot != std::string::npos && dot == csv_path.size() - 4)
    return csv_path.substr(0, dot) + ".json";
  return csv_path + ".json";
}

void write_scan_csv(const std::string& path, const CoincidenceScan& scan) {
  scan.validate();
  std::string text = "position_mm,counts,duration_s\n";
  for (std::size_t i = 0; i < scan.positions.size(); ++i) {
    text += format_double(scan.positions[i]);
    text += ',';
    text += std::to_string(scan.counts[i]);
    text += ',';
    text += format_double(scan.duration_s);
    text += '\n';
  }
  write_binary(path, text);

  json sidecar;
  sidecar["arm"] = scan.arm;
  sidecar["seed"] = std::to_string(scan.seed);  // uint64 kept lossless
  sidecar["duration_s"] = scan.duration_s;
  if (!scan.meta_json.empty()) {
    sidecar["meta"] = json::parse(scan.meta_json);
  } else {
    sidecar["meta"] = json::object();
  }
  write_binary(sidecar_path_for(path), sidecar.dump(2) + "\n");
}

CoincidenceScan read_scan_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scan file: " + path);
  CoincidenceScan scan;
  std::string line;
  if (!std::getline(in, line) ||
      line.rfind("position_mm,counts,duration_s", 0) != 0)
    throw std::runtime_error("scan CSV header mismatch in " + path);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    double pos = 0.0, dur = 0.0;
    long long counts = 0;
    if (!std::getline(row, cell, ',')) break;
    pos = std::stod(cell);
    if (!std::getline(row, cell, ','))
      throw std::runtime_error("malformed scan row in " + path);
    counts = std::stoll(cell);
    if (std::getline(row, cell, ',')) dur = std::stod(cell);
    scan.positions.push_back(pos);
    scan.counts.push_back(counts);
    scan.duration_s = dur;
  }
  std::ifstream side(sidecar_path_for(path));
  if (side) {
    json sidecar = json::parse(side, nullptr, true);
    if (sidecar.contains("arm")) scan.arm = sidecar["arm"].get<std::string>();
    if (sidecar.contains("seed")) {
      const auto& s = sidecar["seed"];
      scan.seed = s.is_string() ? std::stoull(s.get<std::string>())
                                : s.get<std::uint64_t>();
    }
    if (sidecar.contains("meta")) scan.meta_json = sidecar["meta"].dump();
  }
  scan.validate();
  return scan;
}

namespace {

json fit_result_json(const FitResult& fit) {
  json j;
  j["amplitude"] = fit.amplitude;
  j["amplitude_err"] = finite_or_null(fit.amplitude_err);
  j["background"] = fit.background;
  j["background_err"] = finite_or_null(fit.background_err);
  j["center_mm"] = fit.center_mm;
  j["center_err_mm"] = finite_or_null(fit.center_err);
  j["blur_sigma_mm"] = fit.blur_sigma_mm;
  j["blur_sigma_err_mm"] = finite_or_null(fit.blur_sigma_err);
  j["chi2_per_dof"] = fit.chi2_per_dof;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  j["blur_unbounded"] = fit.blur_unbounded;
  j["method"] = fit.method;
  return j;
}

json measurement_json(const VarianceMeasurement& m) {
  json j;
  j["label"] = m.label;
  j["var_x_minus_mm2"] = m.var_x_minus;
  j["err_x_mm2"] = m.err_x;
  j["var_p_plus_per_mm2"] = m.var_p_plus;
  j["err_p_per_mm2"] = m.err_p;
  return j;
}

}  // namespace

std::string fit_result_to_json(const FitResult& fit) {
  return fit_result_json(fit).dump(2) + "\n";
}

std::string measurement_to_json(const VarianceMeasurement& m) {
  return measurement_json(m).dump(2) + "\n";
}

VarianceMeasurement measurement_from_json_file(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("measurement JSON invalid: ") +
                             e.what());
  }
  VarianceMeasurement m;
  try {
    m.var_x_minus = j.at("var_x_minus_mm2").get<double>();
    m.var_p_plus = j.at("var_p_plus_per_mm2").get<double>();
  } catch (const json::exception&) {
    throw std::runtime_error(
        "measurement JSON needs var_x_minus_mm2 and var_p_plus_per_mm2");
  }
  if (j.contains("err_x_mm2")) m.err_x = j["err_x_mm2"].get<double>();
  if (j.contains("err_p_per_mm2")) m.err_p = j["err_p_per_mm2"].get<double>();
  if (j.contains("label")) m.label = j["label"].get<std::string>();
  m.validate();
  return m;
}

std::string criterion_report_to_json(const VarianceMeasurement& m,
                                     const CriterionReport& report) {
  json j = measurement_json(m);
  j["product_hbar2"] = report.product;
  j["product_err"] = report.product_err;
  j["duan_sum_optimized"] = report.duan_sum_optimized;
  j["regime"] = regime_name(report.regime);
  j["sigma_margin"] = finite_or_null(report.sigma_margin);
  j["exact"] = report.exact;
  return j.dump(2) + "\n";
}

}  // namespace eprlab::io

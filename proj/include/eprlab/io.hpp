#pragma once

#include <string>

#include "eprlab/criteria.hpp"
#include "eprlab/fit.hpp"
#include "eprlab/patterns.hpp"
#include "eprlab/synth.hpp"

namespace eprlab::io {

/// Shortest round-trip decimal form; identical bytes for identical doubles.
std::string format_double(double v);

/// Two-column CSV: position_mm,value.
void write_pattern_csv(const std::string& path, const PatternCurve& curve);

/// Three-column CSV (position_mm,counts,duration_s) plus a JSON sidecar at
/// sidecar_path_for(path) holding arm, seed, and meta.
void write_scan_csv(const std::string& path, const CoincidenceScan& scan);
CoincidenceScan read_scan_csv(const std::string& path);

std::string sidecar_path_for(const std::string& csv_path);

std::string fit_result_to_json(const FitResult& fit);
std::string measurement_to_json(const VarianceMeasurement& m);
VarianceMeasurement measurement_from_json_file(const std::string& path);

/// Report with the fixed field names var_x_minus_mm2, var_p_plus_per_mm2,
/// product_hbar2, product_err, regime (plus margins and the optimized sum).
std::string criterion_report_to_json(const VarianceMeasurement& m,
                                     const CriterionReport& report);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace eprlab::io

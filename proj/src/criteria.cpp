#include "eprlab/criteria.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace eprlab {

void VarianceMeasurement::validate() const {
  if (!(var_x_minus > 0.0) || !std::isfinite(var_x_minus))
    throw std::invalid_argument("var_x_minus must be positive");
  if (!(var_p_plus > 0.0) || !std::isfinite(var_p_plus))
    throw std::invalid_argument("var_p_plus must be positive");
  if (!(err_x >= 0.0) || !(err_p >= 0.0))
    throw std::invalid_argument("errors must be >= 0");
}

const char* regime_name(Regime regime) {
  switch (regime) {
    case Regime::epr_paradox: return "epr_paradox";
    case Regime::entangled: return "entangled";
    case Regime::classical: return "classical";
  }
  return "classical";
}

Regime regime_from_name(const std::string& name) {
  if (name == "epr_paradox") return Regime::epr_paradox;
  if (name == "entangled") return Regime::entangled;
  if (name == "classical") return Regime::classical;
  throw std::invalid_argument("unknown regime name: " + name);
}

CriterionCheck paradox_criterion(const VarianceMeasurement& m) {
  m.validate();
  const double product = m.var_x_minus * m.var_p_plus;
  return {product < 0.25, product};
}

CriterionCheck inseparability_criterion(const VarianceMeasurement& m) {
  m.validate();
  const double product = m.var_x_minus * m.var_p_plus;
  return {product < 1.0, product};
}

double duan_sum(const VarianceMeasurement& m, double scale) {
  m.validate();
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw std::invalid_argument("duan_sum scale must be positive");
  return m.var_x_minus / scale + scale * m.var_p_plus;
}

double duan_scale_optimum(const VarianceMeasurement& m) {
  m.validate();
  return std::sqrt(m.var_x_minus / m.var_p_plus);
}

double duan_sum_minimized(const VarianceMeasurement& m) {
  return duan_sum(m, duan_scale_optimum(m));
}

CriterionReport classify(const VarianceMeasurement& m) {
  m.validate();
  CriterionReport report;
  report.product = m.var_x_minus * m.var_p_plus;
  // relative errors in quadrature, first order
  const double rel_x = m.err_x / m.var_x_minus;
  const double rel_p = m.err_p / m.var_p_plus;
  report.product_err = report.product * std::sqrt(rel_x * rel_x + rel_p * rel_p);
  report.duan_sum_optimized = duan_sum_minimized(m);

  double boundary;
  if (report.product < 0.25) {
    report.regime = Regime::epr_paradox;
    boundary = 0.25;
  } else if (report.product < 1.0) {
    report.regime = Regime::entangled;
    boundary = 1.0;
  } else {
    report.regime = Regime::classical;
    boundary = 1.0;
  }

  if (report.product_err == 0.0) {
    report.exact = true;
    report.sigma_margin = std::numeric_limits<double>::infinity();
  } else {
    report.sigma_margin =
        std::abs(report.product - boundary) / report.product_err;
  }
  return report;
}

}  // namespace eprlab

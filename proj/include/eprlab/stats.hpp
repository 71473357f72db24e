#pragma once

#include <cstddef>
#include <vector>

namespace eprlab::stats {

double mean(const std::vector<double>& v);
double sample_variance(const std::vector<double>& v);  // n-1 denominator
double sample_stddev(const std::vector<double>& v);
double median(std::vector<double> v);  // by value, reorders its copy

/// Regularized lower incomplete gamma P(a, x), series/continued-fraction.
double gamma_p(double a, double x);

/// Chi-square CDF with k degrees of freedom.
double chi_square_cdf(double x, double k);

/// Upper-tail p-value of a chi-square statistic.
double chi_square_pvalue(double x, double k);

}  // namespace eprlab::stats

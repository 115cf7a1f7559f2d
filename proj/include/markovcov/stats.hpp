#pragma once

#include <utility>
#include <vector>

namespace markovcov {

/// Standard normal CDF.
double normal_cdf(double x);

/// Standard normal quantile, Phi^{-1}(p) for p in (0,1).
double normal_quantile(double p);

/// Empirical quantile by order statistic: the ceil(q*n)-th smallest value.
double empirical_quantile(std::vector<double> values, double q);

/// Wilson score interval for a binomial proportion at z = 1.96.
std::pair<double, double> wilson_interval(int successes, int trials);

/// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Kolmogorov distance between the empirical distribution of a sample and
/// the standard normal.
double kolmogorov_distance_to_normal(std::vector<double> sample);

double mean(const std::vector<double>& v);
double sample_sd(const std::vector<double>& v);
double median(std::vector<double> v);

}  // namespace markovcov

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lantest {

double normal_cdf(double x);

/// Inverse of normal_cdf, accurate to close to machine precision
/// (rational approximation plus one Halley refinement).
double normal_quantile(double p);

/// Upper-alpha quantile: phi(upper_quantile(alpha)) = 1 - alpha.
inline double upper_quantile(double alpha) { return normal_quantile(1.0 - alpha); }

double mean(std::span<const double> xs);
double variance(std::span<const double> xs); // sample variance, n-1 denominator
double median(std::span<const double> xs);

/// p in [0,1]; linear interpolation between order statistics.
double quantile(std::span<const double> xs, double p);

/// One-sample Kolmogorov-Smirnov distance against the standard normal.
double ks_distance_normal(std::span<const double> xs);

/// Asymptotic Kolmogorov p-value for the KS distance d at sample size n.
double ks_pvalue(double d, std::size_t n);

} // namespace lantest

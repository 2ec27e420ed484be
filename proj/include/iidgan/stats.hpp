#pragma once

#include <span>
#include <utility>
#include <vector>

namespace iidgan {

/// Standard normal CDF, 0.5·erfc(−x/√2).
double normal_cdf(double x);

/// Standard normal quantile (Wichura's AS 241, relative accuracy ~1e−16).
/// DomainError unless 0 < p < 1.
double normal_quantile(double p);

/// Shapiro–Wilk W with Royston's coefficient approximation, n in
/// [3, 5000]. DomainError on range or zero variance.
double shapiro_wilk(std::span<const double> samples);

/// One-sample Kolmogorov–Smirnov D against N(0, 1).
double ks_statistic(std::span<const double> samples);

struct QqPoint {
  double theoretical;
  double sample;
};

/// (Φ⁻¹((i − 0.5)/n), x_(i)) for the sorted samples.
std::vector<QqPoint> qq_data(std::span<const double> samples);

double mean(std::span<const double> v);

/// Sample standard deviation (divisor n − 1); 0 for fewer than 2 values.
double sample_std(std::span<const double> v);

}  // namespace iidgan

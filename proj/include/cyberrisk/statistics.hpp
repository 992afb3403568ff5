#pragma once

#include <span>
#include <vector>

namespace cyberrisk::stats {

double mean(std::span<const double> x);
/// Unbiased (n-1) sample variance.
double variance(std::span<const double> x);

/// Inverse empirical CDF (type 1): smallest order statistic x_(j) with j/n >= p.
double quantile_type1(std::span<const double> sorted, double p);
/// Linear interpolation between order statistics (type 7, R's default).
double quantile_type7(std::span<const double> sorted, double p);
/// Median as the midpoint of the two central order statistics for even n.
double median(std::vector<double> x);
/// Median absolute deviation about `center` (unscaled).
double mad(std::span<const double> x, double center);

double normal_cdf(double x);
double normal_quantile(double p);

/// Two-sided Kolmogorov-Smirnov distance between a sample and a continuous CDF.
template <class Cdf>
double ks_distance(std::vector<double> sample, Cdf cdf);

/// Kolmogorov-Smirnov distance between two empirical distributions.
double ks_distance_two_sample(std::vector<double> a, std::vector<double> b);

}  // namespace cyberrisk::stats

#include <algorithm>
#include <cmath>

template <class Cdf>
double cyberrisk::stats::ks_distance(std::vector<double> sample, Cdf cdf)
{
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return d;
}

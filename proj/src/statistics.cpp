#include "cyberrisk/statistics.hpp"

#include "cyberrisk/error.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <numeric>

namespace cyberrisk::stats {

double mean(std::span<const double> x)
{
    require(!x.empty(), "mean of empty sample");
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x)
{
    require(x.size() >= 2, "variance needs at least two values");
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x)
        ss += (v - m) * (v - m);
    return ss / static_cast<double>(x.size() - 1);
}

double quantile_type1(std::span<const double> sorted, double p)
{
    require(!sorted.empty(), "quantile of empty sample");
    const auto n = sorted.size();
    const double t = p * static_cast<double>(n);
    auto j = static_cast<std::size_t>(std::ceil(t - 1e-12 * t));
    j = std::clamp<std::size_t>(j, 1, n);
    return sorted[j - 1];
}

double quantile_type7(std::span<const double> sorted, double p)
{
    require(!sorted.empty(), "quantile of empty sample");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double median(std::vector<double> x)
{
    require(!x.empty(), "median of empty sample");
    std::sort(x.begin(), x.end());
    const auto n = x.size();
    return n % 2 == 1 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

double mad(std::span<const double> x, double center)
{
    std::vector<double> dev(x.size());
    std::transform(x.begin(), x.end(), dev.begin(), [center](double v) { return std::fabs(v - center); });
    return median(std::move(dev));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p)
{
    require(p > 0.0 && p < 1.0, "normal quantile outside (0,1)");
    return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

double ks_distance_two_sample(std::vector<double> a, std::vector<double> b)
{
    require(!a.empty() && !b.empty(), "KS distance of empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x)
            ++i;
        while (j < b.size() && b[j] <= x)
            ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

}  // namespace cyberrisk::stats

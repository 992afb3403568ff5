#include "cyberrisk/extremal.hpp"

#include "cyberrisk/error.hpp"
#include "cyberrisk/statistics.hpp"

#include <algorithm>
#include <ostream>

namespace cyberrisk {

std::string to_string(ExtremogramVariant v)
{
    return v == ExtremogramVariant::Ratio ? "ratio" : "covariance";
}

ExtremogramVariant parse_extremogram_variant(const std::string& name)
{
    if (name == "ratio")
        return ExtremogramVariant::Ratio;
    if (name == "covariance")
        return ExtremogramVariant::Covariance;
    throw ValidationError("unknown extremogram variant '" + name + "' (expected ratio or covariance)");
}

namespace {

void check_series(std::span<const double> series)
{
    require(series.size() >= 2, "extremogram: series needs at least two observations");
    const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
    require(*lo < *hi, "extremogram: series is constant");
}

ExtremogramCell cell_at_threshold(std::span<const double> series, double q, std::size_t lag,
                                  ExtremogramVariant variant)
{
    const std::size_t n = series.size();
    const std::size_t m = n - lag;
    std::size_t base = 0, joint = 0, total = 0;
    for (std::size_t t = 0; t < n; ++t)
        total += series[t] > q;
    for (std::size_t t = 0; t < m; ++t)
        if (series[t] > q) {
            ++base;
            joint += series[t + lag] > q;
        }
    ExtremogramCell cell;
    cell.exceedances = base;
    if (variant == ExtremogramVariant::Ratio) {
        if (base > 0)
            cell.value = static_cast<double>(joint) / static_cast<double>(base);
    } else if (total > 0) {
        const double p = static_cast<double>(total) / static_cast<double>(n);
        cell.value = static_cast<double>(joint) / static_cast<double>(m) - p * p;
    }
    return cell;
}

double threshold(std::span<const double> series, double level)
{
    std::vector<double> sorted(series.begin(), series.end());
    std::sort(sorted.begin(), sorted.end());
    return stats::quantile_type1(sorted, level);
}

}  // namespace

ExtremogramCell extremogram_cell(std::span<const double> series, double level, std::size_t lag,
                                 ExtremogramVariant variant)
{
    check_series(series);
    require(level > 0.0 && level < 1.0, "extremogram: level must lie in (0, 1)");
    require(lag < series.size(), "extremogram: lag must be smaller than the series length");
    return cell_at_threshold(series, threshold(series, level), lag, variant);
}

double extremogram(std::span<const double> series, double level, std::size_t lag, ExtremogramVariant variant)
{
    const auto cell = extremogram_cell(series, level, lag, variant);
    if (!cell.value)
        throw ComputationError("extremogram: empty conditioning set at level " + std::to_string(level));
    return *cell.value;
}

std::vector<double> default_extremogram_levels()
{
    std::vector<double> levels;
    for (int i = 1; i <= 99; ++i)
        levels.push_back(i / 100.0);
    return levels;
}

ExtremogramMatrix extremogram_matrix(std::span<const double> series, std::span<const double> levels,
                                     std::size_t max_lag, ExtremogramVariant variant)
{
    check_series(series);
    require(!levels.empty(), "extremogram_matrix: no quantile levels");
    require(max_lag >= 1, "extremogram_matrix: max_lag must be positive");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        require(levels[i] > 0.0 && levels[i] < 1.0, "extremogram_matrix: levels must lie in (0, 1)");
        require(i == 0 || levels[i] > levels[i - 1], "extremogram_matrix: levels must be increasing");
    }
    ExtremogramMatrix matrix;
    matrix.levels.assign(levels.begin(), levels.end());
    matrix.max_lag = max_lag;
    matrix.variant = variant;
    std::vector<double> sorted(series.begin(), series.end());
    std::sort(sorted.begin(), sorted.end());
    bool any = false;
    for (double level : levels) {
        const double q = stats::quantile_type1(sorted, level);
        auto& row = matrix.cells.emplace_back();
        row.reserve(max_lag);
        for (std::size_t h = 1; h <= max_lag; ++h) {
            if (h >= series.size()) {
                row.push_back({});
                continue;
            }
            row.push_back(cell_at_threshold(series, q, h, variant));
            any = any || row.back().value.has_value();
        }
    }
    if (!any)
        throw ComputationError("extremogram_matrix: every cell has an empty conditioning set");
    return matrix;
}

void write_extremogram_csv(std::ostream& out, const ExtremogramMatrix& matrix)
{
    out << "level,lag,value,variant,exceedance_count\n";
    const auto old_precision = out.precision(17);
    for (std::size_t i = 0; i < matrix.levels.size(); ++i)
        for (std::size_t h = 1; h <= matrix.max_lag; ++h) {
            const auto& cell = matrix.at(i, h);
            out << matrix.levels[i] << ',' << h << ',';
            if (cell.value)
                out << *cell.value;
            out << ',' << to_string(matrix.variant) << ',' << cell.exceedances << '\n';
        }
    out.precision(old_precision);
}

}  // namespace cyberrisk

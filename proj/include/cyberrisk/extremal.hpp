#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cyberrisk {

enum class ExtremogramVariant { Ratio, Covariance };

std::string to_string(ExtremogramVariant v);
ExtremogramVariant parse_extremogram_variant(const std::string& name);

struct ExtremogramCell {
    std::optional<double> value;  ///< empty when no exceedance conditions the cell
    std::size_t exceedances = 0;  ///< count of X_t > q over t = 1..n-h
};

ExtremogramCell extremogram_cell(std::span<const double> series, double level, std::size_t lag,
                                 ExtremogramVariant variant);

/// Sample extremogram at quantile `level` and lag `lag`.
double extremogram(std::span<const double> series, double level, std::size_t lag,
                   ExtremogramVariant variant = ExtremogramVariant::Ratio);

struct ExtremogramMatrix {
    std::vector<double> levels;
    std::size_t max_lag = 0;
    ExtremogramVariant variant = ExtremogramVariant::Ratio;
    std::vector<std::vector<ExtremogramCell>> cells;  ///< [level][lag - 1]

    const ExtremogramCell& at(std::size_t level_index, std::size_t lag) const
    {
        return cells[level_index][lag - 1];
    }
};

/// 0.01, 0.02, ..., 0.99
std::vector<double> default_extremogram_levels();
constexpr std::size_t kDefaultExtremogramMaxLag = 124;

/// Lags 1..max_lag for every level.
ExtremogramMatrix extremogram_matrix(std::span<const double> series, std::span<const double> levels,
                                     std::size_t max_lag, ExtremogramVariant variant = ExtremogramVariant::Ratio);

/// CSV columns: level,lag,value,variant,exceedance_count
void write_extremogram_csv(std::ostream& out, const ExtremogramMatrix& matrix);

}  // namespace cyberrisk

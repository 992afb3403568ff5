#pragma once

#include "cyberrisk/compound_engine.hpp"

#include "json.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cyberrisk {

enum class UtilityKind { Logarithmic, Linear, Exponential };

std::string to_string(UtilityKind kind);
UtilityKind parse_utility_kind(const std::string& name);

struct UtilitySpec {
    UtilityKind kind = UtilityKind::Logarithmic;
    double wealth = 1e9;
    double risk_aversion = 0.0;   ///< exponential utility only
    /// Log utility is evaluated at max(x, ruin_floor * wealth).
    double ruin_floor = 1e-6;

    void validate() const;
    double operator()(double x) const;
    double derivative(double x) const;
};

struct PolicyTerms {
    double cover_fraction = 0.1;   ///< c; events are capped at c * w
    std::vector<double> weights;   ///< portfolio weights, one per line
    bool aggregate_cap = false;    ///< cap the period total instead of each event

    void validate(std::size_t lines) const;
};

enum class PremiumMode { Line, Portfolio };

struct PremiumQuote {
    std::string mode;
    std::string target;
    double premium = 0.0;
    double std_error = 0.0;
    std::size_t iterations = 0;
    std::size_t scenarios = 0;
    bool converged = false;
    std::optional<double> ci_low;
    std::optional<double> ci_high;
    std::vector<std::string> warnings;
};

/// Per-scenario uninsured loss L and insured (capped) part of it.
struct LossColumns {
    std::vector<double> total;
    std::vector<double> capped;

    LossColumns subset(std::span<const std::size_t> rows) const;
};

/// `line` selects the target in Line mode; `rows` restricts the scenarios (empty = all).
LossColumns loss_columns(const JointScenarioSet& scenarios, const UtilitySpec& utility, const PolicyTerms& terms,
                         PremiumMode mode, std::size_t line = 0, std::span<const std::size_t> rows = {});

/// Solve mean u(w - L) = mean u(w - P - L + L_capped) for P by bisection.
PremiumQuote solve_premium(const LossColumns& losses, const UtilitySpec& utility);

PremiumQuote indifference_premium(const JointScenarioSet& scenarios, const UtilitySpec& utility,
                                  const PolicyTerms& terms, PremiumMode mode, std::size_t line = 0);

/// Scenarios where every other line sits at or above its own empirical
/// `level`-quantile; level <= 0 keeps every scenario.
std::vector<std::size_t> conditioning_set(const JointScenarioSet& scenarios, std::size_t line, double level);

inline constexpr std::size_t kMinConditioningScenarios = 100;

PremiumQuote conditional_premium(const JointScenarioSet& scenarios, std::size_t line, double level,
                                 const UtilitySpec& utility, const PolicyTerms& terms);

/// Type-1 order-statistic quantile.
double empirical_var(std::span<const double> sample, double level);

struct DiversificationResult {
    double ratio = 0.0;
    double portfolio_var = 0.0;
    std::vector<double> line_vars;
    double level = 0.0;
    std::optional<double> ci_low;
    std::optional<double> ci_high;
};

DiversificationResult diversification_ratio(const JointScenarioSet& scenarios, std::span<const double> weights,
                                            double level, std::span<const std::size_t> rows = {});

struct BootstrapInterval {
    double low = 0.0;
    double high = 0.0;
    double point = 0.0;
    std::size_t failures = 0;
};

/// Percentile bootstrap over `units` resampling units; `statistic` receives the
/// resampled unit indices.
BootstrapInterval bootstrap_ci(std::size_t units,
                               const std::function<double(std::span<const std::size_t>)>& statistic,
                               std::size_t replicates, double level, std::uint64_t seed);

/// CSV columns: mode,target,premium,std_error,ci_low,ci_high,settings_hash
void write_quotes_csv(std::ostream& out, std::span<const PremiumQuote> quotes, const std::string& settings_hash);
nlohmann::json to_json(const PremiumQuote& quote);
nlohmann::json to_json(const DiversificationResult& result);

}  // namespace cyberrisk

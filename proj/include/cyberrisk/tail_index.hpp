#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cyberrisk {

/// Positive losses sorted increasing, with 1-based order-statistic access.
class OrderedSample {
public:
    explicit OrderedSample(std::vector<double> values);

    std::size_t size() const { return values_.size(); }
    /// X_(i,n): i-th smallest, i in [1, n].
    double ascending(std::size_t i) const { return values_[i - 1]; }
    /// X^(i,n): i-th largest, i in [1, n].
    double descending(std::size_t i) const { return values_[values_.size() - i]; }
    std::span<const double> values() const { return values_; }
    /// ln X^(i,n) partial sums: log_prefix(k) = sum_{i=1..k} ln X^(i,n).
    double log_prefix(std::size_t k) const { return log_prefix_[k]; }

private:
    std::vector<double> values_;
    std::vector<double> log_prefix_;
};

enum EstimateFlag : unsigned {
    kFlagNone = 0,
    kFlagDegenerate = 1u << 0,   ///< top values tied; xi = 0, alpha undefined
    kFlagInfeasible = 1u << 1,   ///< (k0, k) violates 0 <= k0 < k < n - 1
    kFlagTiesPerturbed = 1u << 2,
    kFlagExperimental = 1u << 3,
};

std::string flags_to_string(unsigned flags);

struct TailIndexEstimate {
    std::string method;
    std::optional<double> xi;       ///< inverse tail index
    std::optional<double> alpha;    ///< tail exponent, 1 / xi
    std::optional<double> scale;    ///< threshold or x_min (USD)
    std::optional<std::size_t> k;
    std::optional<std::size_t> k0;
    std::optional<double> std_error;
    unsigned flags = kFlagNone;
};

/// Classical Hill estimator of xi from the k largest order statistics.
TailIndexEstimate hill(const OrderedSample& sample, std::size_t k);

/// Average of H_{j,n} over j = k+1..rk.
double smoothed_hill(const OrderedSample& sample, std::size_t k, std::size_t r = 2);

struct HillPlotPoint {
    std::size_t k = 0;
    double xi = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

/// Hill values with symmetric normal intervals xi +- z * xi / sqrt(k).
std::vector<HillPlotPoint> hill_plot_data(const OrderedSample& sample, std::size_t k_min, std::size_t k_max,
                                          double confidence = 0.95);

/// Weighted trimmed Hill estimator; weights[m] applies to i = k0 + 1 + m.
double trimmed_hill(const OrderedSample& sample, std::size_t k0, std::size_t k, std::span<const double> weights);

/// Trimmed Hill estimator with the optimal (BLUE) weights.
TailIndexEstimate trimmed_hill_optimal(const OrderedSample& sample, std::size_t k0, std::size_t k);

/// Grid of trimmed estimates in (k0 outer, k inner) order; infeasible pairs are
/// kept and flagged. Throws if no pair is feasible.
std::vector<TailIndexEstimate> trimmed_hill_sweep(const OrderedSample& sample, std::span<const std::size_t> k0_values,
                                                  std::span<const std::size_t> k_values);

struct ParetoMle {
    double alpha = 0.0;
    double alpha_unbiased = 0.0;  ///< (n - 2) / n * alpha
    double x_min = 0.0;
};

ParetoMle mle_pareto(const OrderedSample& sample, double x_min);

/// Least-squares slope of the log empirical survival rank plot.
TailIndexEstimate ls_estimator(const OrderedSample& sample);
TailIndexEstimate wls_estimator(const OrderedSample& sample, double x_min);
/// Percentile method: ln 3 / (ln P75 - ln P25), type-7 sample percentiles.
TailIndexEstimate pm_estimator(const OrderedSample& sample);
/// Experimental percentile-pair variant: ln((1-p_low)/(1-p_high)) / ln(P_high / P_low).
TailIndexEstimate percentile_pair_estimator(const OrderedSample& sample, double p_low, double p_high);

/// Real part of the empirical characteristic function.
double ecf_real(std::span<const double> sample, double t);

struct EcfRegressionConfig {
    double delta = 0.45;  ///< grid size m = ceil(n^delta), 0 < delta < 1/2

    std::size_t grid_size(std::size_t n) const;
};

struct EcfRegressionResult {
    double alpha = 0.0;
    double intercept = 0.0;
    double std_error = 0.0;      ///< delta-method sampling error of the slope
    double ols_std_error = 0.0;  ///< classical residual-based error
    std::size_t grid_points = 0; ///< points surviving the 1 - U_n(t) > 0 filter
};

/// Regress ln(1 - U_n(t_j)) on ln t_j with t_j = j / sqrt(n), j = 1..m.
EcfRegressionResult ecf_regression(std::span<const double> sample, const EcfRegressionConfig& config = {});

struct QqPoint {
    double theoretical = 0.0;
    double empirical = 0.0;
};

/// Pareto QQ points (-ln(1 - i/(n+1)), ln X_(i,n)).
std::vector<QqPoint> pareto_qq(const OrderedSample& sample);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

LineFit fit_line(std::span<const QqPoint> points);

/// CSV columns: method,k0,k,xi_hat,alpha_hat,scale,std_error,flags
void write_estimates_csv(std::ostream& out, std::span<const TailIndexEstimate> estimates, bool header = true,
                         const std::string& prefix_column = {}, const std::string& prefix_value = {});

}  // namespace cyberrisk

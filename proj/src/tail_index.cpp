#include "cyberrisk/tail_index.hpp"

#include "cyberrisk/error.hpp"
#include "cyberrisk/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

namespace cyberrisk {

OrderedSample::OrderedSample(std::vector<double> values) : values_(std::move(values))
{
    require(!values_.empty(), "ordered sample: empty");
    for (double v : values_)
        require(std::isfinite(v) && v > 0.0, "ordered sample: values must be finite and positive");
    std::sort(values_.begin(), values_.end());
    log_prefix_.resize(values_.size() + 1, 0.0);
    for (std::size_t k = 1; k <= values_.size(); ++k)
        log_prefix_[k] = log_prefix_[k - 1] + std::log(descending(k));
}

std::string flags_to_string(unsigned flags)
{
    std::string out;
    const auto add = [&](unsigned bit, const char* name) {
        if (flags & bit) {
            if (!out.empty())
                out += '|';
            out += name;
        }
    };
    add(kFlagDegenerate, "degenerate");
    add(kFlagInfeasible, "infeasible");
    add(kFlagTiesPerturbed, "ties_perturbed");
    add(kFlagExperimental, "experimental");
    return out;
}

namespace {

void set_xi(TailIndexEstimate& e, double xi)
{
    e.xi = xi;
    if (xi > 0.0)
        e.alpha = 1.0 / xi;
    else
        e.flags |= kFlagDegenerate;
}

void set_alpha(TailIndexEstimate& e, double alpha)
{
    e.alpha = alpha;
    if (alpha > 0.0)
        e.xi = 1.0 / alpha;
}

/// Copy of the sorted values with ties nudged apart by one ulp each.
std::vector<double> untied(const OrderedSample& sample, unsigned& flags)
{
    std::vector<double> x(sample.values().begin(), sample.values().end());
    for (std::size_t i = 1; i < x.size(); ++i)
        if (x[i] <= x[i - 1]) {
            x[i] = std::nextafter(x[i - 1], std::numeric_limits<double>::infinity());
            flags |= kFlagTiesPerturbed;
        }
    return x;
}

}  // namespace

TailIndexEstimate hill(const OrderedSample& sample, std::size_t k)
{
    const std::size_t n = sample.size();
    require(k >= 2 && k < n, "hill: k must satisfy 2 <= k < n (k=" + std::to_string(k) + ", n=" +
                                 std::to_string(n) + ")");
    const double threshold = sample.descending(k + 1);
    double sum = 0.0;
    for (std::size_t i = 1; i <= k; ++i)
        sum += std::log(sample.descending(i) / threshold);
    TailIndexEstimate e;
    e.method = "hill";
    e.k = k;
    e.scale = threshold;
    set_xi(e, sum / static_cast<double>(k));
    e.std_error = *e.xi / std::sqrt(static_cast<double>(k));
    return e;
}

namespace {

/// H_{k,n} through prefix sums, for sequences over many k.
double hill_fast(const OrderedSample& sample, std::size_t k)
{
    return sample.log_prefix(k) / static_cast<double>(k) - std::log(sample.descending(k + 1));
}

}  // namespace

double smoothed_hill(const OrderedSample& sample, std::size_t k, std::size_t r)
{
    require(k >= 2, "smoothed_hill: k must be >= 2");
    require(r >= 2, "smoothed_hill: smoothing factor r must be >= 2");
    require(r * k < sample.size(), "smoothed_hill: r*k must be < n");
    double sum = 0.0;
    for (std::size_t j = k + 1; j <= r * k; ++j)
        sum += hill_fast(sample, j);
    return sum / static_cast<double>((r - 1) * k);
}

std::vector<HillPlotPoint> hill_plot_data(const OrderedSample& sample, std::size_t k_min, std::size_t k_max,
                                          double confidence)
{
    require(k_min >= 2 && k_min < k_max && k_max < sample.size(),
            "hill_plot_data: need 2 <= k_min < k_max < n");
    require(confidence > 0.0 && confidence < 1.0, "hill_plot_data: confidence must lie in (0, 1)");
    const double z = stats::normal_quantile(0.5 + confidence / 2.0);
    std::vector<HillPlotPoint> points;
    points.reserve(k_max - k_min + 1);
    for (std::size_t k = k_min; k <= k_max; ++k) {
        const double xi = hill_fast(sample, k);
        const double half = z * xi / std::sqrt(static_cast<double>(k));
        points.push_back({k, xi, xi - half, xi + half});
    }
    return points;
}

namespace {

void check_trim_indices(const OrderedSample& sample, std::size_t k0, std::size_t k, const char* who)
{
    require(k0 < k && k + 1 < sample.size(), std::string(who) + ": need 0 <= k0 < k < n - 1 (k0=" +
                                                 std::to_string(k0) + ", k=" + std::to_string(k) +
                                                 ", n=" + std::to_string(sample.size()) + ")");
}

}  // namespace

double trimmed_hill(const OrderedSample& sample, std::size_t k0, std::size_t k, std::span<const double> weights)
{
    check_trim_indices(sample, k0, k, "trimmed_hill");
    require(weights.size() == k - k0, "trimmed_hill: need exactly k - k0 weights");
    const double threshold = sample.descending(k + 1);
    double sum = 0.0;
    for (std::size_t i = k0 + 1; i <= k; ++i) {
        const double w = weights[i - k0 - 1];
        require(w >= 0.0, "trimmed_hill: weights must be non-negative");
        sum += w * std::log(sample.descending(i) / threshold);
    }
    return sum;
}

TailIndexEstimate trimmed_hill_optimal(const OrderedSample& sample, std::size_t k0, std::size_t k)
{
    check_trim_indices(sample, k0, k, "trimmed_hill_optimal");
    const double threshold = sample.descending(k + 1);
    double sum = static_cast<double>(k0 + 1) * std::log(sample.descending(k0 + 1) / threshold);
    for (std::size_t i = k0 + 2; i <= k; ++i)
        sum += std::log(sample.descending(i) / threshold);
    TailIndexEstimate e;
    e.method = "trimmed_hill";
    e.k = k;
    e.k0 = k0;
    e.scale = threshold;
    set_xi(e, sum / static_cast<double>(k - k0));
    e.std_error = *e.xi / std::sqrt(static_cast<double>(k - k0));
    return e;
}

std::vector<TailIndexEstimate> trimmed_hill_sweep(const OrderedSample& sample, std::span<const std::size_t> k0_values,
                                                  std::span<const std::size_t> k_values)
{
    std::vector<TailIndexEstimate> grid;
    grid.reserve(k0_values.size() * k_values.size());
    std::size_t feasible = 0;
    for (std::size_t k0 : k0_values)
        for (std::size_t k : k_values) {
            if (k0 < k && k + 1 < sample.size()) {
                grid.push_back(trimmed_hill_optimal(sample, k0, k));
                ++feasible;
            } else {
                TailIndexEstimate e;
                e.method = "trimmed_hill";
                e.k = k;
                e.k0 = k0;
                e.flags = kFlagInfeasible;
                grid.push_back(e);
            }
        }
    if (feasible == 0)
        throw ValidationError("trimmed_hill_sweep: no feasible (k0, k) pair");
    return grid;
}

ParetoMle mle_pareto(const OrderedSample& sample, double x_min)
{
    const std::size_t n = sample.size();
    require(n >= 3, "mle_pareto: need at least 3 observations");
    require(x_min > 0.0 && sample.ascending(1) >= x_min, "mle_pareto: all values must be >= x_min > 0");
    double log_sum = 0.0;
    for (double x : sample.values())
        log_sum += std::log(x / x_min);
    if (!(log_sum > 0.0))
        throw ComputationError("mle_pareto: degenerate at threshold (all values equal x_min)");
    ParetoMle mle;
    mle.alpha = static_cast<double>(n) / log_sum;
    mle.alpha_unbiased = static_cast<double>(n - 2) / static_cast<double>(n) * mle.alpha;
    mle.x_min = x_min;
    return mle;
}

TailIndexEstimate ls_estimator(const OrderedSample& sample)
{
    const std::size_t n = sample.size();
    require(n >= 3, "ls_estimator: need at least 3 observations");
    TailIndexEstimate e;
    e.method = "ls";
    if (sample.ascending(1) == sample.ascending(n))
        throw ComputationError("ls_estimator: all values equal (zero-variance regressor)");
    const auto x = untied(sample, e.flags);
    const double nn = static_cast<double>(n);
    double y_mean = 0.0, z_mean = 0.0;
    std::vector<double> y(n), z(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = std::log((nn - static_cast<double>(i + 1) + 0.5) / nn);
        z[i] = std::log(x[i]);
        y_mean += y[i];
        z_mean += z[i];
    }
    y_mean /= nn;
    z_mean /= nn;
    double sxy = 0.0, szz = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (y[i] - y_mean) * (z[i] - z_mean);
        szz += (z[i] - z_mean) * (z[i] - z_mean);
    }
    set_alpha(e, std::fabs(sxy / szz));
    e.scale = sample.ascending(1);
    return e;
}

TailIndexEstimate wls_estimator(const OrderedSample& sample, double x_min)
{
    const std::size_t n = sample.size();
    require(n >= 2, "wls_estimator: need at least 2 observations");
    require(x_min > 0.0 && sample.ascending(1) >= x_min, "wls_estimator: all values must be >= x_min > 0");
    TailIndexEstimate e;
    e.method = "wls";
    const double nn = static_cast<double>(n);
    double numerator = 0.0, denominator = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        numerator -= std::log((nn + 1.0 - static_cast<double>(i)) / nn);
        denominator += std::log(sample.ascending(i) / x_min);
    }
    if (!(denominator > 0.0))
        throw ComputationError("wls_estimator: zero denominator (all values at x_min)");
    set_alpha(e, numerator / denominator);
    e.scale = x_min;
    return e;
}

TailIndexEstimate percentile_pair_estimator(const OrderedSample& sample, double p_low, double p_high)
{
    require(sample.size() >= 4, "percentile estimator: need at least 4 observations");
    require(0.0 < p_low && p_low < p_high && p_high < 1.0, "percentile estimator: need 0 < p_low < p_high < 1");
    const double lo = stats::quantile_type7(sample.values(), p_low);
    const double hi = stats::quantile_type7(sample.values(), p_high);
    if (!(hi > lo))
        throw ComputationError("percentile estimator: upper and lower percentiles coincide");
    TailIndexEstimate e;
    e.method = "percentile";
    set_alpha(e, std::log((1.0 - p_low) / (1.0 - p_high)) / (std::log(hi) - std::log(lo)));
    e.scale = lo;
    e.flags |= kFlagExperimental;
    return e;
}

TailIndexEstimate pm_estimator(const OrderedSample& sample)
{
    TailIndexEstimate e = percentile_pair_estimator(sample, 0.25, 0.75);
    e.method = "pm";
    e.flags &= ~kFlagExperimental;
    return e;
}

double ecf_real(std::span<const double> sample, double t)
{
    require(!sample.empty(), "ecf_real: empty sample");
    double sum = 0.0;
    for (double x : sample)
        sum += std::cos(t * x);
    return sum / static_cast<double>(sample.size());
}

std::size_t EcfRegressionConfig::grid_size(std::size_t n) const
{
    require(delta > 0.0 && delta < 0.5, "ECF regression: delta must lie in (0, 1/2)");
    return static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(n), delta)));
}

EcfRegressionResult ecf_regression(std::span<const double> sample, const EcfRegressionConfig& config)
{
    const std::size_t n = sample.size();
    require(n >= 2, "ecf_regression: need at least two observations");
    const std::size_t m = config.grid_size(n);
    const double root_n = std::sqrt(static_cast<double>(n));

    std::vector<double> t, u, z, y;
    for (std::size_t j = 1; j <= m; ++j) {
        const double tj = static_cast<double>(j) / root_n;
        const double uj = ecf_real(sample, tj);
        if (1.0 - uj > 0.0) {
            t.push_back(tj);
            u.push_back(uj);
            z.push_back(std::log(tj));
            y.push_back(std::log(1.0 - uj));
        }
    }
    const std::size_t used = t.size();
    if (used < 2)
        throw ComputationError("ecf_regression: insufficient ECF grid (" + std::to_string(used) +
                               " usable points)");
    const double z_mean = stats::mean(z), y_mean = stats::mean(y);
    std::vector<double> a(used);
    double szz = 0.0, say = 0.0;
    for (std::size_t j = 0; j < used; ++j) {
        a[j] = z[j] - z_mean;
        szz += a[j] * a[j];
        say += a[j] * y[j];
    }
    EcfRegressionResult r;
    r.alpha = say / szz;
    r.intercept = y_mean - r.alpha * z_mean;
    r.grid_points = used;

    double rss = 0.0;
    for (std::size_t j = 0; j < used; ++j) {
        const double e = y[j] - r.intercept - r.alpha * z[j];
        rss += e * e;
    }
    r.ols_std_error = used > 2 ? std::sqrt(rss / static_cast<double>(used - 2) / szz) : 0.0;

    // Linearize alpha-hat in the cosine means: d alpha / d U_j = -a_j / ((1 - U_j) S_zz).
    std::vector<double> g(used);
    for (std::size_t j = 0; j < used; ++j)
        g[j] = a[j] / (1.0 - u[j]);
    double q2 = 0.0;
    for (double x : sample) {
        double q = 0.0;
        for (std::size_t j = 0; j < used; ++j)
            q += g[j] * (std::cos(t[j] * x) - u[j]);
        q2 += q * q;
    }
    const double nn = static_cast<double>(n);
    r.std_error = std::sqrt(q2 / nn / nn) / szz;
    return r;
}

std::vector<QqPoint> pareto_qq(const OrderedSample& sample)
{
    const std::size_t n = sample.size();
    require(n >= 2, "pareto_qq: need at least two observations");
    std::vector<QqPoint> points(n);
    const double np1 = static_cast<double>(n + 1);
    for (std::size_t i = 1; i <= n; ++i)
        points[i - 1] = {-std::log1p(-static_cast<double>(i) / np1), std::log(sample.ascending(i))};
    return points;
}

LineFit fit_line(std::span<const QqPoint> points)
{
    require(points.size() >= 2, "fit_line: need at least two points");
    const double n = static_cast<double>(points.size());
    double mx = 0.0, my = 0.0;
    for (const auto& p : points) {
        mx += p.theoretical;
        my += p.empirical;
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& p : points) {
        sxx += (p.theoretical - mx) * (p.theoretical - mx);
        sxy += (p.theoretical - mx) * (p.empirical - my);
        syy += (p.empirical - my) * (p.empirical - my);
    }
    require(sxx > 0.0, "fit_line: zero variance in abscissa");
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
    return fit;
}

namespace {

template <class T>
std::string field(const std::optional<T>& v)
{
    if (!v)
        return "";
    std::ostringstream s;
    s.precision(17);
    s << *v;
    return s.str();
}

}  // namespace

void write_estimates_csv(std::ostream& out, std::span<const TailIndexEstimate> estimates, bool header,
                         const std::string& prefix_column, const std::string& prefix_value)
{
    const std::string prefix_head = prefix_column.empty() ? "" : prefix_column + ",";
    const std::string prefix_cell = prefix_column.empty() ? "" : prefix_value + ",";
    if (header)
        out << prefix_head << "method,k0,k,xi_hat,alpha_hat,scale,std_error,flags\n";
    for (const auto& e : estimates)
        out << prefix_cell << e.method << ',' << field(e.k0) << ',' << field(e.k) << ',' << field(e.xi) << ','
            << field(e.alpha) << ',' << field(e.scale) << ',' << field(e.std_error) << ','
            << flags_to_string(e.flags) << '\n';
}

}  // namespace cyberrisk

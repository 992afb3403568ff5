#include "cyberrisk/pricing.hpp"

#include "cyberrisk/error.hpp"
#include "cyberrisk/parallel.hpp"
#include "cyberrisk/random.hpp"
#include "cyberrisk/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

namespace cyberrisk {

std::string to_string(UtilityKind kind)
{
    switch (kind) {
    case UtilityKind::Logarithmic: return "log";
    case UtilityKind::Linear: return "linear";
    case UtilityKind::Exponential: return "exponential";
    }
    return "unknown";
}

UtilityKind parse_utility_kind(const std::string& name)
{
    if (name == "log" || name == "logarithmic")
        return UtilityKind::Logarithmic;
    if (name == "linear")
        return UtilityKind::Linear;
    if (name == "exponential" || name == "exp")
        return UtilityKind::Exponential;
    throw ValidationError("unknown utility '" + name + "' (expected log, linear or exponential)");
}

void UtilitySpec::validate() const
{
    require(std::isfinite(wealth) && wealth > 0.0, "utility: wealth must be positive");
    require(kind != UtilityKind::Exponential || risk_aversion > 0.0,
            "utility: exponential utility needs risk_aversion > 0");
    require(ruin_floor > 0.0 && ruin_floor < 1.0, "utility: ruin_floor must lie in (0, 1)");
}

double UtilitySpec::operator()(double x) const
{
    switch (kind) {
    case UtilityKind::Logarithmic: return std::log(std::max(x, ruin_floor * wealth));
    case UtilityKind::Linear: return x;
    case UtilityKind::Exponential: return -std::expm1(-risk_aversion * x) / risk_aversion;
    }
    return x;
}

double UtilitySpec::derivative(double x) const
{
    switch (kind) {
    case UtilityKind::Logarithmic: return x > ruin_floor * wealth ? 1.0 / x : 0.0;
    case UtilityKind::Linear: return 1.0;
    case UtilityKind::Exponential: return std::exp(-risk_aversion * x);
    }
    return 1.0;
}

void PolicyTerms::validate(std::size_t lines) const
{
    require(cover_fraction > 0.0 && cover_fraction <= 1.0, "policy: cover fraction must lie in (0, 1]");
    if (weights.empty())
        return;
    require(weights.size() == lines, "policy: expected " + std::to_string(lines) + " portfolio weights, got " +
                                         std::to_string(weights.size()));
    double sum = 0.0;
    for (double w : weights) {
        require(w >= 0.0, "policy: portfolio weights must be non-negative");
        sum += w;
    }
    require(std::fabs(sum - 1.0) <= 1e-9, "policy: portfolio weights must sum to 1");
}

LossColumns LossColumns::subset(std::span<const std::size_t> rows) const
{
    LossColumns out;
    out.total.reserve(rows.size());
    out.capped.reserve(rows.size());
    for (std::size_t r : rows) {
        out.total.push_back(total[r]);
        out.capped.push_back(capped[r]);
    }
    return out;
}

LossColumns loss_columns(const JointScenarioSet& scenarios, const UtilitySpec& utility, const PolicyTerms& terms,
                         PremiumMode mode, std::size_t line, std::span<const std::size_t> rows)
{
    utility.validate();
    terms.validate(scenarios.lines());
    const std::size_t d = scenarios.lines();
    std::vector<double> weights(d, 0.0);
    if (mode == PremiumMode::Line) {
        require(line < d, "premium: line index out of range");
        weights[line] = 1.0;
    } else if (terms.weights.empty()) {
        std::fill(weights.begin(), weights.end(), 1.0 / static_cast<double>(d));
    } else {
        weights = terms.weights;
    }
    const double cap = terms.cover_fraction * utility.wealth;
    const std::size_t count = rows.empty() ? scenarios.scenarios() : rows.size();
    LossColumns out;
    out.total.resize(count);
    out.capped.resize(count);
    parallel_for_blocks(block_count(count), [&](std::size_t b) {
        const std::size_t end = std::min(count, (b + 1) * kScenarioBlock);
        for (std::size_t k = b * kScenarioBlock; k < end; ++k) {
            const std::size_t s = rows.empty() ? k : rows[k];
            double total = 0.0, capped = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                if (weights[i] == 0.0)
                    continue;
                double line_total = 0.0, line_capped = 0.0;
                scenarios.for_each_event(s, i, [&](double x) {
                    line_total += x;
                    line_capped += std::min(x, cap);
                });
                total += weights[i] * line_total;
                capped += weights[i] * (terms.aggregate_cap ? line_total : line_capped);
            }
            out.total[k] = total;
            out.capped[k] = terms.aggregate_cap ? std::min(capped, cap) : capped;
        }
    });
    return out;
}

namespace {

/// Block-ordered sum of f(k) over k in [0, n).
template <class F>
double block_sum(std::size_t n, F&& f)
{
    std::vector<double> partial(block_count(n), 0.0);
    parallel_for_blocks(partial.size(), [&](std::size_t b) {
        const std::size_t end = std::min(n, (b + 1) * kScenarioBlock);
        double s = 0.0;
        for (std::size_t k = b * kScenarioBlock; k < end; ++k)
            s += f(k);
        partial[b] = s;
    });
    return std::accumulate(partial.begin(), partial.end(), 0.0);
}

}  // namespace

PremiumQuote solve_premium(const LossColumns& losses, const UtilitySpec& utility)
{
    utility.validate();
    const std::size_t n = losses.total.size();
    require(n > 0 && losses.capped.size() == n, "premium: empty scenario set");
    const double w = utility.wealth;
    const double sn = static_cast<double>(n);

    double mean_capped = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        mean_capped += losses.capped[k];
    mean_capped /= sn;

    const double base = block_sum(n, [&](std::size_t k) { return utility(w - losses.total[k]); }) / sn;
    const auto gap = [&](double p) {
        return block_sum(n, [&](std::size_t k) { return utility(w - p - losses.total[k] + losses.capped[k]); }) / sn -
               base;
    };

    PremiumQuote q;
    q.scenarios = n;
    const double tol = std::max(1e-6 * w, 0.01);
    double lo = 0.0;
    double hi = 10.0 * mean_capped;
    if (!(mean_capped > 0.0)) {
        q.converged = true;
        return q;
    }
    if (utility.kind == UtilityKind::Logarithmic) {
        // With the ruin floor every scenario is floored once P reaches w, so gap(w) <= 0.
        if (hi > w) {
            hi = w;
            q.warnings.push_back("bracket shrunk to [0, w]");
        }
        while (gap(hi) > 0.0 && hi < w) {
            hi = std::min(2.0 * hi, w);
            q.warnings.push_back("bracket expanded to " + std::to_string(hi));
        }
    } else {
        for (int i = 0; i < 60 && gap(hi) > 0.0; ++i)
            hi *= 2.0;
    }
    if (gap(hi) > 0.0)
        throw ComputationError("premium: no indifference point in [0, " + std::to_string(hi) + "]");

    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (gap(mid) > 0.0 ? lo : hi) = mid;
        ++q.iterations;
    }
    q.premium = 0.5 * (lo + hi);
    q.converged = true;
    if (utility.kind == UtilityKind::Logarithmic) {
        std::size_t ruined = 0;
        for (std::size_t k = 0; k < n; ++k)
            ruined += w - q.premium - losses.total[k] + losses.capped[k] <= utility.ruin_floor * w;
        if (ruined > 0)
            q.warnings.push_back(std::to_string(ruined) + " scenarios reach the ruin floor");
    }

    const double p = q.premium;
    const auto g = [&](std::size_t k) {
        return utility(w - p - losses.total[k] + losses.capped[k]) - utility(w - losses.total[k]);
    };
    const double g_mean = block_sum(n, g) / sn;
    const double g_var = block_sum(n, [&](std::size_t k) { const double e = g(k) - g_mean; return e * e; }) / sn;
    const double slope =
        block_sum(n, [&](std::size_t k) { return utility.derivative(w - p - losses.total[k] + losses.capped[k]); }) / sn;
    q.std_error = slope > 0.0 ? std::sqrt(g_var / sn) / slope : 0.0;
    return q;
}

PremiumQuote indifference_premium(const JointScenarioSet& scenarios, const UtilitySpec& utility,
                                  const PolicyTerms& terms, PremiumMode mode, std::size_t line)
{
    auto q = solve_premium(loss_columns(scenarios, utility, terms, mode, line), utility);
    q.mode = mode == PremiumMode::Line ? "line" : "portfolio";
    q.target = mode == PremiumMode::Line ? scenarios.table(line).label() : "portfolio";
    return q;
}

std::vector<std::size_t> conditioning_set(const JointScenarioSet& scenarios, std::size_t line, double level)
{
    require(line < scenarios.lines(), "conditioning: line index out of range");
    require(level < 1.0, "conditioning: level must be < 1");
    const std::size_t n = scenarios.scenarios();
    std::vector<char> keep(n, 1);
    if (level > 0.0)
        for (std::size_t j = 0; j < scenarios.lines(); ++j) {
            if (j == line)
                continue;
            auto z = scenarios.line_aggregates(j);
            auto sorted = z;
            std::sort(sorted.begin(), sorted.end());
            const double q = stats::quantile_type1(sorted, level);
            for (std::size_t s = 0; s < n; ++s)
                keep[s] = keep[s] && z[s] >= q;
        }
    std::vector<std::size_t> rows;
    for (std::size_t s = 0; s < n; ++s)
        if (keep[s])
            rows.push_back(s);
    return rows;
}

PremiumQuote conditional_premium(const JointScenarioSet& scenarios, std::size_t line, double level,
                                 const UtilitySpec& utility, const PolicyTerms& terms)
{
    const auto rows = conditioning_set(scenarios, line, level);
    if (rows.size() < kMinConditioningScenarios)
        throw ComputationError("conditional premium: conditioning set holds " + std::to_string(rows.size()) +
                               " scenarios (need at least " + std::to_string(kMinConditioningScenarios) + ")");
    auto q = solve_premium(loss_columns(scenarios, utility, terms, PremiumMode::Line, line, rows), utility);
    q.mode = "conditional";
    q.target = scenarios.table(line).label();
    return q;
}

double empirical_var(std::span<const double> sample, double level)
{
    require(!sample.empty(), "empirical_var: empty sample");
    require(level > 0.0 && level < 1.0, "empirical_var: level must lie in (0, 1)");
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    return stats::quantile_type1(sorted, level);
}

DiversificationResult diversification_ratio(const JointScenarioSet& scenarios, std::span<const double> weights,
                                            double level, std::span<const std::size_t> rows)
{
    const std::size_t d = scenarios.lines();
    require(weights.size() == d, "diversification: one weight per line required");
    PolicyTerms terms;
    terms.weights.assign(weights.begin(), weights.end());
    terms.validate(d);
    require(level > 0.0 && level < 1.0, "diversification: level must lie in (0, 1)");

    const std::size_t n = rows.empty() ? scenarios.scenarios() : rows.size();
    require(n > 0, "diversification: empty scenario set");
    std::vector<double> pooled(n, 0.0);
    DiversificationResult r;
    r.level = level;
    double denominator = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        std::vector<double> z(n);
        for (std::size_t k = 0; k < n; ++k) {
            z[k] = scenarios.aggregate(rows.empty() ? k : rows[k], i);
            pooled[k] += weights[i] * z[k];
        }
        r.line_vars.push_back(empirical_var(z, level));
        denominator += weights[i] * r.line_vars.back();
    }
    if (!(denominator > 0.0))
        throw ComputationError("diversification: zero denominator (all standalone VaRs vanish)");
    r.portfolio_var = empirical_var(pooled, level);
    r.ratio = r.portfolio_var / denominator;
    return r;
}

BootstrapInterval bootstrap_ci(std::size_t units, const std::function<double(std::span<const std::size_t>)>& statistic,
                               std::size_t replicates, double level, std::uint64_t seed)
{
    require(units >= 1, "bootstrap: no resampling units");
    require(replicates >= 100, "bootstrap: need at least 100 replicates");
    require(level > 0.0 && level < 1.0, "bootstrap: level must lie in (0, 1)");

    std::vector<std::size_t> identity(units);
    std::iota(identity.begin(), identity.end(), 0);
    BootstrapInterval out;
    out.point = statistic(identity);

    const RandomStream root(seed);
    std::vector<double> values;
    values.reserve(replicates);
    std::vector<std::size_t> draw(units);
    for (std::size_t b = 0; b < replicates; ++b) {
        RandomStream rng = root.substream("bootstrap", b);
        for (auto& i : draw)
            i = static_cast<std::size_t>(rng.below(units));
        try {
            const double v = statistic(draw);
            if (std::isfinite(v))
                values.push_back(v);
            else
                ++out.failures;
        } catch (const ComputationError&) {
            ++out.failures;
        } catch (const ValidationError&) {
            ++out.failures;
        }
    }
    if (out.failures * 10 > replicates)
        throw ComputationError("bootstrap: statistic failed on " + std::to_string(out.failures) + " of " +
                               std::to_string(replicates) + " resamples");
    std::sort(values.begin(), values.end());
    out.low = stats::quantile_type1(values, (1.0 - level) / 2.0);
    out.high = stats::quantile_type1(values, (1.0 + level) / 2.0);
    return out;
}

namespace {

std::string number(const std::optional<double>& v)
{
    if (!v)
        return "";
    std::ostringstream s;
    s.precision(17);
    s << *v;
    return s.str();
}

}  // namespace

void write_quotes_csv(std::ostream& out, std::span<const PremiumQuote> quotes, const std::string& settings_hash)
{
    out << "mode,target,premium,std_error,ci_low,ci_high,settings_hash\n";
    for (const auto& q : quotes)
        out << q.mode << ',' << q.target << ',' << number(q.premium) << ',' << number(q.std_error) << ','
            << number(q.ci_low) << ',' << number(q.ci_high) << ',' << settings_hash << '\n';
}

nlohmann::json to_json(const PremiumQuote& q)
{
    nlohmann::json j{{"mode", q.mode},           {"target", q.target},       {"premium", q.premium},
                     {"std_error", q.std_error}, {"iterations", q.iterations}, {"scenarios", q.scenarios},
                     {"converged", q.converged}};
    j["ci_low"] = q.ci_low ? nlohmann::json(*q.ci_low) : nlohmann::json(nullptr);
    j["ci_high"] = q.ci_high ? nlohmann::json(*q.ci_high) : nlohmann::json(nullptr);
    if (!q.warnings.empty())
        j["warnings"] = q.warnings;
    return j;
}

nlohmann::json to_json(const DiversificationResult& r)
{
    nlohmann::json j{{"ratio", r.ratio}, {"portfolio_var", r.portfolio_var}, {"line_vars", r.line_vars},
                     {"level", r.level}};
    j["ci_low"] = r.ci_low ? nlohmann::json(*r.ci_low) : nlohmann::json(nullptr);
    j["ci_high"] = r.ci_high ? nlohmann::json(*r.ci_high) : nlohmann::json(nullptr);
    return j;
}

}  // namespace cyberrisk

#include "cyberrisk/copulas.hpp"

#include "cyberrisk/error.hpp"
#include "cyberrisk/parallel.hpp"
#include "cyberrisk/random.hpp"
#include "cyberrisk/statistics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace cyberrisk {

std::string to_string(CopulaFamily family)
{
    switch (family) {
    case CopulaFamily::Independence: return "independence";
    case CopulaFamily::Gaussian: return "gaussian";
    case CopulaFamily::Joe: return "joe";
    case CopulaFamily::SurvivalJoe: return "survival-joe";
    case CopulaFamily::PairProduct: return "pair-product";
    }
    return "unknown";
}

CopulaFamily parse_copula_family(const std::string& name)
{
    for (auto f : {CopulaFamily::Independence, CopulaFamily::Gaussian, CopulaFamily::Joe, CopulaFamily::SurvivalJoe,
                   CopulaFamily::PairProduct})
        if (to_string(f) == name)
            return f;
    throw ValidationError("unknown copula family '" + name + "'");
}

CopulaSpec CopulaSpec::independence(std::size_t dimension)
{
    CopulaSpec spec;
    spec.family = CopulaFamily::Independence;
    spec.dimension = dimension;
    return spec;
}

CopulaSpec CopulaSpec::gaussian(Eigen::MatrixXd correlation)
{
    CopulaSpec spec;
    spec.family = CopulaFamily::Gaussian;
    spec.dimension = static_cast<std::size_t>(correlation.rows());
    spec.correlation = std::move(correlation);
    return spec;
}

CopulaSpec CopulaSpec::joe(double theta)
{
    CopulaSpec spec;
    spec.family = CopulaFamily::Joe;
    spec.theta = theta;
    return spec;
}

CopulaSpec CopulaSpec::survival_joe(double theta)
{
    CopulaSpec spec = joe(theta);
    spec.family = CopulaFamily::SurvivalJoe;
    return spec;
}

CopulaSpec CopulaSpec::pair_product(std::size_t dimension, std::vector<PairCopula> pairs)
{
    CopulaSpec spec;
    spec.family = CopulaFamily::PairProduct;
    spec.dimension = dimension;
    spec.pairs = std::move(pairs);
    std::vector<bool> used(dimension, false);
    for (const auto& p : spec.pairs) {
        if (p.first < dimension)
            used[p.first] = true;
        if (p.second < dimension)
            used[p.second] = true;
    }
    for (std::size_t i = 0; i < dimension; ++i)
        if (!used[i]) {
            spec.singleton = i;
            break;
        }
    return spec;
}

namespace {

void validate_pair_parameter(CopulaFamily family, double parameter)
{
    switch (family) {
    case CopulaFamily::Independence: return;
    case CopulaFamily::Gaussian:
        require(parameter >= -1.0 && parameter <= 1.0, "Gaussian pair correlation must lie in [-1, 1]");
        return;
    case CopulaFamily::Joe:
    case CopulaFamily::SurvivalJoe:
        require(parameter >= 1.0 && std::isfinite(parameter), "Joe theta must be >= 1");
        return;
    case CopulaFamily::PairProduct: break;
    }
    throw ValidationError("pair copula family must be bivariate");
}

}  // namespace

void CopulaSpec::validate() const
{
    require(dimension >= 1, "copula dimension must be >= 1");
    switch (family) {
    case CopulaFamily::Independence: return;
    case CopulaFamily::Gaussian: {
        const auto d = static_cast<Eigen::Index>(dimension);
        require(correlation.rows() == d && correlation.cols() == d, "Gaussian copula: matrix must be d x d");
        require(correlation.isApprox(correlation.transpose(), 1e-12) ||
                    (correlation - correlation.transpose()).cwiseAbs().maxCoeff() < 1e-12,
                "Gaussian copula: matrix must be symmetric");
        for (Eigen::Index i = 0; i < d; ++i)
            require(std::fabs(correlation(i, i) - 1.0) < 1e-12, "Gaussian copula: diagonal must be 1");
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(correlation, Eigen::EigenvaluesOnly);
        if (eig.eigenvalues().minCoeff() < -1e-10)
            throw ValidationError("Gaussian copula: correlation matrix is not positive semidefinite (repair first)");
        return;
    }
    case CopulaFamily::Joe:
    case CopulaFamily::SurvivalJoe:
        require(dimension == 2, "Joe copula is bivariate");
        require(theta >= 1.0 && std::isfinite(theta), "Joe theta must be >= 1");
        return;
    case CopulaFamily::PairProduct: {
        std::vector<int> seen(dimension, 0);
        for (const auto& p : pairs) {
            require(p.first < dimension && p.second < dimension && p.first != p.second,
                    "pair-product: invalid pair labels");
            ++seen[p.first];
            ++seen[p.second];
            validate_pair_parameter(p.family, p.parameter);
        }
        std::size_t singles = 0;
        for (std::size_t i = 0; i < dimension; ++i) {
            require(seen[i] <= 1, "pair-product: label " + std::to_string(i) + " appears in two pairs");
            if (seen[i] == 0) {
                ++singles;
                require(singleton && *singleton == i, "pair-product: uncovered label " + std::to_string(i));
            }
        }
        require(singles <= 1, "pair-product: at most one singleton allowed");
        return;
    }
    }
}

PseudoObservations pseudo_observations(const Eigen::MatrixXd& panel)
{
    const auto n = panel.rows();
    require(n >= 2, "pseudo_observations: need at least two observations");
    PseudoObservations out(n, panel.cols());
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index c = 0; c < panel.cols(); ++c) {
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](Eigen::Index a, Eigen::Index b) { return panel(a, c) < panel(b, c); });
        for (std::size_t i = 0; i < order.size();) {
            std::size_t j = i;
            while (j + 1 < order.size() && panel(order[j + 1], c) == panel(order[i], c))
                ++j;
            const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
            for (std::size_t k = i; k <= j; ++k)
                out(order[k], c) = avg_rank / static_cast<double>(n + 1);
            i = j + 1;
        }
    }
    return out;
}

double joe_cdf(double u, double v, double theta)
{
    require(theta >= 1.0, "Joe copula: theta must be >= 1");
    const double a = std::pow(1.0 - u, theta);
    const double b = std::pow(1.0 - v, theta);
    return 1.0 - std::pow(a + b - a * b, 1.0 / theta);
}

double joe_density(double u, double v, double theta)
{
    require(theta >= 1.0, "Joe copula: theta must be >= 1");
    const double ub = 1.0 - u, vb = 1.0 - v;
    const double a = std::pow(ub, theta), b = std::pow(vb, theta);
    const double s = a + b - a * b;
    return std::pow(s, 1.0 / theta - 2.0) * std::pow(ub, theta - 1.0) * std::pow(vb, theta - 1.0) * (theta - 1.0 + s);
}

double joe_h(double v, double u, double theta)
{
    const double ub = 1.0 - u, vb = 1.0 - v;
    const double a = std::pow(ub, theta), b = std::pow(vb, theta);
    const double s = a + b - a * b;
    if (s <= 0.0)
        return v >= 1.0 ? 1.0 : 0.0;
    return std::pow(ub, theta - 1.0) * std::pow(s, 1.0 / theta - 1.0) * (1.0 - b);
}

double survival_joe_cdf(double u, double v, double theta) { return u + v - 1.0 + joe_cdf(1.0 - u, 1.0 - v, theta); }

double survival_joe_density(double u, double v, double theta) { return joe_density(1.0 - u, 1.0 - v, theta); }

double gaussian_pair_density(double u, double v, double rho)
{
    const double x = stats::normal_quantile(u), y = stats::normal_quantile(v);
    const double r2 = 1.0 - rho * rho;
    return std::exp(-(rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * r2)) / std::sqrt(r2);
}

namespace {

double joe_log_density(double u, double v, double theta)
{
    const double lu = std::log1p(-u), lv = std::log1p(-v);
    const double a = std::exp(theta * lu), b = std::exp(theta * lv);
    const double s = a + b - a * b;
    return (1.0 / theta - 2.0) * std::log(s) + (theta - 1.0) * (lu + lv) + std::log(theta - 1.0 + s);
}

}  // namespace

double pair_log_density(CopulaFamily family, double parameter, double u, double v)
{
    switch (family) {
    case CopulaFamily::Independence: return 0.0;
    case CopulaFamily::Gaussian: {
        const double x = stats::normal_quantile(u), y = stats::normal_quantile(v);
        const double r2 = 1.0 - parameter * parameter;
        return -(parameter * parameter * (x * x + y * y) - 2.0 * parameter * x * y) / (2.0 * r2) - 0.5 * std::log(r2);
    }
    case CopulaFamily::Joe: return joe_log_density(u, v, parameter);
    case CopulaFamily::SurvivalJoe: return joe_log_density(1.0 - u, 1.0 - v, parameter);
    case CopulaFamily::PairProduct: break;
    }
    throw ValidationError("pair_log_density: not a bivariate family");
}

double kendall_tau_joe(double theta)
{
    require(theta >= 1.0 && std::isfinite(theta), "kendall_tau_joe: theta must be >= 1");
    if (theta == 1.0)
        return 0.0;
    // phi(t)/phi'(t) for phi(t) = -log(1 - (1-t)^theta), written in s = 1 - t.
    const auto ratio = [theta](double s) {
        if (s <= 0.0)
            return 0.0;
        const double a = std::pow(s, theta);
        if (a >= 1.0)
            return 0.0;
        return std::log1p(-a) * (1.0 - a) * s / (theta * a);
    };
    double error = 0.0;
    const double integral =
        boost::math::quadrature::gauss_kronrod<double, 31>::integrate(ratio, 0.0, 1.0, 15, 1e-10, &error);
    if (!(error < 1e-6))
        throw ComputationError("kendall_tau_joe: quadrature did not reach 1e-6");
    return 1.0 + 4.0 * integral;
}

double kendall_tau(std::span<const double> x, std::span<const double> y)
{
    require(x.size() == y.size() && x.size() >= 2, "kendall_tau: need two equal-length series of length >= 2");
    const std::size_t n = x.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
    });
    auto pairs = [](double t) { return t * (t - 1.0) / 2.0; };
    double ties_x = 0.0, ties_xy = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && x[idx[j + 1]] == x[idx[i]])
            ++j;
        ties_x += pairs(static_cast<double>(j - i + 1));
        for (std::size_t k = i; k <= j;) {
            std::size_t m = k;
            while (m + 1 <= j && y[idx[m + 1]] == y[idx[k]])
                ++m;
            ties_xy += pairs(static_cast<double>(m - k + 1));
            k = m + 1;
        }
        i = j + 1;
    }
    // Bottom-up merge sort on y counting exchanges (discordant pairs).
    std::vector<double> ys(n), buffer(n);
    for (std::size_t i = 0; i < n; ++i)
        ys[i] = y[idx[i]];
    double swaps = 0.0;
    for (std::size_t width = 1; width < n; width *= 2) {
        for (std::size_t lo = 0; lo < n; lo += 2 * width) {
            const std::size_t mid = std::min(lo + width, n), hi = std::min(lo + 2 * width, n);
            std::size_t i = lo, j = mid, k = lo;
            while (i < mid && j < hi) {
                if (ys[j] < ys[i]) {
                    buffer[k++] = ys[j++];
                    swaps += static_cast<double>(mid - i);
                } else {
                    buffer[k++] = ys[i++];
                }
            }
            while (i < mid)
                buffer[k++] = ys[i++];
            while (j < hi)
                buffer[k++] = ys[j++];
        }
        ys.swap(buffer);
    }
    double ties_y = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && ys[j + 1] == ys[i])
            ++j;
        ties_y += pairs(static_cast<double>(j - i + 1));
        i = j + 1;
    }
    const double total = pairs(static_cast<double>(n));
    const double denom = std::sqrt((total - ties_x) * (total - ties_y));
    require(denom > 0.0, "kendall_tau: constant series");
    return (total - ties_x - ties_y + ties_xy - 2.0 * swaps) / denom;
}

namespace {

constexpr double kOpenUpper = 1.0 - 0x1.0p-53;
constexpr double kOpenLower = 0x1.0p-60;

double open_unit(double u) { return std::clamp(u, kOpenLower, kOpenUpper); }

/// Solve joe_h(v | u) = w for v by safeguarded Newton iteration.
double joe_conditional_inverse(double w, double u, double theta)
{
    if (theta == 1.0)
        return w;
    double lo = 0.0, hi = 1.0, v = w;
    for (int it = 0; it < 200; ++it) {
        const double f = joe_h(v, u, theta) - w;
        if (f > 0.0)
            hi = v;
        else
            lo = v;
        if (hi - lo < 1e-10 || f == 0.0)
            break;
        const double slope = joe_density(u, v, theta);
        double next = v - f / slope;
        if (!std::isfinite(next) || next <= lo || next >= hi)
            next = 0.5 * (lo + hi);
        if (std::fabs(next - v) < 1e-13) {
            v = next;
            break;
        }
        v = next;
    }
    return open_unit(v);
}

void sample_pair(CopulaFamily family, double parameter, RandomStream& rng, double& u, double& v)
{
    switch (family) {
    case CopulaFamily::Independence:
        u = rng.uniform();
        v = rng.uniform();
        return;
    case CopulaFamily::Gaussian: {
        const double z1 = rng.normal(), z2 = rng.normal();
        u = open_unit(stats::normal_cdf(z1));
        v = open_unit(stats::normal_cdf(parameter * z1 + std::sqrt(std::max(0.0, 1.0 - parameter * parameter)) * z2));
        return;
    }
    case CopulaFamily::Joe:
    case CopulaFamily::SurvivalJoe: {
        const double a = rng.uniform(), w = rng.uniform();
        const double b = joe_conditional_inverse(w, a, parameter);
        if (family == CopulaFamily::Joe) {
            u = a;
            v = b;
        } else {
            u = open_unit(1.0 - a);
            v = open_unit(1.0 - b);
        }
        return;
    }
    case CopulaFamily::PairProduct: break;
    }
    throw ValidationError("sample_pair: not a bivariate family");
}

/// Factor F with F F^T = M for PSD M (pivoted LDL^T, negative pivots clipped).
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& m)
{
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(m);
    const auto d = m.rows();
    Eigen::MatrixXd l = ldlt.matrixL();
    const Eigen::VectorXd diag = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
    Eigen::MatrixXd factor = l * diag.asDiagonal();
    Eigen::MatrixXd out = ldlt.transpositionsP().transpose() * factor;
    (void)d;
    return out;
}

}  // namespace

Eigen::MatrixXd sample_copula(const CopulaSpec& spec, std::size_t n, std::uint64_t seed)
{
    spec.validate();
    const auto d = static_cast<Eigen::Index>(spec.dimension);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), d);
    Eigen::MatrixXd factor;
    if (spec.family == CopulaFamily::Gaussian)
        factor = psd_factor(spec.correlation);
    const RandomStream root(seed);

    parallel_for_blocks(block_count(n), [&](std::size_t b) {
        RandomStream rng = root.substream("copula/block", b);
        const std::size_t first = b * kScenarioBlock;
        const std::size_t last = std::min(n, first + kScenarioBlock);
        Eigen::VectorXd z(d);
        for (std::size_t t = first; t < last; ++t) {
            const auto row = static_cast<Eigen::Index>(t);
            switch (spec.family) {
            case CopulaFamily::Independence:
                for (Eigen::Index i = 0; i < d; ++i)
                    out(row, i) = rng.uniform();
                break;
            case CopulaFamily::Gaussian: {
                for (Eigen::Index i = 0; i < d; ++i)
                    z(i) = rng.normal();
                const Eigen::VectorXd x = factor * z;
                for (Eigen::Index i = 0; i < d; ++i)
                    out(row, i) = open_unit(stats::normal_cdf(x(i)));
                break;
            }
            case CopulaFamily::Joe:
            case CopulaFamily::SurvivalJoe: {
                double u = 0.0, v = 0.0;
                sample_pair(spec.family, spec.theta, rng, u, v);
                out(row, 0) = u;
                out(row, 1) = v;
                break;
            }
            case CopulaFamily::PairProduct: {
                for (const auto& p : spec.pairs) {
                    double u = 0.0, v = 0.0;
                    sample_pair(p.family, p.parameter, rng, u, v);
                    out(row, static_cast<Eigen::Index>(p.first)) = u;
                    out(row, static_cast<Eigen::Index>(p.second)) = v;
                }
                if (spec.singleton)
                    out(row, static_cast<Eigen::Index>(*spec.singleton)) = rng.uniform();
                break;
            }
            }
        }
    });
    return out;
}

std::vector<CopulaFamily> default_pair_families()
{
    return {CopulaFamily::Independence, CopulaFamily::Gaussian, CopulaFamily::Joe, CopulaFamily::SurvivalJoe};
}

namespace {

double pair_tau(CopulaFamily family, double parameter)
{
    switch (family) {
    case CopulaFamily::Gaussian: return 2.0 / std::numbers::pi * std::asin(parameter);
    case CopulaFamily::Joe:
    case CopulaFamily::SurvivalJoe: return kendall_tau_joe(parameter);
    default: return 0.0;
    }
}

constexpr double kGaussianRhoBound = 0.999;

}  // namespace

PairFitReport fit_pair_copula(std::span<const double> u, std::span<const double> v,
                              std::span<const CopulaFamily> families)
{
    require(u.size() == v.size(), "fit_pair_copula: length mismatch");
    require(u.size() >= 10, "fit_pair_copula: need at least 10 observations");
    require(!families.empty(), "fit_pair_copula: no candidate families");
    for (std::size_t t = 0; t < u.size(); ++t)
        require(u[t] > 0.0 && u[t] < 1.0 && v[t] > 0.0 && v[t] < 1.0,
                "fit_pair_copula: pseudo-observations must lie in (0, 1)");

    PairFitReport report;
    for (CopulaFamily family : families) {
        PairFit fit;
        fit.family = family;
        if (family == CopulaFamily::Independence) {
            report.candidates.push_back(fit);
            continue;
        }
        double lo = 0.0, hi = 0.0;
        if (family == CopulaFamily::Gaussian) {
            lo = -kGaussianRhoBound;
            hi = kGaussianRhoBound;
        } else if (family == CopulaFamily::Joe || family == CopulaFamily::SurvivalJoe) {
            lo = 1.0;
            hi = kJoeThetaUpperBound;
        } else {
            throw ValidationError("fit_pair_copula: unsupported candidate family " + to_string(family));
        }
        const auto negative_loglik = [&](double parameter) {
            double total = 0.0;
            for (std::size_t t = 0; t < u.size(); ++t)
                total += pair_log_density(family, parameter, u[t], v[t]);
            return std::isfinite(total) ? -total : std::numeric_limits<double>::max();
        };
        std::uintmax_t iterations = 500;
        const auto [best, value] = boost::math::tools::brent_find_minima(negative_loglik, lo, hi, 28, iterations);
        if (!(value < std::numeric_limits<double>::max()))
            continue;
        fit.parameter = best;
        fit.log_likelihood = -value;
        fit.aic = 2.0 - 2.0 * fit.log_likelihood;
        fit.at_boundary = (hi - best) < 1e-4 * (hi - lo) || (family == CopulaFamily::Gaussian && best - lo < 1e-4);
        fit.tau = pair_tau(family, best);
        report.candidates.push_back(fit);
    }
    if (report.candidates.empty())
        throw ComputationError("fit_pair_copula: no candidate family could be fitted");
    report.best = *std::min_element(report.candidates.begin(), report.candidates.end(),
                                    [](const PairFit& a, const PairFit& b) { return a.aic < b.aic; });
    return report;
}

namespace {

void enumerate_matchings(std::vector<std::size_t>& remaining, std::vector<PairCopula>& current,
                         std::vector<std::vector<PairCopula>>& out)
{
    if (remaining.empty()) {
        out.push_back(current);
        return;
    }
    const std::size_t head = remaining.front();
    for (std::size_t k = 1; k < remaining.size(); ++k) {
        const std::size_t partner = remaining[k];
        std::vector<std::size_t> rest;
        for (std::size_t m = 1; m < remaining.size(); ++m)
            if (m != k)
                rest.push_back(remaining[m]);
        current.push_back({head, partner, CopulaFamily::Independence, 0.0});
        enumerate_matchings(rest, current, out);
        current.pop_back();
    }
}

}  // namespace

std::vector<CopulaSpec> enumerate_structures(std::size_t dimension)
{
    require(dimension >= 2, "enumerate_structures: dimension must be >= 2");
    std::vector<CopulaSpec> out;
    const auto add_matchings = [&](std::optional<std::size_t> singleton) {
        std::vector<std::size_t> labels;
        for (std::size_t i = 0; i < dimension; ++i)
            if (!singleton || i != *singleton)
                labels.push_back(i);
        std::vector<PairCopula> current;
        std::vector<std::vector<PairCopula>> matchings;
        enumerate_matchings(labels, current, matchings);
        for (auto& m : matchings)
            out.push_back(CopulaSpec::pair_product(dimension, std::move(m)));
    };
    if (dimension % 2 == 1)
        for (std::size_t s = 0; s < dimension; ++s)
            add_matchings(s);
    else
        add_matchings(std::nullopt);
    return out;
}

std::vector<StructureCandidate> select_structure(const PseudoObservations& pseudo,
                                                 std::span<const CopulaFamily> families)
{
    const auto d = static_cast<std::size_t>(pseudo.cols());
    require(d >= 3, "select_structure: need at least three margins");
    require(pseudo.rows() >= 10, "select_structure: need at least 10 observations");

    std::vector<std::pair<std::size_t, std::size_t>> pair_list;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j)
            pair_list.emplace_back(i, j);
    std::vector<PairFit> fits(pair_list.size());
    parallel_for_blocks(pair_list.size(), [&](std::size_t k) {
        const auto [i, j] = pair_list[k];
        const Eigen::VectorXd ui = pseudo.col(static_cast<Eigen::Index>(i));
        const Eigen::VectorXd uj = pseudo.col(static_cast<Eigen::Index>(j));
        try {
            fits[k] = fit_pair_copula({ui.data(), static_cast<std::size_t>(ui.size())},
                                      {uj.data(), static_cast<std::size_t>(uj.size())}, families)
                          .best;
        } catch (const std::exception& e) {
            throw ComputationError("select_structure: pair (" + std::to_string(i) + ", " + std::to_string(j) +
                                   "): " + e.what());
        }
    });
    const auto fit_of = [&](std::size_t i, std::size_t j) -> const PairFit& {
        if (i > j)
            std::swap(i, j);
        const auto it = std::find(pair_list.begin(), pair_list.end(), std::make_pair(i, j));
        return fits[static_cast<std::size_t>(it - pair_list.begin())];
    };

    std::vector<StructureCandidate> candidates;
    for (auto& structure : enumerate_structures(d)) {
        StructureCandidate c;
        for (auto& p : structure.pairs) {
            const PairFit& f = fit_of(p.first, p.second);
            p.family = f.family;
            p.parameter = f.family == CopulaFamily::Independence ? 0.0 : f.parameter;
            c.score += f.log_likelihood;
            c.pair_fits.push_back(f);
        }
        c.structure = std::move(structure);
        candidates.push_back(std::move(c));
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const StructureCandidate& a, const StructureCandidate& b) { return a.score > b.score; });
    return candidates;
}

}  // namespace cyberrisk

#include "cyberrisk/robust_dependence.hpp"

#include "cyberrisk/error.hpp"
#include "cyberrisk/parallel.hpp"
#include "cyberrisk/random.hpp"
#include "cyberrisk/statistics.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace cyberrisk {

void RobustConfig::validate() const
{
    require(trim_fraction >= 0.0 && trim_fraction <= 0.5, "robust config: trim_fraction must lie in [0, 0.5]");
    require(huber_k > 0.0, "robust config: huber_k must be positive");
}

namespace {

void check_pair(std::span<const double> x, std::span<const double> y, const char* who)
{
    require(x.size() == y.size(), std::string(who) + ": series lengths differ");
    require(x.size() >= 2, std::string(who) + ": need at least two observations");
}

double clamp_unit(double r) { return std::clamp(r, -1.0, 1.0); }

double sign(double z) { return z > 0.0 ? 1.0 : (z < 0.0 ? -1.0 : 0.0); }

}  // namespace

CorrelationEstimate pearson(std::span<const double> x, std::span<const double> y)
{
    check_pair(x, y, "pearson");
    const double mx = stats::mean(x), my = stats::mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0 && syy > 0.0))
        throw ComputationError("pearson: constant series");
    return {"pearson", clamp_unit(sxy / std::sqrt(sxx * syy)), {}, {}, x.size()};
}

double trimmed_sum(std::vector<double> z, double trim_fraction)
{
    require(!z.empty(), "trimmed sum of empty sequence");
    const std::size_t n = z.size();
    const auto r = static_cast<std::size_t>(std::floor(trim_fraction * static_cast<double>(n - 1)));
    require(n > 2 * r, "trimmed sum: nothing left after trimming");
    std::sort(z.begin(), z.end());
    double sum = 0.0;
    for (std::size_t i = r; i < n - r; ++i)
        sum += z[i];
    return static_cast<double>(n) / static_cast<double>(n - 2 * r) * sum;
}

namespace {

std::vector<double> robust_scores(std::span<const double> x, const RobustConfig& config)
{
    const double center = stats::median(std::vector<double>(x.begin(), x.end()));
    double scale = 1.0;
    if (config.standardize) {
        scale = 1.4826 * stats::mad(x, center);
        if (!(scale > 0.0))
            throw ComputationError("ssd_median_corr: zero median absolute deviation");
    }
    std::vector<double> s(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double z = (x[i] - center) / scale;
        s[i] = config.psi == PsiKind::Huber ? std::clamp(z, -config.huber_k, config.huber_k) : z;
    }
    return s;
}

}  // namespace

CorrelationEstimate ssd_median_corr(std::span<const double> x, std::span<const double> y, const RobustConfig& config)
{
    check_pair(x, y, "ssd_median_corr");
    config.validate();
    const auto n = static_cast<double>(x.size());
    require(n * (1.0 - 2.0 * config.trim_fraction) >= 2.0, "ssd_median_corr: too few observations after trimming");
    const auto a = robust_scores(x, config);
    const auto b = robust_scores(y, config);
    std::vector<double> ab(a.size()), aa(a.size()), bb(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab[i] = a[i] * b[i];
        aa[i] = a[i] * a[i];
        bb[i] = b[i] * b[i];
    }
    const double num = trimmed_sum(std::move(ab), config.trim_fraction);
    const double den = trimmed_sum(std::move(aa), config.trim_fraction) * trimmed_sum(std::move(bb), config.trim_fraction);
    if (!(den > 0.0))
        throw ComputationError("ssd_median_corr: zero denominator after trimming");
    return {"ssd", clamp_unit(num / std::sqrt(den)), {}, {}, x.size()};
}

CorrelationEstimate quadrant_corr(std::span<const double> x, std::span<const double> y, bool drop_zero_terms)
{
    check_pair(x, y, "quadrant_corr");
    const double mx = stats::median(std::vector<double>(x.begin(), x.end()));
    const double my = stats::median(std::vector<double>(y.begin(), y.end()));
    double sum = 0.0;
    std::size_t nonzero = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double t = sign(x[i] - mx) * sign(y[i] - my);
        sum += t;
        nonzero += t != 0.0;
    }
    const std::size_t denom = drop_zero_terms ? nonzero : x.size();
    if (denom == 0)
        throw ComputationError("quadrant_corr: every term is zero");
    return {"quadrant", sum / static_cast<double>(denom), {}, {}, x.size()};
}

std::size_t mcd_default_h(std::size_t n, std::size_t p)
{
    return (n + p + 2) / 2;
}

namespace {

struct SubsetFit {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    double det = 0.0;
    bool singular = true;
};

SubsetFit fit_subset(const Eigen::MatrixXd& data, std::span<const std::size_t> subset)
{
    const auto p = data.cols();
    const auto h = static_cast<double>(subset.size());
    SubsetFit f;
    f.mean = Eigen::VectorXd::Zero(p);
    for (std::size_t i : subset)
        f.mean += data.row(static_cast<Eigen::Index>(i)).transpose();
    f.mean /= h;
    f.cov = Eigen::MatrixXd::Zero(p, p);
    for (std::size_t i : subset) {
        const Eigen::VectorXd d = data.row(static_cast<Eigen::Index>(i)).transpose() - f.mean;
        f.cov.noalias() += d * d.transpose();
    }
    f.cov /= h;
    f.det = f.cov.determinant();
    const double diag = f.cov.diagonal().prod();
    f.singular = !(diag > 0.0) || !(f.det > 1e-12 * diag);
    return f;
}

std::vector<std::size_t> closest(const Eigen::MatrixXd& data, const SubsetFit& fit, std::size_t h)
{
    const auto n = static_cast<std::size_t>(data.rows());
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(fit.cov);
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::VectorXd d = data.row(static_cast<Eigen::Index>(i)).transpose() - fit.mean;
        dist[i] = {d.dot(ldlt.solve(d)), i};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(h), dist.end());
    std::vector<std::size_t> subset(h);
    for (std::size_t i = 0; i < h; ++i)
        subset[i] = dist[i].second;
    std::sort(subset.begin(), subset.end());
    return subset;
}

/// C(n, k) saturated at cap + 1.
std::uint64_t binomial_capped(std::size_t n, std::size_t k, std::uint64_t cap)
{
    k = std::min(k, n - k);
    long double c = 1.0L;
    for (std::size_t i = 1; i <= k; ++i) {
        c = c * static_cast<long double>(n - k + i) / static_cast<long double>(i);
        if (c > static_cast<long double>(cap))
            return cap + 1;
    }
    return static_cast<std::uint64_t>(std::llround(c));
}

struct Candidate {
    std::vector<std::size_t> subset;
    double det = std::numeric_limits<double>::infinity();
    bool found = false;
};

Candidate exhaustive_search(const Eigen::MatrixXd& data, std::size_t h)
{
    const auto n = static_cast<std::size_t>(data.rows());
    std::vector<std::size_t> idx(h);
    std::iota(idx.begin(), idx.end(), 0);
    Candidate best;
    while (true) {
        const auto fit = fit_subset(data, idx);
        if (!fit.singular && fit.det < best.det) {
            best.det = fit.det;
            best.subset = idx;
            best.found = true;
        }
        std::size_t i = h;
        while (i > 0 && idx[i - 1] == n - h + i - 1)
            --i;
        if (i == 0)
            break;
        ++idx[i - 1];
        for (std::size_t j = i; j < h; ++j)
            idx[j] = idx[j - 1] + 1;
    }
    return best;
}

Candidate concentration_start(const Eigen::MatrixXd& data, std::size_t h, std::size_t steps, RandomStream rng)
{
    const auto n = static_cast<std::size_t>(data.rows());
    const auto p = static_cast<std::size_t>(data.cols());
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = 0; i < n; ++i)
        std::swap(perm[i], perm[i + rng.below(n - i)]);

    std::size_t size = p + 1;
    SubsetFit fit = fit_subset(data, std::span(perm).first(size));
    while (fit.singular && size < n)
        fit = fit_subset(data, std::span(perm).first(++size));
    Candidate out;
    if (fit.singular)
        return out;

    std::vector<std::size_t> subset = closest(data, fit, h);
    fit = fit_subset(data, subset);
    for (std::size_t s = 0; s < steps && !fit.singular; ++s) {
        auto next = closest(data, fit, h);
        if (next == subset)
            break;
        auto next_fit = fit_subset(data, next);
        if (next_fit.det > fit.det * (1.0 + 1e-12))
            throw ComputationError("mcd: concentration step increased the determinant");
        subset = std::move(next);
        fit = std::move(next_fit);
    }
    if (!fit.singular) {
        out.subset = std::move(subset);
        out.det = fit.det;
        out.found = true;
    }
    return out;
}

}  // namespace

double subset_covariance_determinant(const Eigen::MatrixXd& data, std::span<const std::size_t> subset)
{
    require(!subset.empty(), "subset_covariance_determinant: empty subset");
    return fit_subset(data, subset).det;
}

McdResult mcd(const Eigen::MatrixXd& data, const McdOptions& options)
{
    const auto n = static_cast<std::size_t>(data.rows());
    const auto p = static_cast<std::size_t>(data.cols());
    require(p >= 2 && n > p, "mcd: need n > p >= 2");
    require(data.allFinite(), "mcd: non-finite data");
    const std::size_t h_min = mcd_default_h(n, p);
    const std::size_t h = options.h == 0 ? h_min : options.h;
    require(h >= h_min && h <= n, "mcd: h must lie in [ceil((n+p+1)/2), n]");

    McdResult result;
    Candidate best;
    if (binomial_capped(n, h, options.exhaustive_budget) <= options.exhaustive_budget) {
        best = exhaustive_search(data, h);
        result.exhaustive = true;
    } else {
        require(options.starts >= 1, "mcd: need at least one random start");
        std::vector<Candidate> starts(options.starts);
        const RandomStream root(options.seed);
        parallel_for_blocks(options.starts, [&](std::size_t s) {
            starts[s] = concentration_start(data, h, options.concentration_steps, root.substream("mcd/start", s));
        });
        for (auto& c : starts)
            if (c.found && c.det < best.det)
                best = std::move(c);
    }
    if (!best.found)
        throw ComputationError("mcd: degenerate configuration (every candidate subset is singular)");

    const auto fit = fit_subset(data, best.subset);
    if (options.consistency_factor) {
        const double frac = static_cast<double>(h) / static_cast<double>(n);
        if (frac < 1.0) {
            const boost::math::chi_squared chi_p(static_cast<double>(p));
            const boost::math::chi_squared chi_p2(static_cast<double>(p + 2));
            result.c_p = frac / boost::math::cdf(chi_p2, boost::math::quantile(chi_p, frac));
        }
    }
    result.subset = best.subset;
    result.location = fit.mean;
    result.scatter = result.c_p * fit.cov;
    result.determinant = fit.det;
    const Eigen::VectorXd inv_sd = fit.cov.diagonal().cwiseSqrt().cwiseInverse();
    result.correlation = inv_sd.asDiagonal() * fit.cov * inv_sd.asDiagonal();
    result.correlation.diagonal().setOnes();
    return result;
}

std::string to_string(CorrelationMethod m)
{
    switch (m) {
    case CorrelationMethod::Pearson: return "pearson";
    case CorrelationMethod::Ssd: return "ssd";
    case CorrelationMethod::Quadrant: return "quadrant";
    case CorrelationMethod::Mcd: return "mcd";
    }
    return "unknown";
}

CorrelationMethod parse_correlation_method(const std::string& name)
{
    for (auto m : {CorrelationMethod::Pearson, CorrelationMethod::Ssd, CorrelationMethod::Quadrant,
                   CorrelationMethod::Mcd})
        if (to_string(m) == name)
            return m;
    throw ValidationError("unknown correlation method '" + name + "' (expected pearson, ssd, quadrant or mcd)");
}

Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& panel, CorrelationMethod method,
                                   const std::vector<std::string>& labels, const RobustConfig& config,
                                   const McdOptions& mcd_options)
{
    const auto d = panel.cols();
    require(d >= 2, "correlation_matrix: need at least two series");
    require(labels.empty() || labels.size() == static_cast<std::size_t>(d),
            "correlation_matrix: label count does not match series count");
    if (method == CorrelationMethod::Mcd)
        return mcd(panel, mcd_options).correlation;

    const auto label = [&](Eigen::Index i) { return labels.empty() ? std::to_string(i) : labels[static_cast<std::size_t>(i)]; };
    Eigen::MatrixXd r = Eigen::MatrixXd::Identity(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = i + 1; j < d; ++j) {
            const Eigen::VectorXd xi = panel.col(i), xj = panel.col(j);
            const std::span<const double> x(xi.data(), static_cast<std::size_t>(xi.size()));
            const std::span<const double> y(xj.data(), static_cast<std::size_t>(xj.size()));
            const std::string where = " [pair " + label(i) + "/" + label(j) + "]";
            try {
                double v = 0.0;
                switch (method) {
                case CorrelationMethod::Pearson: v = pearson(x, y).value; break;
                case CorrelationMethod::Ssd: v = ssd_median_corr(x, y, config).value; break;
                case CorrelationMethod::Quadrant: v = quadrant_corr(x, y).value; break;
                case CorrelationMethod::Mcd: break;
                }
                r(i, j) = r(j, i) = v;
            } catch (const ValidationError& e) {
                throw ValidationError(e.what() + where);
            } catch (const ComputationError& e) {
                throw ComputationError(e.what() + where);
            }
        }
    return r;
}

PsdRepair nearest_psd(const Eigen::MatrixXd& matrix, double floor)
{
    require(matrix.rows() == matrix.cols() && matrix.rows() >= 1, "nearest_psd: matrix must be square");
    require(matrix.allFinite(), "nearest_psd: non-finite entries");
    require(floor >= 0.0 && floor < 1.0, "nearest_psd: floor must lie in [0, 1)");
    const double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
    require((matrix - matrix.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale, "nearest_psd: matrix is not symmetric");

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(matrix);
    PsdRepair out;
    out.min_eigenvalue_before = eig.eigenvalues().minCoeff();
    if (out.min_eigenvalue_before >= floor - 1e-12) {
        out.matrix = matrix;
        return out;
    }
    const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(floor);
    Eigen::MatrixXd a = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
    const Eigen::VectorXd inv_sd = a.diagonal().cwiseSqrt().cwiseInverse();
    a = inv_sd.asDiagonal() * a * inv_sd.asDiagonal();
    a = 0.5 * (a + a.transpose());
    a.diagonal().setOnes();

    // Rescaling can pull the spectrum back under the floor; blend toward I to restore it.
    const double lo = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    if (lo < floor) {
        const double t = std::min(1.0, (floor - lo) / (1.0 - lo) + 1e-15);
        a = (1.0 - t) * a + t * Eigen::MatrixXd::Identity(a.rows(), a.cols());
    }
    out.matrix = a;
    out.repaired = true;
    return out;
}

void write_correlation_csv(std::ostream& out, const Eigen::MatrixXd& matrix, const std::vector<std::string>& labels,
                           const std::string& method, bool header)
{
    require(labels.size() == static_cast<std::size_t>(matrix.rows()), "write_correlation_csv: label count mismatch");
    if (header)
        out << "row,column,value,method\n";
    const auto old_precision = out.precision(17);
    for (Eigen::Index i = 0; i < matrix.rows(); ++i)
        for (Eigen::Index j = 0; j < matrix.cols(); ++j)
            out << labels[static_cast<std::size_t>(i)] << ',' << labels[static_cast<std::size_t>(j)] << ','
                << matrix(i, j) << ',' << method << '\n';
    out.precision(old_precision);
}

}  // namespace cyberrisk

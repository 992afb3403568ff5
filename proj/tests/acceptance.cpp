// Acceptance suite: one PASS/FAIL line per criterion.

#include "cyberrisk/cli.hpp"
#include "cyberrisk/compound_engine.hpp"
#include "cyberrisk/copulas.hpp"
#include "cyberrisk/error.hpp"
#include "cyberrisk/parallel.hpp"
#include "cyberrisk/pricing.hpp"
#include "cyberrisk/random.hpp"
#include "cyberrisk/robust_dependence.hpp"
#include "cyberrisk/statistics.hpp"
#include "cyberrisk/tail_index.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

using namespace cyberrisk;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* pattern, double a = 0, double b = 0, double c = 0, double d = 0)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
    return buf;
}

std::vector<double> pareto_sample(std::size_t n, double alpha, double x_min, std::uint64_t seed)
{
    RandomStream rng(seed);
    std::vector<double> x(n);
    for (auto& v : x)
        v = rng.pareto(alpha, x_min);
    return x;
}

double median_of(std::vector<double> v) { return stats::median(std::move(v)); }

std::shared_ptr<const AggregateTable> table_for(const std::string& label, double lambda, SeveritySource severity,
                                                std::size_t J, std::uint64_t seed)
{
    CompoundModel m;
    m.lines.push_back({label, lambda, std::move(severity)});
    return std::make_shared<const AggregateTable>(simulate_marginal(m, 0, J, seed));
}

// 1 -------------------------------------------------------------------------
Outcome joe_tau_anchors()
{
    const std::vector<std::pair<double, double>> anchors{{4.19, 0.63}, {2.96, 0.51}, {3.85, 0.60}, {4.70, 0.66},
                                                         {3.58, 0.58}, {3.47, 0.57}, {3.11, 0.53}, {4.09, 0.62},
                                                         {3.33, 0.55}, {3.17, 0.54}};
    double worst = 0.0;
    for (auto [theta, tau] : anchors)
        worst = std::max(worst, std::fabs(kendall_tau_joe(theta) - tau));
    return {worst <= 0.01, fmt("max |tau(theta) - table| = %.4f (tol 0.01)", worst)};
}

// 2 -------------------------------------------------------------------------
Outcome trimmed_reduction()
{
    RandomStream rng(2024);
    double worst = 0.0;
    for (int s = 0; s < 1000; ++s) {
        const std::size_t n = 20 + rng.below(1981);
        std::vector<double> x(n);
        const bool pareto = s % 2 == 0;
        for (auto& v : x)
            v = pareto ? rng.pareto(0.5 + 2.5 * rng.uniform(), 1.0) : std::exp(rng.normal() * 2.0);
        const OrderedSample sample(x);
        for (int j = 0; j < 10; ++j) {
            const std::size_t k = 2 + rng.below(n - 3);
            const double a = *trimmed_hill_optimal(sample, 0, k).xi;
            const double b = *hill(sample, k).xi;
            worst = std::max(worst, std::fabs(a - b));
        }
    }
    return {worst <= 1e-12, fmt("max |trimmed(k0=0) - hill| = %.3g over 10000 cases (tol 1e-12)", worst)};
}

// 3 -------------------------------------------------------------------------
Outcome consistency_suite()
{
    bool ok = true;
    std::string detail;
    for (double alpha : {0.5, 1.0, 2.0}) {
        std::map<std::string, std::vector<double>> est;
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const OrderedSample s(pareto_sample(50000, alpha, 1.0, derive_seed(31, "consistency", seed * 10 + static_cast<std::uint64_t>(alpha * 2))));
            est["hill"].push_back(*hill(s, 1000).alpha);
            est["mle"].push_back(mle_pareto(s, 1.0).alpha);
            est["wls"].push_back(*wls_estimator(s, 1.0).alpha);
            est["pm"].push_back(*pm_estimator(s).alpha);
            est["ls"].push_back(*ls_estimator(s).alpha);
        }
        detail += fmt("alpha=%.1f:", alpha);
        for (auto& [name, values] : est) {
            const double med = median_of(values);
            const double rel = std::fabs(med / alpha - 1.0);
            ok = ok && rel <= 0.10;
            detail += " " + name + fmt("=%.3f", med);
        }
        detail += "; ";
    }
    std::vector<double> ecf;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto x = pareto_sample(10000, 0.8, 1.0, derive_seed(32, "ecf", seed));
        ecf.push_back(ecf_regression(x, EcfRegressionConfig{0.45}).alpha);
    }
    const double med = median_of(ecf);
    ok = ok && std::fabs(med - 0.8) <= 0.15;
    detail += fmt("ECF(alpha=0.8) median=%.3f (tol 0.15); medians within 10%%", med);
    return {ok, detail};
}

// 4 -------------------------------------------------------------------------
Outcome breakdown()
{
    auto x = pareto_sample(10000, 1.0, 1.0, 404);
    const OrderedSample clean(x);
    std::sort(x.begin(), x.end());
    for (std::size_t i = 0; i < 5; ++i)
        x[x.size() - 1 - i] *= 1e3;
    const OrderedSample dirty(x);
    const double trim_shift = std::fabs(*trimmed_hill_optimal(dirty, 5, 500).xi - *trimmed_hill_optimal(clean, 5, 500).xi);
    const double hill_shift = std::fabs(*hill(dirty, 500).xi - *hill(clean, 500).xi);
    const bool ok = trim_shift <= 0.05 && hill_shift > 0.2;
    return {ok, fmt("trimmed shift %.4f (need <= 0.05); Hill shift %.4f (need > 0.2; analytic value 5 ln(1000)/500 = %.4f)",
                    trim_shift, hill_shift, 5.0 * std::log(1000.0) / 500.0)};
}

// 5 -------------------------------------------------------------------------
Outcome premium_sensitivity()
{
    // Pareto(1.5) line, top 15 losses inflated by factors decaying geometrically from 1e5.
    const std::size_t quarters = 124;
    const double lambda = 16.0;
    RandomStream rng(505);
    std::vector<double> x;
    for (std::size_t q = 0; q < quarters; ++q) {
        const auto n = rng.poisson(lambda);
        for (std::uint64_t i = 0; i < n; ++i)
            x.push_back(rng.pareto(1.5, 1e5));
    }
    std::sort(x.begin(), x.end(), std::greater<>());
    for (std::size_t i = 0; i < 15; ++i)
        x[i] *= std::exp(std::log(1e5) * std::pow(0.75, static_cast<double>(i)));
    const double lambda_hat = static_cast<double>(x.size()) / static_cast<double>(quarters);
    const OrderedSample sample(x);

    const std::vector<std::size_t> k0s{0, 5, 10, 15, 20, 25, 30};
    const std::vector<std::size_t> ks{50, 100, 150, 200, 250, 300};
    const auto grid = trimmed_hill_sweep(sample, k0s, ks);

    UtilitySpec utility;
    utility.wealth = 1e9;
    PolicyTerms terms;
    terms.cover_fraction = 0.1;
    std::map<std::pair<std::size_t, std::size_t>, double> premium;
    for (const auto& e : grid) {
        SplicedSeverity sev;
        sev.threshold = sample.descending(*e.k + 1);
        sev.body.assign(sample.values().begin(), sample.values().end() - static_cast<std::ptrdiff_t>(*e.k));
        sev.alpha = *e.alpha;
        sev.tail_probability = static_cast<double>(*e.k) / static_cast<double>(sample.size());
        const auto table = table_for("line", lambda_hat, sev, 100000, 5050);
        premium[{*e.k0, *e.k}] = indifference_premium(identity_scenarios(table), utility, terms, PremiumMode::Line).premium;
    }
    bool monotone = true;
    double untrimmed_max = 0.0, lo = 1e300, hi = 0.0;
    for (std::size_t k : ks) {
        monotone = monotone && premium[{0, k}] > premium[{5, k}] && premium[{5, k}] > premium[{10, k}];
        untrimmed_max = std::max(untrimmed_max, premium[{0, k}]);
    }
    for (const auto& [key, p] : premium) {
        lo = std::min(lo, p);
        hi = std::max(hi, p);
    }
    const double spread = (hi - lo) / untrimmed_max;
    return {monotone && spread > 0.5,
            std::string("P(k0=0) > P(5) > P(10) at every k: ") + (monotone ? "yes" : "no") +
                fmt("; spread (max-min)/largest untrimmed = %.1f%% (need > 50%%); P(0,50)=%.4g P(30,300)=%.4g",
                    100.0 * spread, premium[{0, 50}], premium[{30, 300}])};
}

// 6 -------------------------------------------------------------------------
Outcome zero_utility()
{
    std::string detail;
    bool ok = true;
    {
        const double w = 1e9, L = 3.5e7;
        auto table = std::make_shared<const AggregateTable>("det", std::vector<double>(10, L),
                                                            [] { std::vector<std::size_t> o(11); std::iota(o.begin(), o.end(), 0); return o; }());
        UtilitySpec u;
        u.wealth = w;
        PolicyTerms t;
        t.cover_fraction = 0.1;
        const auto q = indifference_premium(identity_scenarios(table), u, t, PremiumMode::Line);
        const double tol = std::max(1e-6 * w, 0.01);
        ok = ok && std::fabs(q.premium - L) <= tol;
        detail += fmt("deterministic |P-L|=%.3g (tol %.3g); ", std::fabs(q.premium - L), tol);
    }
    {
        auto table = table_for("lin", 3.0, LognormalSeverity{15.0, 1.5}, 100000, 61);
        UtilitySpec u;
        u.kind = UtilityKind::Linear;
        u.wealth = 1e9;
        PolicyTerms t;
        t.cover_fraction = 0.1;
        const auto set = couple_scenarios({table}, CopulaSpec::independence(1), 200000, 62);
        const auto cols = loss_columns(set, u, t, PremiumMode::Line);
        const auto q = solve_premium(cols, u);
        const double mean_capped = stats::mean(cols.capped);
        ok = ok && std::fabs(q.premium - mean_capped) <= 3.0 * q.std_error;
        detail += fmt("linear |P-mean capped|=%.3g (3 SE = %.3g); ", std::fabs(q.premium - mean_capped), 3.0 * q.std_error);
    }
    {
        const double w = 1e9;
        auto table = std::make_shared<const AggregateTable>("two", std::vector<double>{0.5 * w},
                                                            std::vector<std::size_t>{0, 0, 1});
        UtilitySpec u;
        u.wealth = w;
        PolicyTerms t;
        t.cover_fraction = 1.0;
        const auto set = couple_scenarios({table}, CopulaSpec::independence(1), 1000000, 63);
        const auto q = indifference_premium(set, u, t, PremiumMode::Line);
        const double exact = (1.0 - std::exp(0.5 * std::log(0.5))) * w;
        ok = ok && std::fabs(q.premium - exact) <= 3.0 * q.std_error;
        detail += fmt("two-point log P/w=%.5f vs %.5f (|diff| %.3g, 3 SE %.3g)", q.premium / w, exact / w,
                      std::fabs(q.premium - exact), 3.0 * q.std_error);
    }
    return {ok, detail};
}

// 7 -------------------------------------------------------------------------
Outcome superadditivity()
{
    int pareto_hits = 0, lognormal_hits = 0;
    double d_pareto = 0.0, d_logn = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const RandomStream root(derive_seed(77, "superadditivity", seed));
        {
            std::vector<std::shared_ptr<const AggregateTable>> t{
                table_for("a", 3.0, ParetoSeverity{0.5, 1.0}, 100000, root.substream("pa").seed()),
                table_for("b", 3.0, ParetoSeverity{0.5, 1.0}, 100000, root.substream("pb").seed())};
            const auto set = couple_scenarios(t, CopulaSpec::independence(2), 1000000, root.substream("pc").seed());
            const double w[2] = {0.5, 0.5};
            const double d = diversification_ratio(set, w, 0.99).ratio;
            pareto_hits += d > 1.0;
            d_pareto += d / 100.0;
        }
        {
            std::vector<std::shared_ptr<const AggregateTable>> t{
                table_for("a", 3.0, LognormalSeverity{0.0, 1.0}, 100000, root.substream("la").seed()),
                table_for("b", 3.0, LognormalSeverity{0.0, 1.0}, 100000, root.substream("lb").seed())};
            const auto set = couple_scenarios(t, CopulaSpec::independence(2), 1000000, root.substream("lc").seed());
            const double w[2] = {0.5, 0.5};
            const double d = diversification_ratio(set, w, 0.99).ratio;
            lognormal_hits += d < 1.0;
            d_logn += d / 100.0;
        }
    }
    return {pareto_hits >= 95 && lognormal_hits >= 95,
            fmt("Pareto(0.5): D>1 in %.0f/100 (mean D %.3f); lognormal: D<1 in %.0f/100 (mean D %.3f)", pareto_hits,
                d_pareto, lognormal_hits, d_logn)};
}

// 8 -------------------------------------------------------------------------
Outcome marginal_preservation()
{
    std::vector<std::shared_ptr<const AggregateTable>> t{
        table_for("a", 3.0, LognormalSeverity{0.0, 0.5}, 10000, 81),
        table_for("b", 5.0, ParetoSeverity{1.5, 1.0}, 10000, 82)};
    const auto set = couple_scenarios(t, CopulaSpec::independence(2), 10000, 83);
    double ks = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
        const auto z = t[i]->aggregates();
        ks = std::max(ks, stats::ks_distance_two_sample(set.line_aggregates(i), {z.begin(), z.end()}));
    }
    const auto a = set.line_aggregates(0), b = set.line_aggregates(1);
    const double r = pearson(a, b).value;
    return {ks < 0.02 && std::fabs(r) < 0.03, fmt("max KS distance %.4f (need < 0.02); independence r = %.4f (need |r| < 0.03)", ks, r)};
}

// 9 -------------------------------------------------------------------------
Outcome robust_dependence_oracles()
{
    const std::vector<double> x{1, 2, 3}, neg{-1, -2, -3};
    const bool quad = quadrant_corr(x, x).value == 2.0 / 3.0 && quadrant_corr(x, neg).value == -2.0 / 3.0;

    RandomStream rng(909);
    Eigen::MatrixXd small(12, 2);
    for (Eigen::Index i = 0; i < 12; ++i) {
        small(i, 0) = rng.normal();
        small(i, 1) = 0.5 * small(i, 0) + rng.normal();
    }
    McdOptions ex;
    ex.h = 8;
    McdOptions cs = ex;
    cs.exhaustive_budget = 0;
    const double det_ex = mcd(small, ex).determinant;
    const double det_cs = mcd(small, cs).determinant;
    const bool agree = std::fabs(det_ex - det_cs) <= 1e-9;

    int wins = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        RandomStream g(derive_seed(99, "contaminated", seed));
        const Eigen::Index n = 100;
        Eigen::MatrixXd data(n, 2);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double z1 = g.normal(), z2 = g.normal();
            data(i, 0) = z1;
            data(i, 1) = 0.8 * z1 + 0.6 * z2;
        }
        for (Eigen::Index i = 0; i < n / 10; ++i) {
            data(i, 0) = 1e6;
            data(i, 1) = -1e6;
        }
        const Eigen::VectorXd c0 = data.col(0), c1 = data.col(1);
        const double rp = pearson(std::span<const double>(c0.data(), n), std::span<const double>(c1.data(), n)).value;
        McdOptions o;
        o.seed = derive_seed(99, "mcd", seed);
        const double rm = mcd(data, o).correlation(0, 1);
        wins += std::fabs(rm - 0.8) < std::fabs(rp - 0.8);
    }
    return {quad && agree && wins >= 95,
            std::string("quadrant hand values ") + (quad ? "exact" : "WRONG") +
                fmt("; MCD det exhaustive %.12g vs concentration %.12g; MCD beats Pearson in %.0f/100", det_ex, det_cs,
                    wins)};
}

// 10 ------------------------------------------------------------------------
Outcome conditional_premium_oracle()
{
    UtilitySpec utility;
    utility.wealth = 1e9;
    PolicyTerms terms;
    terms.cover_fraction = 0.1;
    const std::size_t S = 200000;
    const auto make = [&](const CopulaSpec& c, std::uint64_t seed) {
        const RandomStream root(seed);
        std::vector<std::shared_ptr<const AggregateTable>> t{
            table_for("a", 3.0, LognormalSeverity{15.0, 1.5}, 50000, root.substream("a").seed()),
            table_for("b", 3.0, LognormalSeverity{15.0, 1.5}, 50000, root.substream("b").seed())};
        return couple_scenarios(t, c, S, root.substream("c").seed());
    };
    const auto ind = make(CopulaSpec::independence(2), 1010);
    const auto qu = indifference_premium(ind, utility, terms, PremiumMode::Line, 0);
    const auto qc = conditional_premium(ind, 0, 0.75, utility, terms);
    const double combined = std::sqrt(qu.std_error * qu.std_error + qc.std_error * qc.std_error);
    const bool equal = std::fabs(qu.premium - qc.premium) <= 3.0 * combined;

    Eigen::Matrix2d r;
    r << 1.0, 0.9, 0.9, 1.0;
    int larger = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto set = make(CopulaSpec::gaussian(r), derive_seed(1011, "gauss", seed));
        const auto a = indifference_premium(set, utility, terms, PremiumMode::Line, 0);
        const auto b = conditional_premium(set, 0, 0.75, utility, terms);
        larger += b.premium > a.premium;
    }
    return {equal && larger >= 95,
            fmt("independence |cond-uncond| = %.4g (3 combined SE = %.4g); Gaussian 0.9: conditional larger in %.0f/100",
                std::fabs(qu.premium - qc.premium), 3.0 * combined, larger)};
}

// 11 ------------------------------------------------------------------------
Outcome structure_search()
{
    const std::size_t count = enumerate_structures(5).size();
    int hits = 0;
    const auto families = default_pair_families();
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        RandomStream g(derive_seed(111, "structure", seed));
        const Eigen::Index n = 124;
        Eigen::MatrixXd panel(n, 5);
        for (Eigen::Index t = 0; t < n; ++t) {
            for (Eigen::Index j = 0; j < 5; ++j)
                panel(t, j) = g.pareto(1.0, 1.0);
            panel(t, 3) = std::sqrt(panel(t, 1));  // comonotone with line 1
        }
        const auto ranked = select_structure(pseudo_observations(panel), families);
        bool found = false;
        for (const auto& p : ranked.front().structure.pairs)
            found = found || (std::min(p.first, p.second) == 1 && std::max(p.first, p.second) == 3);
        hits += found;
    }
    return {count == 15 && hits >= 95,
            fmt("enumerate_structures(5) = %.0f; planted pair in top structure %.0f/100", static_cast<double>(count), hits)};
}

// 12 ------------------------------------------------------------------------
std::map<std::string, std::string> read_dir(const std::filesystem::path& dir)
{
    std::map<std::string, std::string> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        std::ifstream f(entry.path(), std::ios::binary);
        std::ostringstream s;
        s << f.rdbuf();
        files[entry.path().filename().string()] = s.str();
    }
    return files;
}

std::map<std::string, std::string> run_pipeline(const std::filesystem::path& dir, const std::string& threads)
{
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    const std::string out = dir.string();
    const std::string events = (dir / "events.csv").string();
    const std::vector<std::vector<std::string>> steps{
        {"synth", "--seed", "7", "--quarters", "120", "--lines", "5", "--copula", "gaussian", "--rho", "0.6"},
        {"summary", "-i", events},
        {"tailfit", "-i", events, "--method", "all"},
        {"trim-sweep", "-i", events, "--k0", "0:20:5", "--k", "20:60:20", "--premium", "--J", "20000"},
        {"extremogram", "-i", events, "--levels", "0.5:0.9:0.1", "--max-lag", "12"},
        {"corr", "-i", events, "--method", "all", "--mcd-starts", "100"},
        {"copula", "-i", events},
        {"price", "-i", events, "--portfolio", "--copula", "gaussian", "--corr-method", "mcd", "--J", "20000", "--S", "50000"},
        {"price", "-i", events, "--copula", "structure", "--J", "20000", "--S", "50000", "--conditional-level", "0.5",
         "--annual"},
        {"diversify", "-i", events, "--J", "20000", "--S", "50000", "--bootstrap", "100"},
    };
    std::map<std::string, std::string> all;
    std::size_t step = 0;
    for (const auto& s : steps) {
        std::vector<std::string> args{"--seed", "99", "--out", out, "--threads", threads};
        args.insert(args.end(), s.begin(), s.end());
        std::ostringstream o, e;
        const int code = run_cli(args, o, e);
        if (code != 0)
            throw std::runtime_error("pipeline step " + s.front() + " failed: " + e.str());
        all["stdout_" + std::to_string(step++)] = o.str();
        for (auto& [name, body] : read_dir(dir))
            all[name] = body;
    }
    return all;
}

Outcome cli_determinism()
{
    const auto base = std::filesystem::temp_directory_path() / "cyberrisk_acceptance";
    const auto a = run_pipeline(base / "a", "1");
    const auto b = run_pipeline(base / "b", "1");
    const auto c = run_pipeline(base / "c", "4");
    std::filesystem::remove_all(base);
    std::size_t differing = 0;
    const auto strip = [](std::string s) {
        // stdout lists file paths, which name the run directory
        for (const char* dir : {"/a/", "/b/", "/c/"}) {
            for (auto pos = s.find(dir); pos != std::string::npos; pos = s.find(dir))
                s.replace(pos, 3, "/x/");
        }
        return s;
    };
    for (const auto& [name, body] : a) {
        differing += !b.count(name) || strip(b.at(name)) != strip(body);
        differing += !c.count(name) || strip(c.at(name)) != strip(body);
    }
    return {differing == 0 && a.size() == b.size() && a.size() == c.size(),
            fmt("%.0f artifacts compared across two runs and threads 1 vs 4; %.0f mismatches",
                static_cast<double>(a.size()), static_cast<double>(differing))};
}

}  // namespace

int main(int argc, char** argv)
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"1  Joe tau anchors", joe_tau_anchors},
        {"2  trimmed Hill reduction", trimmed_reduction},
        {"3  estimator consistency", consistency_suite},
        {"4  robustness / breakdown", breakdown},
        {"5  premium sensitivity sweep", premium_sensitivity},
        {"6  zero-utility oracles", zero_utility},
        {"7  superadditivity", superadditivity},
        {"8  marginal preservation", marginal_preservation},
        {"9  robust dependence oracles", robust_dependence_oracles},
        {"10 conditional premium", conditional_premium_oracle},
        {"11 structure search", structure_search},
        {"12 end-to-end determinism", cli_determinism},
    };
    std::string only = argc > 1 ? argv[1] : "";
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        if (!only.empty() && name.rfind(only + " ", 0) != 0)
            continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome r;
        try {
            r = check();
        } catch (const std::exception& e) {
            r = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failures += !r.pass;
        std::printf("[%s] %-30s %7.2fs  %s\n", r.pass ? "PASS" : "FAIL", name.c_str(), secs, r.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}

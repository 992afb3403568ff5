#include "doctest.h"

#include "cyberrisk/error.hpp"
#include "cyberrisk/random.hpp"
#include "cyberrisk/tail_index.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

using namespace cyberrisk;

namespace {

constexpr double e = std::numbers::e;

std::vector<double> pareto(std::size_t n, double alpha, std::uint64_t seed)
{
    RandomStream rng(seed);
    std::vector<double> x(n);
    for (auto& v : x)
        v = rng.pareto(alpha, 1.0);
    return x;
}

// Exact quantiles x_i = (1 - i/(n+1))^(-1/alpha).
std::vector<double> pareto_grid(std::size_t n, double alpha)
{
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = std::pow(1.0 - static_cast<double>(i + 1) / static_cast<double>(n + 1), -1.0 / alpha);
    return x;
}

}  // namespace

TEST_CASE("hill: hand value and degeneracy")
{
    const OrderedSample s({1.0, e, e * e});
    const auto h = hill(s, 2);
    CHECK(*h.xi == doctest::Approx(1.5));
    CHECK(*h.alpha == doctest::Approx(1.0 / 1.5));
    CHECK(*h.scale == 1.0);

    const auto d = hill(OrderedSample({5.0, 5.0, 5.0, 5.0}), 2);
    CHECK(*d.xi == 0.0);
    CHECK(!d.alpha);
    CHECK((d.flags & kFlagDegenerate) != 0);

    CHECK_THROWS_AS(hill(s, 1), ValidationError);
    CHECK_THROWS_AS(hill(s, 3), ValidationError);
}

TEST_CASE("hill: Pareto consistency")
{
    const OrderedSample s(pareto(50000, 1.0, 1));
    CHECK(*hill(s, 1000).xi == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("smoothed_hill")
{
    const OrderedSample s(pareto(500, 1.0, 2));
    const double mean34 = 0.5 * (*hill(s, 3).xi + *hill(s, 4).xi);
    CHECK(smoothed_hill(s, 2, 2) == doctest::Approx(mean34).epsilon(1e-12));
    CHECK_THROWS_AS(smoothed_hill(OrderedSample({1, 2, 3, 4}), 2, 2), ValidationError);
}

TEST_CASE("hill_plot_data")
{
    const OrderedSample s(pareto(200, 1.0, 3));
    const auto p = hill_plot_data(s, 10, 11);
    REQUIRE(p.size() == 2);
    CHECK(p[0].k == 10);
    CHECK(p[0].xi == doctest::Approx(*hill(s, 10).xi));
    CHECK(p[0].lower < p[0].xi);
    CHECK(p[0].upper > p[0].xi);
    CHECK_THROWS_AS(hill_plot_data(s, 11, 10), ValidationError);
}

TEST_CASE("trimmed_hill: weighted forms")
{
    const OrderedSample s(pareto(100, 1.0, 4));
    const std::size_t k = 20;
    std::vector<double> uniform(k, 1.0 / k);
    CHECK(trimmed_hill(s, 0, k, uniform) == doctest::Approx(*hill(s, k).xi).epsilon(1e-12));
    std::vector<double> zeros(k - 3, 0.0);
    CHECK(trimmed_hill(s, 3, k, zeros) == 0.0);
    std::vector<double> first(k - 3, 0.0);
    first[0] = 1.0;
    CHECK(trimmed_hill(s, 3, k, first) == doctest::Approx(std::log(s.descending(4) / s.descending(k + 1))));
    CHECK_THROWS_AS(trimmed_hill(s, 0, k, zeros), ValidationError);
}

TEST_CASE("trimmed_hill_optimal")
{
    const OrderedSample s(pareto(3000, 1.0, 5));
    for (std::size_t k : {2, 10, 100, 2998})
        CHECK(*trimmed_hill_optimal(s, 0, k).xi == *hill(s, k).xi);
    CHECK_THROWS_AS(trimmed_hill_optimal(s, 10, 10), ValidationError);
    CHECK_THROWS_AS(trimmed_hill_optimal(s, 0, 2999), ValidationError);

    const OrderedSample big(pareto(50000, 1.0, 6));
    CHECK(*trimmed_hill_optimal(big, 10, 1000).xi == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("trimmed_hill_sweep")
{
    const OrderedSample s(pareto(100, 1.0, 7));
    const std::vector<std::size_t> one{5}, ten{10};
    const auto single = trimmed_hill_sweep(s, one, ten);
    REQUIRE(single.size() == 1);
    CHECK(*single[0].xi == *trimmed_hill_optimal(s, 5, 10).xi);

    const std::vector<std::size_t> k0s{0, 20}, ks{10, 30};
    const auto grid = trimmed_hill_sweep(s, k0s, ks);
    REQUIRE(grid.size() == 4);
    CHECK((grid[2].flags & kFlagInfeasible) != 0);
    CHECK(!grid[2].xi);
    CHECK(grid[3].xi);

    const std::vector<std::size_t> bad_k0{50}, bad_k{20};
    CHECK_THROWS_AS(trimmed_hill_sweep(s, bad_k0, bad_k), ValidationError);
}

TEST_CASE("mle_pareto")
{
    const auto m = mle_pareto(OrderedSample({e, e, e, e}), 1.0);
    CHECK(m.alpha == doctest::Approx(1.0));
    CHECK(m.alpha_unbiased == doctest::Approx(0.5));
    CHECK_THROWS_AS(mle_pareto(OrderedSample({2, 2, 2}), 2.0), ComputationError);
    CHECK(mle_pareto(OrderedSample(pareto(50000, 2.0, 8)), 1.0).alpha == doctest::Approx(2.0).epsilon(0.025));
}

TEST_CASE("ls_estimator and wls_estimator")
{
    CHECK(*ls_estimator(OrderedSample(pareto_grid(1000, 1.5))).alpha == doctest::Approx(1.5).epsilon(0.02));
    CHECK_THROWS(ls_estimator(OrderedSample({3, 3, 3, 3})));

    CHECK(*wls_estimator(OrderedSample({1.0, e}), 1.0).alpha == doctest::Approx(std::log(2.0)).epsilon(1e-4));
    CHECK_THROWS(wls_estimator(OrderedSample({1, 1, 1}), 1.0));
    CHECK(*wls_estimator(OrderedSample(pareto(50000, 1.0, 9)), 1.0).alpha == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("pm_estimator on constructed quartiles")
{
    // Type-7 quartiles of {1, 1, r, r} are 1 and r.
    const auto quartile_sample = [](double ratio) { return OrderedSample({1.0, 1.0, ratio, ratio}); };
    CHECK(*pm_estimator(quartile_sample(3.0)).alpha == doctest::Approx(1.0));
    CHECK(*pm_estimator(quartile_sample(std::sqrt(3.0))).alpha == doctest::Approx(2.0));
    CHECK_THROWS(pm_estimator(OrderedSample({2, 2, 2, 2})));

    const auto mpm = percentile_pair_estimator(OrderedSample(pareto(20000, 1.0, 10)), 0.1, 0.9);
    CHECK((mpm.flags & kFlagExperimental) != 0);
    CHECK(*mpm.alpha == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("ecf")
{
    const std::vector<double> x{0.3, 1.7};
    CHECK(ecf_real(x, 0.0) == 1.0);
    const std::vector<double> one{2.5};
    CHECK(ecf_real(one, 0.7) == doctest::Approx(std::cos(0.7 * 2.5)));

    // n = 2 gives t = 1/sqrt(2), sqrt(2); cos(sqrt(2) x) = 1 removes the second point.
    const double x2 = std::numbers::pi * std::sqrt(2.0);
    const std::vector<double> tiny{x2, x2};
    CHECK_THROWS_WITH(ecf_regression(tiny), doctest::Contains("insufficient ECF grid"));

    const auto r = ecf_regression(pareto(10000, 0.8, 11));
    CHECK(r.alpha == doctest::Approx(0.8).epsilon(0.2));
    CHECK(r.std_error > 0.0);
    CHECK(EcfRegressionConfig{0.45}.grid_size(10000) == 64);
}

TEST_CASE("pareto_qq and fit_line")
{
    CHECK_THROWS(fit_line(pareto_qq(OrderedSample({2.0}))));
    const auto line = fit_line(pareto_qq(OrderedSample(pareto_grid(500, 2.0))));
    CHECK(line.r_squared > 0.999);
    CHECK(line.slope == doctest::Approx(0.5).epsilon(0.01));
    CHECK(fit_line(pareto_qq(OrderedSample(pareto(10000, 1.0, 12)))).slope == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("write_estimates_csv")
{
    const OrderedSample s({1.0, e, e * e});
    const std::vector<TailIndexEstimate> est{hill(s, 2)};
    std::ostringstream out;
    write_estimates_csv(out, est);
    CHECK(out.str().rfind("method,k0,k,xi_hat,alpha_hat,scale,std_error,flags\n", 0) == 0);
    CHECK(out.str().find("hill,") != std::string::npos);
}

TEST_CASE("ecf_real is bounded by one")
{
    RandomStream rng(13);
    for (int i = 0; i < 1000; ++i) {
        std::vector<double> x(1 + rng.below(50));
        for (auto& v : x)
            v = rng.pareto(0.7, 1.0);
        CHECK(std::fabs(ecf_real(x, 10.0 * rng.uniform())) <= 1.0);
    }
}

TEST_CASE("estimators are scale invariant")
{
    const auto x = pareto(2000, 1.3, 14);
    for (double c : {2.0, 0.37, 1e4}) {
        std::vector<double> y(x);
        for (auto& v : y)
            v *= c;
        const OrderedSample a(x), b(y);
        CHECK(*hill(b, 100).xi == doctest::Approx(*hill(a, 100).xi).epsilon(1e-10));
        CHECK(smoothed_hill(b, 50) == doctest::Approx(smoothed_hill(a, 50)).epsilon(1e-10));
        CHECK(*trimmed_hill_optimal(b, 5, 100).xi == doctest::Approx(*trimmed_hill_optimal(a, 5, 100).xi).epsilon(1e-10));
        CHECK(*pm_estimator(b).alpha == doctest::Approx(*pm_estimator(a).alpha).epsilon(1e-10));
        CHECK(*ls_estimator(b).alpha == doctest::Approx(*ls_estimator(a).alpha).epsilon(1e-10));
        CHECK(*wls_estimator(b, c).alpha == doctest::Approx(*wls_estimator(a, 1.0).alpha).epsilon(1e-10));
        CHECK(mle_pareto(b, c).alpha == doctest::Approx(mle_pareto(a, 1.0).alpha).epsilon(1e-10));
    }
}

TEST_CASE("ecf_regression: moderate rescaling stays within two standard errors")
{
    for (double c : {0.8, 1.25}) {
        int agree = 0;
        for (std::uint64_t r = 0; r < 100; ++r) {
            auto x = pareto(10000, 0.8, derive_seed(15, "ecf-scale", r));
            const auto base = ecf_regression(x);
            for (auto& v : x)
                v *= c;
            const auto moved = ecf_regression(x);
            agree += std::fabs(moved.alpha - base.alpha) <= 2.0 * base.std_error;
        }
        CHECK(agree == 100);
    }
}

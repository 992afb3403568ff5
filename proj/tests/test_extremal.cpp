#include "doctest.h"

#include "cyberrisk/error.hpp"
#include "cyberrisk/extremal.hpp"
#include "cyberrisk/random.hpp"

#include <sstream>

using namespace cyberrisk;

namespace {

std::vector<double> iid(std::size_t n, std::uint64_t seed)
{
    RandomStream rng(seed);
    std::vector<double> x(n);
    for (auto& v : x)
        v = rng.uniform();
    return x;
}

}  // namespace

TEST_CASE("extremogram: lag 0 ratio is one")
{
    const auto x = iid(200, 1);
    CHECK(extremogram(x, 0.9, 0) == 1.0);
}

TEST_CASE("extremogram: persistent series stays extreme at every lag")
{
    // Increasing series: once above the threshold it stays there.
    std::vector<double> x(100);
    for (std::size_t t = 0; t < x.size(); ++t)
        x[t] = static_cast<double>(t + 1);
    for (std::size_t h = 1; h <= 5; ++h)
        CHECK(extremogram(x, 0.5, h) == 1.0);
}

TEST_CASE("extremogram: constant series and empty conditioning set are errors")
{
    const std::vector<double> c(50, 3.0);
    CHECK_THROWS(extremogram(c, 0.5, 1));

    std::vector<double> x(10);
    for (std::size_t t = 0; t < x.size(); ++t)
        x[t] = static_cast<double>(10 - t);
    // The 0.999 quantile is the maximum, which nothing exceeds.
    CHECK_THROWS_WITH(extremogram(x, 0.999, 1), doctest::Contains("empty conditioning set"));
    CHECK_THROWS_AS(extremogram(x, 0.5, 10), ValidationError);
}

TEST_CASE("extremogram: independence oracle")
{
    const auto x = iid(10000, 2);
    for (std::size_t h = 1; h <= 5; ++h)
        CHECK(extremogram(x, 0.9, h) == doctest::Approx(0.1).epsilon(0.2));
}

TEST_CASE("extremogram: covariance variant near zero under independence")
{
    const auto x = iid(10000, 3);
    CHECK(std::fabs(extremogram(x, 0.9, 1, ExtremogramVariant::Covariance)) < 0.01);
    CHECK(parse_extremogram_variant("covariance") == ExtremogramVariant::Covariance);
    CHECK(to_string(ExtremogramVariant::Ratio) == "ratio");
    CHECK_THROWS_AS(parse_extremogram_variant("bogus"), ValidationError);
}

TEST_CASE("extremogram_matrix")
{
    const auto x = iid(300, 4);
    const std::vector<double> one{0.8};
    const auto m = extremogram_matrix(x, one, 1);
    REQUIRE(m.cells.size() == 1);
    REQUIRE(m.cells[0].size() == 1);
    CHECK(*m.at(0, 1).value == extremogram(x, 0.8, 1));

    const auto levels = default_extremogram_levels();
    CHECK(levels.size() == 99);
    CHECK(levels.front() == doctest::Approx(0.01));
    CHECK(levels.back() == doctest::Approx(0.99));

    const std::vector<double> short_series{1, 5, 2, 7};
    const std::vector<double> lv{0.5};
    const auto wide = extremogram_matrix(short_series, lv, 6);
    CHECK(wide.at(0, 1).value);
    CHECK(!wide.at(0, 5).value);

    std::ostringstream out;
    write_extremogram_csv(out, m);
    CHECK(out.str().rfind("level,lag,value,variant,exceedance_count\n", 0) == 0);
}

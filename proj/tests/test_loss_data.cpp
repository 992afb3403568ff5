#include "doctest.h"

#include "cyberrisk/error.hpp"
#include "cyberrisk/loss_data.hpp"
#include "cyberrisk/random.hpp"

#include <numeric>
#include <sstream>

using namespace cyberrisk;
using namespace std::chrono;

namespace {

Date ymd(int y, unsigned m, unsigned d) { return Date{year{y}, month{m}, day{d}}; }

LossEvent event(const std::string& id, Date date, double loss, const std::string& sector = "52")
{
    return {id, date, sector, loss};
}

}  // namespace

TEST_CASE("parse_loss_records: empty body gives no events")
{
    std::istringstream in("event_id,accident_date,sector,total_loss\n");
    const auto r = parse_loss_records(in);
    CHECK(r.events.empty());
    CHECK(r.dropped == 0);
}

TEST_CASE("parse_loss_records: zero and negative losses are dropped")
{
    std::istringstream in("event_id,accident_date,sector,total_loss\n"
                          "a,2001-02-03,52,100\n"
                          "b,2001-02-04,52,0\n"
                          "c,2001-02-05,51,-5\n"
                          "d,2001-02-06,51,12.5\n"
                          "e,2001-02-07,54,7\n");
    const auto r = parse_loss_records(in);
    CHECK(r.events.size() == 3);
    CHECK(r.dropped == 2);
    CHECK(r.events[1].total_loss == doctest::Approx(12.5));
    CHECK(r.events[0].accident_date == ymd(2001, 2, 3));
}

TEST_CASE("parse_loss_records: bad dates and sectors are counted, bad header throws")
{
    std::istringstream in("event_id,accident_date,sector,total_loss\n"
                          "a,2001-13-03,52,100\n"
                          "b,2001-01-03,5x,100\n"
                          "c,2001-01-03,52,abc\n");
    const auto r = parse_loss_records(in);
    CHECK(r.events.empty());
    CHECK(r.dropped == 3);

    std::istringstream bad("id,date,loss\n1,2001-01-01,5\n");
    CHECK_THROWS_AS(parse_loss_records(bad), ValidationError);
}

TEST_CASE("parse_loss_records: custom columns, delimiter and date pattern")
{
    std::istringstream in("when;naics;usd\n03/02/2001;52;10\n");
    ParseConfig c;
    c.delimiter = ';';
    c.date_column = "when";
    c.sector_column = "naics";
    c.loss_column = "usd";
    c.date_pattern = "%d/%m/%Y";
    const auto r = parse_loss_records(in, c);
    REQUIRE(r.events.size() == 1);
    CHECK(r.events[0].accident_date == ymd(2001, 2, 3));
}

TEST_CASE("write then parse round trips")
{
    const std::vector<LossEvent> ev{event("x", ymd(1995, 5, 1), 100.25), event("y", ymd(1996, 1, 1), 3e9, "51")};
    std::stringstream s;
    write_loss_records(s, ev);
    const auto r = parse_loss_records(s);
    CHECK(r.events == ev);
}

TEST_CASE("filter_window")
{
    const std::vector<LossEvent> ev{event("a", ymd(1989, 12, 31), 1), event("b", ymd(1990, 1, 1), 1),
                                    event("c", ymd(2000, 6, 30), 1)};
    CHECK(filter_window(ev, ymd(1990, 1, 1), ymd(2020, 1, 1)).size() == 2);
    CHECK(filter_window(ev, ymd(1980, 1, 1), ymd(2020, 1, 1)).size() == 3);
    CHECK(filter_window(std::span<const LossEvent>{}, ymd(1990, 1, 1), ymd(1991, 1, 1)).empty());
    CHECK_THROWS_AS(filter_window(ev, ymd(1991, 1, 1), ymd(1990, 1, 1)), ValidationError);
}

TEST_CASE("aggregate_quarterly: zero fill and additivity")
{
    const Window w{ymd(1995, 1, 1), ymd(1995, 12, 31)};
    {
        const std::vector<LossEvent> ev{event("a", ymd(1995, 5, 10), 100)};
        const auto q = aggregate_quarterly(ev, w, "52");
        REQUIRE(q.size() == 4);
        CHECK(q.quarters[1] == Quarter{1995, 2});
        CHECK(q.aggregate == std::vector<double>{0, 100, 0, 0});
        CHECK(q.count == std::vector<std::int64_t>{0, 1, 0, 0});
    }
    {
        const std::vector<LossEvent> ev{event("a", ymd(1995, 5, 10), 100), event("b", ymd(1995, 6, 30), 50)};
        const auto q = aggregate_quarterly(ev, w, "52");
        CHECK(q.aggregate[1] == 150);
        CHECK(q.count[1] == 2);
    }
}

TEST_CASE("aggregate_quarterly: total preserved exactly on random events")
{
    RandomStream rng(11);
    const Window w{ymd(1990, 1, 1), ymd(2020, 12, 31)};
    std::vector<LossEvent> ev;
    std::int64_t cents = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto day_offset = static_cast<int>(rng.below(11000));
        const Date d{sys_days{w.start} + days{day_offset}};
        const double loss = from_cents(to_cents(rng.pareto(1.0, 1e3)));
        cents += to_cents(loss);
        ev.push_back(event(std::to_string(i), d, loss));
    }
    const auto q = aggregate_quarterly(ev, w, "52");
    std::int64_t total = 0;
    for (double a : q.aggregate)
        total += to_cents(a);
    CHECK(total == cents);
    CHECK(std::accumulate(q.count.begin(), q.count.end(), std::int64_t{0}) == 1000);
}

TEST_CASE("fit_poisson_rate")
{
    CHECK(fit_poisson_rate(std::vector<std::int64_t>{0, 0, 0}) == 0.0);
    CHECK(fit_poisson_rate(std::vector<std::int64_t>{1, 2, 3}) == 2.0);
    CHECK_THROWS_AS(fit_poisson_rate(std::vector<std::int64_t>{}), ValidationError);

    RandomStream rng(3);
    std::vector<std::int64_t> c(10000);
    for (auto& v : c)
        v = static_cast<std::int64_t>(rng.poisson(4.0));
    CHECK(fit_poisson_rate(c) == doctest::Approx(4.0).epsilon(0.025));
}

TEST_CASE("generate_synthetic_panel: determinism and severity quantile")
{
    SyntheticSpec spec;
    spec.lines = {{"52", 4.0, ParetoSeverity{1.0, 1.0}}, {"51", 2.0, LognormalSeverity{10, 1}}};
    spec.quarters = 40;
    spec.seed = 7;
    const auto a = generate_synthetic_panel(spec).all_events();
    const auto b = generate_synthetic_panel(spec).all_events();
    CHECK(a == b);

    SyntheticSpec big;
    big.lines = {{"52", 4.0, ParetoSeverity{1.0, 1.0}}};
    big.quarters = 10000;
    big.seed = 9;
    const auto panel = generate_synthetic_panel(big);
    const auto& ev = panel.sector("52");
    std::vector<double> losses;
    for (const auto& e : ev)
        losses.push_back(e.total_loss);
    std::sort(losses.begin(), losses.end());
    CHECK(losses[losses.size() / 2] == doctest::Approx(2.0).epsilon(0.025));
    CHECK(static_cast<double>(ev.size()) / 10000.0 == doctest::Approx(4.0).epsilon(0.025));
}

TEST_CASE("generate_synthetic_panel: contamination multiplies the largest losses")
{
    SyntheticSpec spec;
    spec.lines = {{"52", 5.0, ParetoSeverity{1.0, 1.0}}};
    spec.quarters = 50;
    spec.seed = 2;
    const auto clean = generate_synthetic_panel(spec).all_events();
    spec.contamination = Contamination{3, 1e3};
    const auto dirty = generate_synthetic_panel(spec).all_events();
    REQUIRE(clean.size() == dirty.size());
    std::size_t changed = 0;
    for (std::size_t i = 0; i < clean.size(); ++i)
        changed += clean[i].total_loss != dirty[i].total_loss;
    CHECK(changed == 3);
}

TEST_CASE("synthetic spec validation")
{
    SyntheticSpec spec;
    CHECK_THROWS_AS(spec.validate(), ValidationError);
    spec.lines = {{"5", 1.0, ParetoSeverity{}}};
    CHECK_THROWS_AS(spec.validate(), ValidationError);
    spec.lines = {{"52", -1.0, ParetoSeverity{}}};
    CHECK_THROWS_AS(spec.validate(), ValidationError);
}

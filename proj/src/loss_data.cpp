#include "cyberrisk/loss_data.hpp"

#include "cyberrisk/error.hpp"
#include "cyberrisk/random.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace cyberrisk {

using namespace std::chrono;

std::int64_t to_cents(double usd) { return static_cast<std::int64_t>(std::llround(usd * 100.0)); }

std::optional<Date> parse_date(std::string_view text, std::string_view pattern)
{
    int y = 0;
    unsigned m = 0, d = 0;
    bool have_y = false, have_m = false, have_d = false;
    std::size_t pos = 0;
    auto read_int = [&](std::size_t max_digits, auto& out) {
        std::size_t len = 0;
        while (pos + len < text.size() && len < max_digits && std::isdigit(static_cast<unsigned char>(text[pos + len])))
            ++len;
        if (len == 0)
            return false;
        auto [p, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, out);
        pos += len;
        return ec == std::errc{};
    };
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        if (pattern[i] == '%' && i + 1 < pattern.size()) {
            const char token = pattern[++i];
            bool ok = false;
            if (token == 'Y')
                ok = have_y = read_int(4, y);
            else if (token == 'm')
                ok = have_m = read_int(2, m);
            else if (token == 'd')
                ok = have_d = read_int(2, d);
            if (!ok)
                return std::nullopt;
        } else {
            if (pos >= text.size() || text[pos] != pattern[i])
                return std::nullopt;
            ++pos;
        }
    }
    if (pos != text.size() || !have_y || !have_m || !have_d)
        return std::nullopt;
    const Date date{year{y}, month{m}, day{d}};
    if (!date.ok())
        return std::nullopt;
    return date;
}

std::string format_date(Date date)
{
    std::ostringstream out;
    out << std::setfill('0') << std::setw(4) << static_cast<int>(date.year()) << '-' << std::setw(2)
        << static_cast<unsigned>(date.month()) << '-' << std::setw(2) << static_cast<unsigned>(date.day());
    return out.str();
}

namespace {

std::vector<std::string> split_row(const std::string& line, char delimiter)
{
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (c == '"') {
            if (quoted && i + 1 < line.size() && line[i + 1] == '"') {
                field.push_back('"');
                ++i;
            } else {
                quoted = !quoted;
            }
        } else if (c == delimiter && !quoted) {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

std::string trim(std::string s)
{
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string::npos)
        return {};
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

std::optional<std::string> normalize_sector(const std::string& raw)
{
    const std::string code = trim(raw);
    if (code.size() < 2 || !std::all_of(code.begin(), code.end(), [](unsigned char c) { return std::isdigit(c); }))
        return std::nullopt;
    return code.substr(0, 2);
}

std::optional<double> parse_amount(const std::string& raw)
{
    const std::string text = trim(raw);
    if (text.empty())
        return std::nullopt;
    double value = 0.0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || p != text.data() + text.size() || !std::isfinite(value))
        return std::nullopt;
    return value;
}

std::optional<std::size_t> find_column(const std::vector<std::string>& header, const std::string& name)
{
    for (std::size_t i = 0; i < header.size(); ++i)
        if (trim(header[i]) == name)
            return i;
    return std::nullopt;
}

}  // namespace

ParseResult parse_loss_records(std::istream& in, const ParseConfig& config)
{
    std::string line;
    while (std::getline(in, line) && (line.empty() || line[0] == '#')) {
    }
    if (line.empty())
        throw ValidationError("loss records: missing header row");
    const auto header = split_row(line, config.delimiter);
    const auto date_col = find_column(header, config.date_column);
    const auto sector_col = find_column(header, config.sector_column);
    const auto loss_col = find_column(header, config.loss_column);
    const auto id_col = find_column(header, config.id_column);
    if (!date_col || !sector_col || !loss_col)
        throw ValidationError("loss records: header must name columns '" + config.date_column + "', '" +
                              config.sector_column + "' and '" + config.loss_column + "'");

    ParseResult result;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        ++row;
        const auto fields = split_row(line, config.delimiter);
        const std::size_t needed = std::max({*date_col, *sector_col, *loss_col}) + 1;
        if (fields.size() < needed) {
            ++result.dropped;
            continue;
        }
        const auto date = parse_date(trim(fields[*date_col]), config.date_pattern);
        const auto sector = normalize_sector(fields[*sector_col]);
        const auto loss = parse_amount(fields[*loss_col]);
        if (!date || !sector || !loss || to_cents(*loss) <= 0) {
            ++result.dropped;
            continue;
        }
        LossEvent event;
        event.event_id = id_col && *id_col < fields.size() ? trim(fields[*id_col]) : "row-" + std::to_string(row);
        event.accident_date = *date;
        event.sector_code = *sector;
        event.total_loss = from_cents(to_cents(*loss));
        result.events.push_back(std::move(event));
    }
    return result;
}

void write_loss_records(std::ostream& out, std::span<const LossEvent> events, const ParseConfig& config)
{
    const char d = config.delimiter;
    out << config.id_column << d << config.date_column << d << config.sector_column << d << config.loss_column
        << '\n';
    for (const auto& e : events) {
        const std::int64_t cents = to_cents(e.total_loss);
        out << e.event_id << d << format_date(e.accident_date) << d << e.sector_code << d << cents / 100 << '.'
            << std::setfill('0') << std::setw(2) << cents % 100 << '\n';
    }
}

std::vector<LossEvent> filter_window(std::span<const LossEvent> events, Date start, Date end)
{
    require(start <= end, "filter_window: start date after end date");
    std::vector<LossEvent> kept;
    std::copy_if(events.begin(), events.end(), std::back_inserter(kept),
                 [&](const LossEvent& e) { return start <= e.accident_date && e.accident_date <= end; });
    return kept;
}

SectorPanel::SectorPanel(std::vector<LossEvent> events, Window window) : window_(window)
{
    require(window.start <= window.end, "sector panel: window start after end");
    for (auto& e : events) {
        require(window.start <= e.accident_date && e.accident_date <= window.end,
                "sector panel: event " + e.event_id + " outside window");
        require(e.total_loss > 0.0, "sector panel: event " + e.event_id + " has non-positive loss");
        sectors_[e.sector_code].push_back(std::move(e));
    }
    for (auto& [code, list] : sectors_)
        std::stable_sort(list.begin(), list.end(),
                         [](const LossEvent& a, const LossEvent& b) { return a.accident_date < b.accident_date; });
}

const std::vector<LossEvent>& SectorPanel::sector(const std::string& code) const
{
    static const std::vector<LossEvent> empty;
    const auto it = sectors_.find(code);
    return it == sectors_.end() ? empty : it->second;
}

std::vector<std::string> SectorPanel::sector_codes() const
{
    std::vector<std::string> codes;
    for (const auto& [code, list] : sectors_)
        codes.push_back(code);
    return codes;
}

std::vector<LossEvent> SectorPanel::all_events() const
{
    std::vector<LossEvent> out;
    for (const auto& [code, list] : sectors_)
        out.insert(out.end(), list.begin(), list.end());
    return out;
}

Quarter quarter_of(Date date)
{
    return {static_cast<int>(date.year()), static_cast<int>((static_cast<unsigned>(date.month()) - 1) / 3 + 1)};
}

std::vector<double> QuarterlySeries::counts_as_double() const
{
    return {count.begin(), count.end()};
}

QuarterlySeries aggregate_quarterly(std::span<const LossEvent> events, Window window, std::string sector)
{
    require(window.start <= window.end, "aggregate_quarterly: window start after end");
    if (sector.empty() && !events.empty())
        sector = events.front().sector_code;
    const Quarter first = quarter_of(window.start);
    const Quarter last = quarter_of(window.end);
    const auto ordinal = [&](Quarter q) { return (q.year - first.year) * 4 + (q.index - first.index); };
    const auto quarters = static_cast<std::size_t>(ordinal(last) + 1);

    QuarterlySeries series;
    series.sector = sector;
    series.quarters.reserve(quarters);
    for (std::size_t i = 0; i < quarters; ++i) {
        const int offset = first.index - 1 + static_cast<int>(i);
        series.quarters.push_back({first.year + offset / 4, offset % 4 + 1});
    }
    std::vector<std::int64_t> cents(quarters, 0);
    series.count.assign(quarters, 0);
    for (const auto& e : events) {
        require(e.sector_code == sector, "aggregate_quarterly: mixed sectors (" + e.sector_code + ", " + sector + ")");
        if (e.accident_date < window.start || window.end < e.accident_date)
            continue;
        const auto q = static_cast<std::size_t>(ordinal(quarter_of(e.accident_date)));
        cents[q] += to_cents(e.total_loss);
        ++series.count[q];
    }
    series.aggregate.resize(quarters);
    std::transform(cents.begin(), cents.end(), series.aggregate.begin(), from_cents);
    return series;
}

void write_quarterly_csv(std::ostream& out, std::span<const QuarterlySeries> series)
{
    out << "sector,year,quarter,aggregate_loss,count\n";
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.size(); ++i) {
            const std::int64_t cents = to_cents(s.aggregate[i]);
            out << s.sector << ',' << s.quarters[i].year << ',' << s.quarters[i].index << ',' << cents / 100 << '.'
                << std::setfill('0') << std::setw(2) << cents % 100 << ',' << s.count[i] << '\n';
        }
}

double fit_poisson_rate(std::span<const std::int64_t> counts)
{
    require(!counts.empty(), "fit_poisson_rate: empty series");
    const auto total = std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
    return static_cast<double>(total) / static_cast<double>(counts.size());
}

void SyntheticSpec::validate() const
{
    require(!lines.empty(), "synthetic spec: no lines");
    require(quarters >= 1, "synthetic spec: quarters must be >= 1");
    for (const auto& line : lines) {
        require(line.sector_code.size() == 2, "synthetic spec: sector code must have two digits");
        require(line.frequency >= 0.0 && std::isfinite(line.frequency), "synthetic spec: frequency must be >= 0");
        validate_severity(line.severity);
        if (contamination)
            require(static_cast<double>(contamination->count) < line.frequency * static_cast<double>(quarters),
                    "synthetic spec: contamination count must be below the expected event count");
    }
    if (contamination)
        require(contamination->multiplier > 0.0, "synthetic spec: contamination multiplier must be positive");
    if (coupling) {
        coupling->validate();
        require(coupling->dimension == lines.size(), "synthetic spec: coupling dimension != number of lines");
    }
}

SectorPanel generate_synthetic_panel(const SyntheticSpec& spec)
{
    spec.validate();
    const RandomStream root(spec.seed);

    CompoundModel model;
    for (const auto& line : spec.lines)
        model.lines.push_back({line.sector_code, line.frequency, line.severity});

    std::vector<std::shared_ptr<const AggregateTable>> tables;
    for (std::size_t i = 0; i < model.lines.size(); ++i)
        tables.push_back(std::make_shared<const AggregateTable>(
            simulate_marginal(model, i, spec.quarters, root.substream("synthetic/line", i).seed())));

    std::optional<JointScenarioSet> coupled;
    if (spec.coupling)
        coupled.emplace(couple_scenarios(tables, *spec.coupling, spec.quarters,
                                         root.substream("synthetic/coupling").seed()));

    const Date start{year{spec.start_year}, January, day{1}};
    const auto last_year = year{spec.start_year + static_cast<int>((spec.quarters - 1) / 4)};
    const auto last_month = month{static_cast<unsigned>((spec.quarters - 1) % 4 * 3 + 3)};
    const Date window_end{sys_days{last_year / last_month / last}};

    std::vector<LossEvent> events;
    for (std::size_t i = 0; i < model.lines.size(); ++i) {
        RandomStream dates = root.substream("synthetic/dates", i);
        std::vector<LossEvent> line_events;
        for (std::size_t q = 0; q < spec.quarters; ++q) {
            const std::size_t row = coupled ? coupled->index(q, i) : q;
            const auto year_offset = static_cast<int>(q / 4);
            const auto first_month = static_cast<unsigned>(q % 4 * 3 + 1);
            const sys_days q_start{year{spec.start_year + year_offset} / month{first_month} / 1};
            const sys_days q_end{year{spec.start_year + year_offset} / month{first_month + 2} / last};
            const auto span_days = static_cast<std::uint64_t>((q_end - q_start).count() + 1);
            std::size_t n = 0;
            for (double x : tables[i]->events(row)) {
                LossEvent e;
                e.event_id = "S" + spec.lines[i].sector_code + "-" + std::to_string(q) + "-" + std::to_string(n++);
                e.accident_date = Date{q_start + days{static_cast<int>(dates.below(span_days))}};
                e.sector_code = spec.lines[i].sector_code;
                e.total_loss = from_cents(std::max<std::int64_t>(1, to_cents(x)));
                line_events.push_back(std::move(e));
            }
        }
        if (spec.contamination && spec.contamination->count > 0) {
            std::vector<std::size_t> order(line_events.size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return line_events[a].total_loss > line_events[b].total_loss;
            });
            const auto hits = std::min(spec.contamination->count, order.size());
            for (std::size_t k = 0; k < hits; ++k) {
                auto& e = line_events[order[k]];
                e.total_loss = from_cents(to_cents(e.total_loss * spec.contamination->multiplier));
            }
        }
        events.insert(events.end(), std::make_move_iterator(line_events.begin()),
                      std::make_move_iterator(line_events.end()));
    }
    return SectorPanel(std::move(events), Window{start, window_end});
}

}  // namespace cyberrisk

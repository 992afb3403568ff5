#pragma once

#include "cyberrisk/compound_engine.hpp"
#include "cyberrisk/copulas.hpp"

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cyberrisk {

using Date = std::chrono::year_month_day;

/// Monetary amounts are carried in whole cents so that aggregation is exact.
std::int64_t to_cents(double usd);
inline double from_cents(std::int64_t cents) { return static_cast<double>(cents) / 100.0; }

/// Parse a date against a pattern built from %Y, %m, %d and literal characters.
std::optional<Date> parse_date(std::string_view text, std::string_view pattern = "%Y-%m-%d");
std::string format_date(Date date);

struct LossEvent {
    std::string event_id;
    Date accident_date;
    std::string sector_code;  ///< two-digit NAIC-style code
    double total_loss = 0.0;  ///< USD, strictly positive, whole cents

    bool operator==(const LossEvent&) const = default;
};

struct Window {
    Date start;
    Date end;
};

struct ParseConfig {
    char delimiter = ',';
    std::string id_column = "event_id";  ///< optional; row numbers are used when absent
    std::string date_column = "accident_date";
    std::string sector_column = "sector";
    std::string loss_column = "total_loss";
    std::string date_pattern = "%Y-%m-%d";
};

struct ParseResult {
    std::vector<LossEvent> events;
    std::size_t dropped = 0;  ///< rows with unparseable date, bad sector code, or non-positive loss
};

/// Read delimited loss records. A header lacking the date, sector or loss
/// column is a ValidationError; bad rows are skipped and counted.
ParseResult parse_loss_records(std::istream& in, const ParseConfig& config = {});
void write_loss_records(std::ostream& out, std::span<const LossEvent> events, const ParseConfig& config = {});

std::vector<LossEvent> filter_window(std::span<const LossEvent> events, Date start, Date end);

/// Events partitioned by sector, each sector sorted by accident date.
class SectorPanel {
public:
    SectorPanel() = default;
    SectorPanel(std::vector<LossEvent> events, Window window);

    const Window& window() const { return window_; }
    const std::map<std::string, std::vector<LossEvent>>& sectors() const { return sectors_; }
    const std::vector<LossEvent>& sector(const std::string& code) const;
    std::vector<std::string> sector_codes() const;
    std::vector<LossEvent> all_events() const;

private:
    Window window_{};
    std::map<std::string, std::vector<LossEvent>> sectors_;
};

struct Quarter {
    int year = 0;
    int index = 1;  ///< 1..4, Q1 = Jan-Mar

    bool operator==(const Quarter&) const = default;
};

Quarter quarter_of(Date date);

struct QuarterlySeries {
    std::string sector;
    std::vector<Quarter> quarters;
    std::vector<double> aggregate;  ///< USD per quarter
    std::vector<std::int64_t> count;

    std::size_t size() const { return quarters.size(); }
    std::vector<double> counts_as_double() const;
};

/// Contiguous quarterly sums over the window; empty quarters are zero-filled.
QuarterlySeries aggregate_quarterly(std::span<const LossEvent> events, Window window, std::string sector = {});
void write_quarterly_csv(std::ostream& out, std::span<const QuarterlySeries> series);

/// Poisson MLE of the quarterly rate (the mean count).
double fit_poisson_rate(std::span<const std::int64_t> counts);

struct Contamination {
    std::size_t count = 0;     ///< number of largest losses per line to corrupt
    double multiplier = 1e3;
};

struct SyntheticLine {
    std::string sector_code;
    double frequency = 1.0;   ///< Poisson rate, events per quarter
    SeveritySource severity = ParetoSeverity{1.0, 1.0};
};

struct SyntheticSpec {
    std::vector<SyntheticLine> lines;
    std::optional<Contamination> contamination;
    std::optional<CopulaSpec> coupling;  ///< couples quarterly aggregates across lines
    std::size_t quarters = 124;
    int start_year = 1990;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Deterministic synthetic loss panel standing in for a proprietary feed.
SectorPanel generate_synthetic_panel(const SyntheticSpec& spec);

}  // namespace cyberrisk

#pragma once

#include "cyberrisk/copulas.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace cyberrisk {

class RandomStream;

struct ParetoSeverity {
    double alpha = 1.0;
    double x_min = 1.0;
};

struct LognormalSeverity {
    double mu = 0.0;
    double sigma = 1.0;
};

struct ConstantSeverity {
    double value = 1.0;
};

/// Resample historical losses with replacement.
struct EmpiricalSeverity {
    std::vector<double> values;
};

/// Empirical body below `threshold` spliced with a Pareto tail above it;
/// the tail is drawn with probability `tail_probability`.
struct SplicedSeverity {
    std::vector<double> body;
    double threshold = 1.0;
    double alpha = 1.0;
    double tail_probability = 0.1;
};

using SeveritySource =
    std::variant<ParetoSeverity, LognormalSeverity, ConstantSeverity, EmpiricalSeverity, SplicedSeverity>;

double draw_severity(const SeveritySource& source, RandomStream& rng);
void validate_severity(const SeveritySource& source);

struct LineModel {
    std::string label;
    double frequency = 0.0;  ///< Poisson events per period
    SeveritySource severity = ConstantSeverity{};
};

struct CompoundModel {
    std::vector<LineModel> lines;

    void validate() const;
};

/// J simulated periods for one line: event vectors, their sums, and a sorted
/// index over the sums for empirical CDF queries.
class AggregateTable {
public:
    AggregateTable(std::string label, std::vector<double> events, std::vector<std::size_t> offsets);

    const std::string& label() const { return label_; }
    std::size_t size() const { return aggregates_.size(); }
    double aggregate(std::size_t j) const { return aggregates_[j]; }
    std::span<const double> aggregates() const { return aggregates_; }
    std::span<const double> events(std::size_t j) const
    {
        return {events_.data() + offsets_[j], offsets_[j + 1] - offsets_[j]};
    }
    /// Scenario indices ordered by aggregate (ties by index).
    std::span<const std::uint32_t> order() const { return order_; }
    /// Empirical CDF of the aggregates evaluated at z.
    double cdf(double z) const;

private:
    std::string label_;
    std::vector<double> events_;
    std::vector<std::size_t> offsets_;
    std::vector<double> aggregates_;
    std::vector<std::uint32_t> order_;
};

/// Sum of an event vector in storage order; every aggregate in the engine is built this way.
double sum_events(std::span<const double> events);

AggregateTable simulate_marginal(const CompoundModel& model, std::size_t line, std::size_t scenarios,
                                 std::uint64_t seed);

/// Index of the smallest sorted scenario whose empirical CDF value is >= u.
std::size_t empirical_inverse(const AggregateTable& table, double u);

/// Coupled scenarios: for each scenario and line, `periods` independently
/// coupled draws from the line's table whose events are pooled (4 periods
/// turn quarterly tables into annual scenarios).
class JointScenarioSet {
public:
    JointScenarioSet(std::vector<std::shared_ptr<const AggregateTable>> tables, CopulaSpec copula,
                     std::size_t scenarios, std::size_t periods, std::vector<std::uint32_t> indices);

    std::size_t scenarios() const { return scenarios_; }
    std::size_t lines() const { return tables_.size(); }
    std::size_t periods() const { return periods_; }
    const CopulaSpec& copula() const { return copula_; }
    const AggregateTable& table(std::size_t line) const { return *tables_[line]; }

    /// Table row used by scenario s, line i, period p.
    std::uint32_t index(std::size_t s, std::size_t line, std::size_t period = 0) const
    {
        return indices_[(s * tables_.size() + line) * periods_ + period];
    }
    double aggregate(std::size_t s, std::size_t line) const;
    /// Aggregates of one line across all scenarios.
    std::vector<double> line_aggregates(std::size_t line) const;

    template <class F>
    void for_each_event(std::size_t s, std::size_t line, F&& f) const
    {
        for (std::size_t p = 0; p < periods_; ++p)
            for (double x : tables_[line]->events(index(s, line, p)))
                f(x);
    }

    /// Little-endian audit dump: line count, scenario count, periods, then per
    /// scenario and line the table indices (u64) and aggregate (f64).
    void write_binary(std::ostream& out) const;

private:
    std::vector<std::shared_ptr<const AggregateTable>> tables_;
    CopulaSpec copula_;
    std::size_t scenarios_;
    std::size_t periods_;
    std::vector<std::uint32_t> indices_;
};

JointScenarioSet couple_scenarios(std::vector<std::shared_ptr<const AggregateTable>> tables,
                                  const CopulaSpec& copula, std::size_t scenarios, std::uint64_t seed,
                                  std::size_t periods = 1);

/// Single-line scenario set using each table row once, in order (no coupling).
JointScenarioSet identity_scenarios(std::shared_ptr<const AggregateTable> table);

}  // namespace cyberrisk

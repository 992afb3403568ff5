#include "cyberrisk/compound_engine.hpp"

#include "cyberrisk/error.hpp"
#include "cyberrisk/parallel.hpp"
#include "cyberrisk/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <ostream>

namespace cyberrisk {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void write_u64(std::ostream& out, std::uint64_t v)
{
    char bytes[8];
    for (int i = 0; i < 8; ++i)
        bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(bytes, 8);
}

void write_f64(std::ostream& out, double v)
{
    std::uint64_t bits;
    static_assert(sizeof bits == sizeof v);
    std::memcpy(&bits, &v, sizeof v);
    write_u64(out, bits);
}

}  // namespace

double draw_severity(const SeveritySource& source, RandomStream& rng)
{
    return std::visit(
        overloaded{
            [&](const ParetoSeverity& s) { return rng.pareto(s.alpha, s.x_min); },
            [&](const LognormalSeverity& s) { return rng.lognormal(s.mu, s.sigma); },
            [&](const ConstantSeverity& s) { return s.value; },
            [&](const EmpiricalSeverity& s) { return s.values[rng.below(s.values.size())]; },
            [&](const SplicedSeverity& s) {
                if (s.body.empty() || rng.uniform() < s.tail_probability)
                    return rng.pareto(s.alpha, s.threshold);
                return s.body[rng.below(s.body.size())];
            },
        },
        source);
}

void validate_severity(const SeveritySource& source)
{
    std::visit(overloaded{
                   [](const ParetoSeverity& s) {
                       require(s.alpha > 0.0 && s.x_min > 0.0, "Pareto severity needs alpha > 0 and x_min > 0");
                   },
                   [](const LognormalSeverity& s) {
                       require(std::isfinite(s.mu) && s.sigma > 0.0, "lognormal severity needs sigma > 0");
                   },
                   [](const ConstantSeverity& s) { require(s.value > 0.0, "constant severity must be positive"); },
                   [](const EmpiricalSeverity& s) {
                       require(!s.values.empty(), "empirical severity has no values");
                       require(std::all_of(s.values.begin(), s.values.end(), [](double x) { return x > 0.0; }),
                               "empirical severity values must be positive");
                   },
                   [](const SplicedSeverity& s) {
                       require(s.alpha > 0.0 && s.threshold > 0.0, "spliced severity needs alpha > 0, threshold > 0");
                       require(s.tail_probability > 0.0 && s.tail_probability <= 1.0,
                               "spliced severity tail probability must lie in (0, 1]");
                       require(std::all_of(s.body.begin(), s.body.end(), [](double x) { return x > 0.0; }),
                               "spliced severity body values must be positive");
                   },
               },
               source);
}

void CompoundModel::validate() const
{
    require(!lines.empty(), "compound model has no lines");
    for (const auto& line : lines) {
        require(line.frequency >= 0.0 && std::isfinite(line.frequency),
                "line " + line.label + ": frequency must be finite and >= 0");
        validate_severity(line.severity);
    }
}

double sum_events(std::span<const double> events)
{
    double total = 0.0;
    for (double x : events)
        total += x;
    return total;
}

AggregateTable::AggregateTable(std::string label, std::vector<double> events, std::vector<std::size_t> offsets)
    : label_(std::move(label)), events_(std::move(events)), offsets_(std::move(offsets))
{
    require(offsets_.size() >= 2 && offsets_.front() == 0 && offsets_.back() == events_.size(),
            "aggregate table: inconsistent offsets");
    const std::size_t n = offsets_.size() - 1;
    require(n <= std::numeric_limits<std::uint32_t>::max(), "aggregate table: too many scenarios");
    aggregates_.resize(n);
    for (std::size_t j = 0; j < n; ++j)
        aggregates_[j] = sum_events(this->events(j));
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0u);
    std::stable_sort(order_.begin(), order_.end(),
                     [this](std::uint32_t a, std::uint32_t b) { return aggregates_[a] < aggregates_[b]; });
}

double AggregateTable::cdf(double z) const
{
    const auto it = std::upper_bound(order_.begin(), order_.end(), z,
                                     [this](double value, std::uint32_t j) { return value < aggregates_[j]; });
    return static_cast<double>(it - order_.begin()) / static_cast<double>(size());
}

AggregateTable simulate_marginal(const CompoundModel& model, std::size_t line, std::size_t scenarios,
                                 std::uint64_t seed)
{
    model.validate();
    require(line < model.lines.size(), "simulate_marginal: line index out of range");
    require(scenarios >= 1, "simulate_marginal: need at least one scenario");
    const LineModel& spec = model.lines[line];

    const std::size_t blocks = block_count(scenarios);
    std::vector<std::vector<double>> block_events(blocks);
    std::vector<std::vector<std::size_t>> block_counts(blocks);
    const RandomStream root(seed);
    parallel_for_blocks(blocks, [&](std::size_t b) {
        RandomStream rng = root.substream("marginal/" + spec.label, b);
        const std::size_t first = b * kScenarioBlock;
        const std::size_t last = std::min(scenarios, first + kScenarioBlock);
        auto& events = block_events[b];
        auto& counts = block_counts[b];
        counts.reserve(last - first);
        for (std::size_t j = first; j < last; ++j) {
            const auto n = static_cast<std::size_t>(rng.poisson(spec.frequency));
            counts.push_back(n);
            for (std::size_t k = 0; k < n; ++k)
                events.push_back(draw_severity(spec.severity, rng));
        }
    });

    std::vector<double> events;
    std::vector<std::size_t> offsets{0};
    offsets.reserve(scenarios + 1);
    for (std::size_t b = 0; b < blocks; ++b) {
        events.insert(events.end(), block_events[b].begin(), block_events[b].end());
        for (std::size_t n : block_counts[b])
            offsets.push_back(offsets.back() + n);
    }
    return AggregateTable(spec.label, std::move(events), std::move(offsets));
}

std::size_t empirical_inverse(const AggregateTable& table, double u)
{
    require(table.size() > 0, "empirical_inverse: empty table");
    require(u > 0.0 && u <= 1.0, "empirical_inverse: u must lie in (0, 1]");
    const auto n = table.size();
    auto rank = static_cast<std::size_t>(std::ceil(u * static_cast<double>(n)));
    rank = std::clamp<std::size_t>(rank, 1, n);
    return table.order()[rank - 1];
}

JointScenarioSet::JointScenarioSet(std::vector<std::shared_ptr<const AggregateTable>> tables, CopulaSpec copula,
                                   std::size_t scenarios, std::size_t periods, std::vector<std::uint32_t> indices)
    : tables_(std::move(tables)), copula_(std::move(copula)), scenarios_(scenarios), periods_(periods),
      indices_(std::move(indices))
{
    require(!tables_.empty(), "joint scenario set: no lines");
    require(periods_ >= 1, "joint scenario set: periods must be >= 1");
    require(indices_.size() == scenarios_ * tables_.size() * periods_, "joint scenario set: index size mismatch");
}

double JointScenarioSet::aggregate(std::size_t s, std::size_t line) const
{
    if (periods_ == 1)
        return tables_[line]->aggregate(index(s, line));
    double total = 0.0;
    for_each_event(s, line, [&](double x) { total += x; });
    return total;
}

std::vector<double> JointScenarioSet::line_aggregates(std::size_t line) const
{
    std::vector<double> out(scenarios_);
    for (std::size_t s = 0; s < scenarios_; ++s)
        out[s] = aggregate(s, line);
    return out;
}

void JointScenarioSet::write_binary(std::ostream& out) const
{
    write_u64(out, lines());
    write_u64(out, scenarios_);
    write_u64(out, periods_);
    for (std::size_t s = 0; s < scenarios_; ++s)
        for (std::size_t i = 0; i < lines(); ++i) {
            for (std::size_t p = 0; p < periods_; ++p)
                write_u64(out, index(s, i, p));
            write_f64(out, aggregate(s, i));
        }
}

JointScenarioSet couple_scenarios(std::vector<std::shared_ptr<const AggregateTable>> tables,
                                  const CopulaSpec& copula, std::size_t scenarios, std::uint64_t seed,
                                  std::size_t periods)
{
    require(!tables.empty(), "couple_scenarios: no tables");
    for (const auto& t : tables)
        require(t && t->size() > 0, "couple_scenarios: empty marginal table");
    copula.validate();
    require(copula.dimension == tables.size(), "couple_scenarios: copula dimension " +
                                                   std::to_string(copula.dimension) + " != number of lines " +
                                                   std::to_string(tables.size()));
    require(scenarios >= 1 && periods >= 1, "couple_scenarios: need at least one scenario and period");

    const std::size_t d = tables.size();
    std::vector<std::uint32_t> indices(scenarios * d * periods);
    const RandomStream root(seed);
    for (std::size_t p = 0; p < periods; ++p) {
        const Eigen::MatrixXd u = sample_copula(copula, scenarios, root.substream("coupling/period", p).seed());
        for (std::size_t s = 0; s < scenarios; ++s)
            for (std::size_t i = 0; i < d; ++i)
                indices[(s * d + i) * periods + p] =
                    static_cast<std::uint32_t>(empirical_inverse(*tables[i], u(static_cast<Eigen::Index>(s),
                                                                               static_cast<Eigen::Index>(i))));
    }
    return JointScenarioSet(std::move(tables), copula, scenarios, periods, std::move(indices));
}

JointScenarioSet identity_scenarios(std::shared_ptr<const AggregateTable> table)
{
    require(table && table->size() > 0, "identity_scenarios: empty table");
    const std::size_t n = table->size();
    std::vector<std::uint32_t> indices(n);
    std::iota(indices.begin(), indices.end(), 0u);
    return JointScenarioSet({std::move(table)}, CopulaSpec::independence(1), n, 1, std::move(indices));
}

}  // namespace cyberrisk

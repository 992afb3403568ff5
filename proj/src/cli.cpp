#include "cyberrisk/cli.hpp"

#include "cyberrisk/compound_engine.hpp"
#include "cyberrisk/copulas.hpp"
#include "cyberrisk/error.hpp"
#include "cyberrisk/extremal.hpp"
#include "cyberrisk/loss_data.hpp"
#include "cyberrisk/parallel.hpp"
#include "cyberrisk/pricing.hpp"
#include "cyberrisk/random.hpp"
#include "cyberrisk/robust_dependence.hpp"
#include "cyberrisk/statistics.hpp"
#include "cyberrisk/tail_index.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

namespace cyberrisk {

std::string settings_hash(const std::string& canonical)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical)));
    return buf;
}

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string num(double v)
{
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

/// Artifacts are staged in memory and written only once the command succeeded.
class Artifacts {
public:
    explicit Artifacts(std::string hash) : hash_(std::move(hash)) {}

    std::ostringstream& csv(const std::string& name)
    {
        auto& s = files_[name];
        s << "# settings_hash=" << hash_ << '\n';
        return s;
    }

    std::vector<std::string> commit(const fs::path& dir)
    {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec)
            throw ValidationError("cannot create output directory '" + dir.string() + "': " + ec.message());
        std::vector<std::string> written;
        for (const auto& [name, body] : files_) {
            const fs::path path = dir / name;
            std::ofstream f(path, std::ios::binary);
            if (!f)
                throw ValidationError("cannot write '" + path.string() + "'");
            f << body.str();
            written.push_back(path.string());
        }
        return written;
    }

private:
    std::string hash_;
    std::map<std::string, std::ostringstream> files_;
};

std::vector<std::string> split(const std::string& text, char sep)
{
    std::vector<std::string> parts;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, sep))
        if (!item.empty())
            parts.push_back(item);
    return parts;
}

double to_double(const std::string& s, const std::string& what)
{
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    require(r.ec == std::errc() && r.ptr == s.data() + s.size(), "invalid number '" + s + "' in " + what);
    return v;
}

std::size_t to_size(const std::string& s, const std::string& what)
{
    std::size_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    require(r.ec == std::errc() && r.ptr == s.data() + s.size(), "invalid count '" + s + "' in " + what);
    return v;
}

/// "a:b:step" or "a,b,c".
std::vector<std::size_t> size_grid(const std::string& text, const std::string& what)
{
    if (text.find(':') != std::string::npos) {
        const auto p = split(text, ':');
        require(p.size() == 3, what + ": range must be start:stop:step");
        const auto a = to_size(p[0], what), b = to_size(p[1], what), step = to_size(p[2], what);
        require(step > 0 && a <= b, what + ": need start <= stop and step > 0");
        std::vector<std::size_t> out;
        for (std::size_t v = a; v <= b; v += step)
            out.push_back(v);
        return out;
    }
    std::vector<std::size_t> out;
    for (const auto& s : split(text, ','))
        out.push_back(to_size(s, what));
    require(!out.empty(), what + ": empty grid");
    return out;
}

std::vector<double> real_grid(const std::string& text, const std::string& what)
{
    if (text.find(':') != std::string::npos) {
        const auto p = split(text, ':');
        require(p.size() == 3, what + ": range must be start:stop:step");
        const double a = to_double(p[0], what), b = to_double(p[1], what), step = to_double(p[2], what);
        require(step > 0.0 && a <= b, what + ": need start <= stop and step > 0");
        const auto count = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
        std::vector<double> out;
        for (std::size_t i = 0; i < count; ++i)
            out.push_back(a + static_cast<double>(i) * step);
        return out;
    }
    std::vector<double> out;
    for (const auto& s : split(text, ','))
        out.push_back(to_double(s, what));
    require(!out.empty(), what + ": empty grid");
    return out;
}

Date date_option(const std::string& text, const std::string& what)
{
    const auto d = parse_date(text);
    require(d.has_value(), what + ": expected YYYY-MM-DD, got '" + text + "'");
    return *d;
}

struct Dataset {
    SectorPanel panel;
    std::map<std::string, QuarterlySeries> quarterly;
};

Dataset load_dataset(const std::string& path, const std::string& start, const std::string& end)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ValidationError("cannot open input '" + path + "'");
    auto parsed = parse_loss_records(in);
    auto events = std::move(parsed.events);
    require(!events.empty(), "input '" + path + "' holds no valid loss records");

    Date lo = events.front().accident_date, hi = lo;
    for (const auto& e : events) {
        lo = std::min(lo, e.accident_date);
        hi = std::max(hi, e.accident_date);
    }
    using namespace std::chrono;
    const auto qlo = quarter_of(lo), qhi = quarter_of(hi);
    Window window{Date{year{qlo.year}, month{static_cast<unsigned>(qlo.index * 3 - 2)}, day{1}},
                  Date{sys_days{year{qhi.year} / month{static_cast<unsigned>(qhi.index * 3)} / last}}};
    if (!start.empty())
        window.start = date_option(start, "--start");
    if (!end.empty())
        window.end = date_option(end, "--end");
    require(window.start <= window.end, "--start is after --end");
    events = filter_window(events, window.start, window.end);
    require(!events.empty(), "no loss records inside the analysis window");

    Dataset d{SectorPanel(std::move(events), window), {}};
    for (const auto& code : d.panel.sector_codes())
        d.quarterly.emplace(code, aggregate_quarterly(d.panel.sector(code), window, code));
    return d;
}

/// Requested sectors, or the `top` sectors by event count (ties by code).
std::vector<std::string> pick_sectors(const Dataset& d, const std::vector<std::string>& requested, std::size_t top)
{
    if (!requested.empty()) {
        for (const auto& s : requested)
            require(d.panel.sectors().count(s) == 1, "sector '" + s + "' not present in the input");
        return requested;
    }
    auto codes = d.panel.sector_codes();
    std::stable_sort(codes.begin(), codes.end(), [&](const auto& a, const auto& b) {
        return d.panel.sector(a).size() > d.panel.sector(b).size();
    });
    if (top > 0 && codes.size() > top)
        codes.resize(top);
    return codes;
}

std::vector<double> losses_of(const std::vector<LossEvent>& events)
{
    std::vector<double> x;
    x.reserve(events.size());
    for (const auto& e : events)
        x.push_back(e.total_loss);
    return x;
}

Eigen::MatrixXd aggregate_matrix(const Dataset& d, const std::vector<std::string>& sectors)
{
    const auto& first = d.quarterly.at(sectors.front());
    Eigen::MatrixXd m(static_cast<Eigen::Index>(first.size()), static_cast<Eigen::Index>(sectors.size()));
    for (std::size_t j = 0; j < sectors.size(); ++j) {
        const auto& q = d.quarterly.at(sectors[j]);
        for (std::size_t t = 0; t < q.size(); ++t)
            m(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = q.aggregate[t];
    }
    return m;
}

std::string structure_label(const CopulaSpec& s, const std::vector<std::string>& names)
{
    std::string out;
    for (const auto& p : s.pairs)
        out += "(" + names[p.first] + " " + names[p.second] + ")";
    if (s.singleton)
        out += "[" + names[*s.singleton] + "]";
    return out;
}

// ---------------------------------------------------------------- options

struct Common {
    std::string input;
    std::string start;
    std::string end;
    std::vector<std::string> sectors;
    std::size_t top = 5;
};

void add_input_options(CLI::App* cmd, Common& c, bool with_sectors)
{
    cmd->add_option("--input,-i", c.input, "Normalized loss CSV (from ingest or synth)")->required();
    cmd->add_option("--start", c.start, "Analysis window start (YYYY-MM-DD)");
    cmd->add_option("--end", c.end, "Analysis window end (YYYY-MM-DD)");
    if (with_sectors) {
        cmd->add_option("--sectors", c.sectors, "Sector codes (default: largest sectors)")->delimiter(',');
        cmd->add_option("--top", c.top, "Number of largest sectors used when --sectors is absent");
    }
}

json common_json(const Common& c)
{
    return {{"input", fs::path(c.input).filename().string()}, {"start", c.start}, {"end", c.end},
            {"sectors", c.sectors}, {"top", c.top}};
}

struct SynthOptions {
    std::uint64_t seed = 7;
    std::size_t quarters = 124;
    std::size_t lines = 5;
    int start_year = 1990;
    double lambda = 4.0;
    std::string severity = "pareto";
    double alpha = 1.0;
    double xmin = 1e5;
    double mu = 12.0;
    double sigma = 2.0;
    std::size_t contaminate = 0;
    double multiplier = 1e3;
    std::string copula = "independence";
    double rho = 0.5;
    double theta = 2.0;
};

struct IngestOptions {
    std::string input;
    char delimiter = ',';
    std::string id_col = "event_id";
    std::string date_col = "accident_date";
    std::string sector_col = "sector";
    std::string loss_col = "total_loss";
    std::string date_format = "%Y-%m-%d";
    std::string start;
    std::string end;
};

struct TailfitOptions {
    Common common;
    std::vector<std::string> methods{"all"};
    std::size_t k = 0;
    std::size_t k0 = 5;
    std::size_t r = 2;
    double delta = 0.45;
    double xmin = 0.0;
    std::size_t min_events = 10;
};

struct SummaryOptions {
    Common common;
    std::size_t k_max = 500;
    double confidence = 0.95;
};

struct SweepOptions {
    Common common;
    std::string sector;
    std::string k0 = "0:60:5";
    std::string k = "20:200:20";
    bool premium = false;
    std::size_t J = 100000;
    double wealth = 1e9;
    double cover = 0.1;
    std::string utility = "log";
};

struct ExtremogramOptions {
    Common common;
    std::string levels = "0.01:0.99:0.01";
    std::size_t max_lag = kDefaultExtremogramMaxLag;
    std::string variant = "ratio";
    std::string series = "aggregate";
};

struct DependenceOptions {
    std::string method = "pearson";
    double trim = 0.1;
    double huber_k = 1.345;
    std::string psi = "huber";
    bool no_standardize = false;
    std::uint64_t mcd_budget = 1'000'000;
    std::size_t mcd_starts = 500;
    std::size_t mcd_steps = 20;
    double psd_floor = 0.0;
};

void add_dependence_options(CLI::App* cmd, DependenceOptions& o, const std::string& method_flag)
{
    cmd->add_option(method_flag, o.method, "pearson | ssd | quadrant | mcd" +
                                               std::string(method_flag == "--method" ? " | all" : ""));
    cmd->add_option("--trim", o.trim, "SSD trim fraction in [0, 0.5]");
    cmd->add_option("--huber-k", o.huber_k, "Huber cutoff");
    cmd->add_option("--psi", o.psi, "identity | huber");
    cmd->add_flag("--no-standardize", o.no_standardize, "Skip MAD standardization before psi");
    cmd->add_option("--mcd-budget", o.mcd_budget, "Exhaustive MCD search when C(n,h) is at most this");
    cmd->add_option("--mcd-starts", o.mcd_starts, "Random starts for MCD concentration");
    cmd->add_option("--mcd-steps", o.mcd_steps, "Concentration steps per start");
    cmd->add_option("--psd-floor", o.psd_floor, "Eigenvalue floor for PSD repair");
}

json dependence_json(const DependenceOptions& o)
{
    return {{"method", o.method},         {"trim", o.trim},          {"huber_k", o.huber_k},
            {"psi", o.psi},               {"standardize", !o.no_standardize}, {"mcd_budget", o.mcd_budget},
            {"mcd_starts", o.mcd_starts}, {"mcd_steps", o.mcd_steps}, {"psd_floor", o.psd_floor}};
}

RobustConfig robust_config(const DependenceOptions& o)
{
    RobustConfig c;
    c.trim_fraction = o.trim;
    c.huber_k = o.huber_k;
    require(o.psi == "huber" || o.psi == "identity", "--psi must be huber or identity");
    c.psi = o.psi == "huber" ? PsiKind::Huber : PsiKind::Identity;
    c.standardize = !o.no_standardize;
    c.validate();
    return c;
}

McdOptions mcd_options(const DependenceOptions& o, std::uint64_t seed)
{
    McdOptions m;
    m.exhaustive_budget = o.mcd_budget;
    m.starts = o.mcd_starts;
    m.concentration_steps = o.mcd_steps;
    m.seed = RandomStream(seed).substream("mcd").seed();
    return m;
}

struct CopulaOptions {
    Common common;
    std::vector<std::string> families;
};

struct PricingOptions {
    Common common;
    bool portfolio = false;
    std::string copula = "independence";
    DependenceOptions dependence;
    std::size_t J = 100000;
    std::size_t S = 1000000;
    double wealth = 0.0;
    double cover = 0.1;
    std::string utility = "log";
    double risk_aversion = 0.0;
    std::vector<double> weights;
    bool annual = false;
    bool aggregate_cap = false;
    double conditional_level = 0.0;
    double var_level = 0.99;
    std::size_t bootstrap = 0;
    double ci_level = 0.95;
};

void add_pricing_options(CLI::App* cmd, PricingOptions& o)
{
    add_input_options(cmd, o.common, true);
    cmd->add_option("--copula", o.copula, "independence | gaussian | structure");
    add_dependence_options(cmd, o.dependence, "--corr-method");
    cmd->add_option("--J", o.J, "Marginal scenarios per line");
    cmd->add_option("--S", o.S, "Coupled scenarios");
    cmd->add_option("--weights", o.weights, "Portfolio weights (default equal)")->delimiter(',');
    cmd->add_flag("--annual", o.annual, "Sum four independently coupled quarters");
    cmd->add_option("--bootstrap", o.bootstrap, "Bootstrap replicates over coupled scenarios (0 = none)");
    cmd->add_option("--ci-level", o.ci_level, "Bootstrap interval level");
}

json pricing_json(const PricingOptions& o)
{
    return {{"common", common_json(o.common)}, {"portfolio", o.portfolio},
            {"copula", o.copula},             {"dependence", dependence_json(o.dependence)},
            {"J", o.J},                       {"S", o.S},
            {"wealth", o.wealth},             {"cover", o.cover},
            {"utility", o.utility},           {"risk_aversion", o.risk_aversion},
            {"weights", o.weights},           {"annual", o.annual},
            {"aggregate_cap", o.aggregate_cap}, {"conditional_level", o.conditional_level},
            {"var_level", o.var_level},       {"bootstrap", o.bootstrap},
            {"ci_level", o.ci_level}};
}

// ---------------------------------------------------------------- commands

struct Context {
    std::uint64_t seed = 20240101;
    fs::path out_dir = ".";
    std::ostream* out = nullptr;
};

json finish(const std::string& command, const json& settings, Artifacts& art, const Context& ctx, json extra)
{
    extra["command"] = command;
    extra["settings_hash"] = settings_hash(settings.dump());
    extra["files"] = art.commit(ctx.out_dir);
    return extra;
}

const std::vector<std::string> kSyntheticSectors{"52", "51", "56", "54", "92", "11", "21", "22", "23", "31",
                                                 "42", "44", "48", "53", "55", "61", "62", "71", "72", "81"};

json cmd_synth(const SynthOptions& o, const Context& ctx)
{
    require(o.lines >= 1 && o.lines <= kSyntheticSectors.size(),
            "--lines must lie in [1, " + std::to_string(kSyntheticSectors.size()) + "]");
    require(o.quarters >= 1, "--quarters must be positive");
    require(o.copula == "independence" || o.copula == "gaussian", "--copula must be independence or gaussian");
    SyntheticSpec spec;
    spec.quarters = o.quarters;
    spec.start_year = o.start_year;
    spec.seed = o.seed;
    for (std::size_t i = 0; i < o.lines; ++i) {
        SyntheticLine line;
        line.sector_code = kSyntheticSectors[i];
        line.frequency = o.lambda;
        if (o.severity == "pareto")
            line.severity = ParetoSeverity{o.alpha, o.xmin};
        else if (o.severity == "lognormal")
            line.severity = LognormalSeverity{o.mu, o.sigma};
        else
            throw ValidationError("--severity must be pareto or lognormal");
        spec.lines.push_back(line);
    }
    if (o.contaminate > 0)
        spec.contamination = Contamination{o.contaminate, o.multiplier};
    if (o.copula == "gaussian" && o.lines >= 2) {
        Eigen::MatrixXd r = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(o.lines),
                                                      static_cast<Eigen::Index>(o.lines), o.rho);
        r.diagonal().setOnes();
        spec.coupling = CopulaSpec::gaussian(r);
    }
    spec.validate();

    const json settings{{"command", "synth"},       {"seed", o.seed},        {"quarters", o.quarters},
                        {"lines", o.lines},         {"start_year", o.start_year}, {"lambda", o.lambda},
                        {"severity", o.severity},   {"alpha", o.alpha},      {"xmin", o.xmin},
                        {"mu", o.mu},               {"sigma", o.sigma},      {"contaminate", o.contaminate},
                        {"multiplier", o.multiplier}, {"copula", o.copula},  {"rho", o.rho}};
    const auto panel = generate_synthetic_panel(spec);
    const auto events = panel.all_events();
    std::vector<QuarterlySeries> series;
    for (const auto& code : panel.sector_codes())
        series.push_back(aggregate_quarterly(panel.sector(code), panel.window(), code));

    Artifacts art(settings_hash(settings.dump()));
    write_loss_records(art.csv("events.csv"), events);
    write_quarterly_csv(art.csv("quarterly.csv"), series);
    return finish("synth", settings, art, ctx, {{"events", events.size()}, {"lines", o.lines}, {"quarters", o.quarters}});
}

json cmd_ingest(const IngestOptions& o, const Context& ctx)
{
    ParseConfig cfg;
    cfg.delimiter = o.delimiter;
    cfg.id_column = o.id_col;
    cfg.date_column = o.date_col;
    cfg.sector_column = o.sector_col;
    cfg.loss_column = o.loss_col;
    cfg.date_pattern = o.date_format;
    std::optional<Date> start, end;
    if (!o.start.empty())
        start = date_option(o.start, "--start");
    if (!o.end.empty())
        end = date_option(o.end, "--end");
    require(!start || !end || *start <= *end, "--start is after --end");

    std::ifstream in(o.input, std::ios::binary);
    if (!in)
        throw ValidationError("cannot open input '" + o.input + "'");
    auto parsed = parse_loss_records(in, cfg);
    auto events = std::move(parsed.events);
    const std::size_t parsed_count = events.size();
    if (start || end)
        events = filter_window(events, start.value_or(Date{std::chrono::year{1}, std::chrono::January, std::chrono::day{1}}),
                               end.value_or(Date{std::chrono::year{9999}, std::chrono::December, std::chrono::day{31}}));

    const json settings{{"command", "ingest"},  {"input", fs::path(o.input).filename().string()},
                        {"delimiter", std::string(1, o.delimiter)}, {"id_col", o.id_col},
                        {"date_col", o.date_col}, {"sector_col", o.sector_col}, {"loss_col", o.loss_col},
                        {"date_format", o.date_format}, {"start", o.start}, {"end", o.end}};
    Artifacts art(settings_hash(settings.dump()));
    std::stable_sort(events.begin(), events.end(), [](const LossEvent& a, const LossEvent& b) {
        return std::tie(a.sector_code, a.accident_date) < std::tie(b.sector_code, b.accident_date);
    });
    write_loss_records(art.csv("events.csv"), events);
    std::size_t sectors = 0;
    if (!events.empty()) {
        Date lo = events.front().accident_date, hi = lo;
        for (const auto& e : events) {
            lo = std::min(lo, e.accident_date);
            hi = std::max(hi, e.accident_date);
        }
        const Window w{start.value_or(lo), end.value_or(hi)};
        const SectorPanel panel(events, w);
        std::vector<QuarterlySeries> series;
        for (const auto& code : panel.sector_codes())
            series.push_back(aggregate_quarterly(panel.sector(code), w, code));
        sectors = series.size();
        write_quarterly_csv(art.csv("quarterly.csv"), series);
    }
    return finish("ingest", settings, art, ctx,
                  {{"events", events.size()},
                   {"dropped", parsed.dropped},
                   {"outside_window", parsed_count - events.size()},
                   {"sectors", sectors}});
}

json cmd_summary(const SummaryOptions& o, const Context& ctx)
{
    require(o.confidence > 0.0 && o.confidence < 1.0, "--confidence must lie in (0, 1)");
    require(o.k_max >= 3, "--k-max must be at least 3");
    const auto data = load_dataset(o.common.input, o.common.start, o.common.end);
    const json settings{{"command", "summary"}, {"common", common_json(o.common)}, {"k_max", o.k_max},
                        {"confidence", o.confidence}};
    Artifacts art(settings_hash(settings.dump()));
    auto& summary = art.csv("summary.csv");
    auto& hill = art.csv("hill_plot.csv");
    auto& qq = art.csv("pareto_qq.csv");
    summary << "sector,events,quarters,lambda_hat,total_loss,median_loss,max_loss,qq_slope,qq_intercept,qq_r_squared,"
               "smoothed_hill\n";
    hill << "sector,k,xi_hat,ci_low,ci_high\n";
    qq << "sector,theoretical,empirical\n";
    const auto sectors = pick_sectors(data, o.common.sectors, 0);
    for (const auto& code : sectors) {
        const auto x = losses_of(data.panel.sector(code));
        const auto& q = data.quarterly.at(code);
        const OrderedSample sample(x);
        double total = 0.0;
        for (double v : x)
            total += v;
        summary << code << ',' << x.size() << ',' << q.size() << ',' << num(fit_poisson_rate(q.count)) << ','
                << num(total) << ',' << num(stats::median(x)) << ',' << num(sample.descending(1)) << ',';
        if (x.size() >= 2) {
            const auto pts = pareto_qq(sample);
            const auto fit = fit_line(pts);
            summary << num(fit.slope) << ',' << num(fit.intercept) << ',' << num(fit.r_squared) << ',';
            for (const auto& p : pts)
                qq << code << ',' << num(p.theoretical) << ',' << num(p.empirical) << '\n';
        } else {
            summary << ",,,";
        }
        const std::size_t n = x.size();
        if (n >= 5) {
            const std::size_t k_max = std::min(o.k_max, n - 1);
            const std::size_t k_s = std::max<std::size_t>(2, (n - 1) / 4);
            if (2 * k_s < n)
                summary << num(smoothed_hill(sample, k_s, 2));
            for (const auto& p : hill_plot_data(sample, 2, k_max, o.confidence))
                hill << code << ',' << p.k << ',' << num(p.xi) << ',' << num(p.lower) << ',' << num(p.upper) << '\n';
        }
        summary << '\n';
    }
    return finish("summary", settings, art, ctx, {{"sectors", sectors.size()}});
}

std::vector<TailIndexEstimate> run_estimators(const std::vector<double>& x, const TailfitOptions& o,
                                              const std::vector<std::string>& methods)
{
    const OrderedSample sample(x);
    const std::size_t n = sample.size();
    const std::size_t k = o.k > 0 ? o.k : std::clamp<std::size_t>(n / 10, 2, n > 3 ? n - 2 : 2);
    const double x_min = o.xmin > 0.0 ? o.xmin : sample.ascending(1);
    std::vector<TailIndexEstimate> out;
    for (const auto& m : methods) {
        TailIndexEstimate e;
        e.method = m;
        try {
            if (m == "hill") {
                e = hill(sample, k);
            } else if (m == "smoothed_hill") {
                const double xi = smoothed_hill(sample, k, o.r);
                e.xi = xi;
                if (xi > 0.0)
                    e.alpha = 1.0 / xi;
                e.k = k;
            } else if (m == "trimmed_hill") {
                e = trimmed_hill_optimal(sample, o.k0, k);
            } else if (m == "mle" || m == "mle_unbiased") {
                const auto fit = mle_pareto(sample, x_min);
                e.alpha = m == "mle" ? fit.alpha : fit.alpha_unbiased;
                e.xi = 1.0 / *e.alpha;
                e.scale = x_min;
            } else if (m == "ls") {
                e = ls_estimator(sample);
            } else if (m == "wls") {
                e = wls_estimator(sample, x_min);
            } else if (m == "pm") {
                e = pm_estimator(sample);
            } else if (m == "mpm") {
                e = percentile_pair_estimator(sample, 0.1, 0.9);
                e.method = "mpm";
            } else if (m == "ecf") {
                const double scale = stats::median(x);
                std::vector<double> z(x.size());
                std::transform(x.begin(), x.end(), z.begin(), [scale](double v) { return v / scale; });
                EcfRegressionConfig cfg;
                cfg.delta = o.delta;
                const auto r = ecf_regression(z, cfg);
                e.alpha = r.alpha;
                if (r.alpha > 0.0)
                    e.xi = 1.0 / r.alpha;
                e.scale = scale;
                e.std_error = r.std_error;
            }
            e.method = m;
        } catch (const ComputationError&) {
            e = TailIndexEstimate{};
            e.method = m;
            e.flags |= kFlagDegenerate;
        }
        out.push_back(e);
    }
    return out;
}

const std::vector<std::string> kAllMethods{"hill", "smoothed_hill", "trimmed_hill", "mle", "mle_unbiased",
                                           "ls", "wls", "pm", "ecf"};
const std::vector<std::string> kKnownMethods{"hill", "smoothed_hill", "trimmed_hill", "mle", "mle_unbiased",
                                             "ls", "wls", "pm", "ecf", "mpm"};

json cmd_tailfit(const TailfitOptions& o, const Context& ctx)
{
    std::vector<std::string> methods;
    for (const auto& m : o.methods) {
        if (m == "all") {
            methods.insert(methods.end(), kAllMethods.begin(), kAllMethods.end());
            continue;
        }
        std::string name = m;
        std::replace(name.begin(), name.end(), '-', '_');
        require(std::find(kKnownMethods.begin(), kKnownMethods.end(), name) != kKnownMethods.end(),
                "unknown tail method '" + m + "'");
        methods.push_back(name);
    }
    require(o.r >= 2, "--r must be at least 2");
    require(o.delta > 0.0 && o.delta < 0.5, "--delta must lie in (0, 1/2)");
    const auto data = load_dataset(o.common.input, o.common.start, o.common.end);
    const json settings{{"command", "tailfit"}, {"common", common_json(o.common)}, {"methods", methods},
                        {"k", o.k},  {"k0", o.k0}, {"r", o.r}, {"delta", o.delta}, {"xmin", o.xmin},
                        {"min_events", o.min_events}};
    Artifacts art(settings_hash(settings.dump()));
    auto& csv = art.csv("tailfit.csv");
    bool header = true;
    std::size_t rows = 0;
    json skipped = json::array();
    for (const auto& code : pick_sectors(data, o.common.sectors, 0)) {
        const auto x = losses_of(data.panel.sector(code));
        if (x.size() < std::max<std::size_t>(o.min_events, 5)) {
            skipped.push_back(code);
            continue;
        }
        const auto est = run_estimators(x, o, methods);
        write_estimates_csv(csv, est, header, "sector", code);
        header = false;
        rows += est.size();
    }
    if (header)
        throw ComputationError("tailfit: no sector has at least " + std::to_string(o.min_events) + " events");
    return finish("tailfit", settings, art, ctx, {{"rows", rows}, {"skipped", skipped}});
}

/// Severity with an empirical body and a Pareto tail above X^(k+1).
SplicedSeverity splice(const OrderedSample& sample, std::size_t k, double xi)
{
    SplicedSeverity s;
    const std::size_t n = sample.size();
    s.threshold = sample.descending(k + 1);
    s.body.assign(sample.values().begin(), sample.values().begin() + static_cast<std::ptrdiff_t>(n - k));
    s.alpha = 1.0 / xi;
    s.tail_probability = static_cast<double>(k) / static_cast<double>(n);
    return s;
}

json cmd_trim_sweep(const SweepOptions& o, const Context& ctx)
{
    const auto k0s = size_grid(o.k0, "--k0");
    const auto ks = size_grid(o.k, "--k");
    UtilitySpec utility;
    utility.kind = parse_utility_kind(o.utility);
    utility.wealth = o.wealth;
    utility.validate();
    PolicyTerms terms;
    terms.cover_fraction = o.cover;
    terms.validate(1);
    require(o.J >= 1, "--J must be positive");

    const auto data = load_dataset(o.common.input, o.common.start, o.common.end);
    const std::string sector = o.sector.empty() ? pick_sectors(data, {}, 1).front() : o.sector;
    require(data.panel.sectors().count(sector) == 1, "sector '" + sector + "' not present in the input");
    const json settings{{"command", "trim-sweep"}, {"common", common_json(o.common)}, {"sector", sector},
                        {"k0", k0s}, {"k", ks}, {"premium", o.premium}, {"J", o.J},
                        {"wealth", o.wealth}, {"cover", o.cover}, {"utility", o.utility}, {"seed", ctx.seed}};
    const OrderedSample sample(losses_of(data.panel.sector(sector)));
    const auto grid = trimmed_hill_sweep(sample, k0s, ks);

    Artifacts art(settings_hash(settings.dump()));
    write_estimates_csv(art.csv("trim_sweep.csv"), grid, true, "sector", sector);
    std::size_t priced = 0;
    if (o.premium) {
        auto& csv = art.csv("trim_premiums.csv");
        csv << "sector,k0,k,xi_hat,premium,std_error\n";
        const double lambda = fit_poisson_rate(data.quarterly.at(sector).count);
        const auto seed = RandomStream(ctx.seed).substream("trim-sweep/marginal").seed();
        for (const auto& e : grid) {
            if (!e.xi || *e.xi <= 0.0)
                continue;
            CompoundModel model;
            model.lines.push_back({sector, lambda, splice(sample, *e.k, *e.xi)});
            auto table = std::make_shared<const AggregateTable>(simulate_marginal(model, 0, o.J, seed));
            const auto q = indifference_premium(identity_scenarios(table), utility, terms, PremiumMode::Line);
            csv << sector << ',' << *e.k0 << ',' << *e.k << ',' << num(*e.xi) << ',' << num(q.premium) << ','
                << num(q.std_error) << '\n';
            ++priced;
        }
    }
    std::size_t feasible = 0;
    for (const auto& e : grid)
        feasible += (e.flags & kFlagInfeasible) == 0;
    return finish("trim-sweep", settings, art, ctx,
                  {{"sector", sector}, {"cells", grid.size()}, {"feasible", feasible}, {"priced", priced}});
}

json cmd_extremogram(const ExtremogramOptions& o, const Context& ctx)
{
    const auto variant = parse_extremogram_variant(o.variant);
    const auto levels = real_grid(o.levels, "--levels");
    require(o.series == "aggregate" || o.series == "count", "--series must be aggregate or count");
    require(o.max_lag >= 1, "--max-lag must be positive");
    const auto data = load_dataset(o.common.input, o.common.start, o.common.end);
    const json settings{{"command", "extremogram"}, {"common", common_json(o.common)}, {"levels", levels},
                        {"max_lag", o.max_lag}, {"variant", o.variant}, {"series", o.series}};
    Artifacts art(settings_hash(settings.dump()));
    json empty_cells = json::object();
    const auto sectors = pick_sectors(data, o.common.sectors, 0);
    for (const auto& code : sectors) {
        const auto& q = data.quarterly.at(code);
        const auto x = o.series == "aggregate" ? q.aggregate : q.counts_as_double();
        const auto m = extremogram_matrix(x, levels, o.max_lag, variant);
        write_extremogram_csv(art.csv("extremogram_" + code + ".csv"), m);
        std::size_t empty = 0;
        for (const auto& row : m.cells)
            for (const auto& c : row)
                empty += !c.value.has_value();
        empty_cells[code] = empty;
    }
    return finish("extremogram", settings, art, ctx,
                  {{"sectors", sectors.size()}, {"levels", levels.size()}, {"max_lag", o.max_lag},
                   {"empty_cells", empty_cells}});
}

json cmd_corr(const Common& c, const DependenceOptions& o, const Context& ctx)
{
    std::vector<std::string> methods;
    if (o.method == "all")
        methods = {"pearson", "ssd", "quadrant", "mcd"};
    else
        methods = {to_string(parse_correlation_method(o.method))};
    const auto robust = robust_config(o);
    const auto data = load_dataset(c.input, c.start, c.end);
    const auto sectors = pick_sectors(data, c.sectors, c.top);
    require(sectors.size() >= 2, "corr: need at least two sectors");
    const json settings{{"command", "corr"}, {"common", common_json(c)}, {"dependence", dependence_json(o)},
                        {"seed", ctx.seed}};
    const auto panel = aggregate_matrix(data, sectors);
    Artifacts art(settings_hash(settings.dump()));
    auto& csv = art.csv("corr.csv");
    json repairs = json::object();
    bool header = true;
    for (const auto& m : methods) {
        const auto r = correlation_matrix(panel, parse_correlation_method(m), sectors, robust, mcd_options(o, ctx.seed));
        const auto psd = nearest_psd(r, o.psd_floor);
        write_correlation_csv(csv, r, sectors, m, header);
        if (psd.repaired)
            write_correlation_csv(csv, psd.matrix, sectors, m + "_psd", false);
        header = false;
        repairs[m] = {{"repaired", psd.repaired}, {"min_eigenvalue", psd.min_eigenvalue_before}};
    }
    return finish("corr", settings, art, ctx, {{"sectors", sectors}, {"psd", repairs}});
}

std::vector<CopulaFamily> families_from(const std::vector<std::string>& names)
{
    if (names.empty())
        return default_pair_families();
    std::vector<CopulaFamily> out;
    for (const auto& n : names) {
        const auto f = parse_copula_family(n);
        require(f != CopulaFamily::PairProduct, "pair-product is not a pair family");
        out.push_back(f);
    }
    return out;
}

json cmd_copula(const CopulaOptions& o, const Context& ctx)
{
    const auto families = families_from(o.families);
    const auto data = load_dataset(o.common.input, o.common.start, o.common.end);
    const auto sectors = pick_sectors(data, o.common.sectors, o.common.top);
    require(sectors.size() >= 2, "copula: need at least two sectors");
    std::vector<std::string> family_names;
    for (auto f : families)
        family_names.push_back(to_string(f));
    const json settings{{"command", "copula"}, {"common", common_json(o.common)}, {"families", family_names}};
    const auto panel = aggregate_matrix(data, sectors);
    const auto pseudo = pseudo_observations(panel);
    const auto ranked = select_structure(pseudo, families);

    Artifacts art(settings_hash(settings.dump()));
    auto& pairs = art.csv("copula_pairs.csv");
    pairs << "first,second,family,parameter,log_likelihood,aic,model_tau,empirical_tau,at_boundary,selected\n";
    const auto n = static_cast<std::size_t>(pseudo.rows());
    for (std::size_t i = 0; i < sectors.size(); ++i)
        for (std::size_t j = i + 1; j < sectors.size(); ++j) {
            const Eigen::VectorXd u = pseudo.col(static_cast<Eigen::Index>(i)), v = pseudo.col(static_cast<Eigen::Index>(j));
            const std::span<const double> su(u.data(), n), sv(v.data(), n);
            const auto report = fit_pair_copula(su, sv, families);
            const double emp_tau = kendall_tau(su, sv);
            for (const auto& f : report.candidates)
                pairs << sectors[i] << ',' << sectors[j] << ',' << to_string(f.family) << ',' << num(f.parameter)
                      << ',' << num(f.log_likelihood) << ',' << num(f.aic) << ',' << num(f.tau) << ','
                      << num(emp_tau) << ',' << (f.at_boundary ? 1 : 0) << ','
                      << (f.family == report.best.family ? 1 : 0) << '\n';
        }
    auto& structures = art.csv("copula_structures.csv");
    structures << "rank,structure,score\n";
    for (std::size_t r = 0; r < ranked.size(); ++r)
        structures << r + 1 << ',' << structure_label(ranked[r].structure, sectors) << ',' << num(ranked[r].score) << '\n';
    return finish("copula", settings, art, ctx,
                  {{"sectors", sectors},
                   {"structures", ranked.size()},
                   {"best", structure_label(ranked.front().structure, sectors)}});
}

struct ScenarioBundle {
    std::vector<std::string> sectors;
    std::unique_ptr<JointScenarioSet> scenarios;
    json info = json::object();
};

ScenarioBundle build_scenarios(const PricingOptions& o, const Context& ctx)
{
    const auto robust = robust_config(o.dependence);
    require(o.J >= 1 && o.S >= 1, "--J and --S must be positive");
    require(o.copula == "independence" || o.copula == "gaussian" || o.copula == "structure",
            "--copula must be independence, gaussian or structure");
    const auto method = parse_correlation_method(o.dependence.method);

    const auto data = load_dataset(o.common.input, o.common.start, o.common.end);
    ScenarioBundle b;
    b.sectors = pick_sectors(data, o.common.sectors, o.common.top);
    const std::size_t d = b.sectors.size();
    const RandomStream root(ctx.seed);

    CompoundModel model;
    for (const auto& code : b.sectors)
        model.lines.push_back({code, fit_poisson_rate(data.quarterly.at(code).count),
                               EmpiricalSeverity{losses_of(data.panel.sector(code))}});
    model.validate();

    CopulaSpec copula = CopulaSpec::independence(d);
    if (d >= 2 && o.copula == "gaussian") {
        const auto r = correlation_matrix(aggregate_matrix(data, b.sectors), method, b.sectors, robust,
                                          mcd_options(o.dependence, ctx.seed));
        const auto psd = nearest_psd(r, o.dependence.psd_floor);
        b.info["psd_repaired"] = psd.repaired;
        copula = CopulaSpec::gaussian(psd.matrix);
    } else if (d >= 2 && o.copula == "structure") {
        const auto ranked = select_structure(pseudo_observations(aggregate_matrix(data, b.sectors)),
                                             default_pair_families());
        copula = ranked.front().structure;
        b.info["structure"] = structure_label(copula, b.sectors);
    }

    std::vector<std::shared_ptr<const AggregateTable>> tables;
    for (std::size_t i = 0; i < d; ++i)
        tables.push_back(std::make_shared<const AggregateTable>(
            simulate_marginal(model, i, o.J, root.substream("price/marginal", i).seed())));
    b.scenarios = std::make_unique<JointScenarioSet>(
        couple_scenarios(tables, copula, o.S, root.substream("price/coupling").seed(), o.annual ? 4 : 1));
    return b;
}

json cmd_price(PricingOptions o, const Context& ctx)
{
    UtilitySpec utility;
    utility.kind = parse_utility_kind(o.utility);
    utility.wealth = o.wealth > 0.0 ? o.wealth : (o.portfolio ? 1e10 : 1e9);
    utility.risk_aversion = o.risk_aversion;
    utility.validate();
    require(o.conditional_level >= 0.0 && o.conditional_level < 1.0, "--conditional-level must lie in [0, 1)");
    require(o.bootstrap == 0 || o.bootstrap >= 100, "--bootstrap needs at least 100 replicates");
    require(o.ci_level > 0.0 && o.ci_level < 1.0, "--ci-level must lie in (0, 1)");
    PolicyTerms terms;
    terms.cover_fraction = o.cover;
    terms.weights = o.weights;
    terms.aggregate_cap = o.aggregate_cap;
    require(terms.cover_fraction > 0.0 && terms.cover_fraction <= 1.0, "--cover must lie in (0, 1]");

    json settings = pricing_json(o);
    settings["command"] = "price";
    settings["seed"] = ctx.seed;
    auto bundle = build_scenarios(o, ctx);
    const auto& set = *bundle.scenarios;
    terms.validate(set.lines());

    std::vector<PremiumQuote> quotes;
    const auto with_ci = [&](PremiumQuote q, const LossColumns& cols, const std::string& label) {
        if (o.bootstrap > 0) {
            const auto ci = bootstrap_ci(
                cols.total.size(),
                [&](std::span<const std::size_t> idx) { return solve_premium(cols.subset(idx), utility).premium; },
                o.bootstrap, o.ci_level, RandomStream(ctx.seed).substream("price/bootstrap/" + label).seed());
            q.ci_low = ci.low;
            q.ci_high = ci.high;
        }
        return q;
    };
    if (o.portfolio) {
        const auto cols = loss_columns(set, utility, terms, PremiumMode::Portfolio);
        auto q = solve_premium(cols, utility);
        q.mode = "portfolio";
        q.target = "portfolio";
        quotes.push_back(with_ci(q, cols, "portfolio"));
    } else {
        for (std::size_t i = 0; i < set.lines(); ++i) {
            const auto cols = loss_columns(set, utility, terms, PremiumMode::Line, i);
            auto q = solve_premium(cols, utility);
            q.mode = "line";
            q.target = bundle.sectors[i];
            quotes.push_back(with_ci(q, cols, "line/" + q.target));
            if (o.conditional_level > 0.0) {
                const auto rows = conditioning_set(set, i, o.conditional_level);
                if (rows.size() < kMinConditioningScenarios)
                    throw ComputationError("conditional premium: conditioning set for " + q.target + " holds " +
                                           std::to_string(rows.size()) + " scenarios (need at least " +
                                           std::to_string(kMinConditioningScenarios) + ")");
                const auto ccols = cols.subset(rows);
                auto c = solve_premium(ccols, utility);
                c.mode = "conditional";
                c.target = q.target;
                quotes.push_back(with_ci(c, ccols, "conditional/" + q.target));
            }
        }
    }
    const auto hash = settings_hash(settings.dump());
    Artifacts art(hash);
    write_quotes_csv(art.csv("price.csv"), quotes, hash);
    json list = json::array();
    for (const auto& q : quotes)
        list.push_back(to_json(q));
    json extra{{"quotes", list}, {"wealth", utility.wealth}, {"sectors", bundle.sectors}};
    extra.update(bundle.info);
    if (quotes.size() == 1) {
        extra["premium"] = quotes.front().premium;
        extra["std_error"] = quotes.front().std_error;
    }
    return finish("price", settings, art, ctx, extra);
}

json cmd_diversify(PricingOptions o, const Context& ctx)
{
    require(o.var_level > 0.0 && o.var_level < 1.0, "--level must lie in (0, 1)");
    require(o.bootstrap == 0 || o.bootstrap >= 100, "--bootstrap needs at least 100 replicates");
    json settings = pricing_json(o);
    settings["command"] = "diversify";
    settings["seed"] = ctx.seed;
    auto bundle = build_scenarios(o, ctx);
    const auto& set = *bundle.scenarios;
    std::vector<double> weights = o.weights;
    if (weights.empty())
        weights.assign(set.lines(), 1.0 / static_cast<double>(set.lines()));
    auto r = diversification_ratio(set, weights, o.var_level);
    if (o.bootstrap > 0) {
        const auto ci = bootstrap_ci(
            set.scenarios(),
            [&](std::span<const std::size_t> idx) { return diversification_ratio(set, weights, o.var_level, idx).ratio; },
            o.bootstrap, o.ci_level, RandomStream(ctx.seed).substream("diversify/bootstrap").seed());
        r.ci_low = ci.low;
        r.ci_high = ci.high;
    }
    const auto hash = settings_hash(settings.dump());
    Artifacts art(hash);
    auto& csv = art.csv("diversify.csv");
    csv << "level,ratio,portfolio_var";
    for (const auto& s : bundle.sectors)
        csv << ",var_" << s;
    csv << ",ci_low,ci_high,settings_hash\n";
    csv << num(r.level) << ',' << num(r.ratio) << ',' << num(r.portfolio_var);
    for (double v : r.line_vars)
        csv << ',' << num(v);
    csv << ',' << num(r.ci_low) << ',' << num(r.ci_high) << ',' << hash << '\n';
    json extra = to_json(r);
    extra["sectors"] = bundle.sectors;
    extra.update(bundle.info);
    return finish("diversify", settings, art, ctx, extra);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Cyber loss model-risk toolkit: tail indices, robust dependence, copulas, compound "
                 "Monte Carlo and zero-utility pricing"};
    app.set_config("--config", "", "TOML/INI file with one section per subcommand");
    app.require_subcommand(1);

    Context ctx;
    std::string out_dir = ".";
    std::size_t threads = 1;
    app.add_option("--seed", ctx.seed, "Master seed")->capture_default_str();
    app.add_option("--out,-o", out_dir, "Output directory")->envname("CYBERRISK_OUT")->capture_default_str();
    app.add_option("--threads", threads, "Worker threads (0 = all cores)")->capture_default_str();

    SynthOptions synth;
    auto* c_synth = app.add_subcommand("synth", "Generate a synthetic loss panel");
    c_synth->add_option("--seed", synth.seed, "Panel seed");
    c_synth->add_option("--quarters", synth.quarters, "Number of quarters");
    c_synth->add_option("--lines", synth.lines, "Number of sectors");
    c_synth->add_option("--start-year", synth.start_year, "First calendar year");
    c_synth->add_option("--lambda", synth.lambda, "Poisson events per quarter");
    c_synth->add_option("--severity", synth.severity, "pareto | lognormal");
    c_synth->add_option("--alpha", synth.alpha, "Pareto tail exponent");
    c_synth->add_option("--xmin", synth.xmin, "Pareto scale (USD)");
    c_synth->add_option("--mu", synth.mu, "Lognormal mu");
    c_synth->add_option("--sigma", synth.sigma, "Lognormal sigma");
    c_synth->add_option("--contaminate", synth.contaminate, "Largest losses per line to corrupt");
    c_synth->add_option("--multiplier", synth.multiplier, "Contamination multiplier");
    c_synth->add_option("--copula", synth.copula, "independence | gaussian");
    c_synth->add_option("--rho", synth.rho, "Equicorrelation of the Gaussian coupling");

    IngestOptions ingest;
    auto* c_ingest = app.add_subcommand("ingest", "Parse raw loss records into the normalized schema");
    c_ingest->add_option("--input,-i", ingest.input, "Delimited loss file")->required();
    c_ingest->add_option("--delimiter", ingest.delimiter, "Field delimiter");
    c_ingest->add_option("--id-col", ingest.id_col, "Identifier column (optional)");
    c_ingest->add_option("--date-col", ingest.date_col, "Accident date column");
    c_ingest->add_option("--sector-col", ingest.sector_col, "Sector code column");
    c_ingest->add_option("--loss-col", ingest.loss_col, "Total loss column");
    c_ingest->add_option("--date-format", ingest.date_format, "Date pattern using %Y %m %d");
    c_ingest->add_option("--start", ingest.start, "Window start (YYYY-MM-DD)");
    c_ingest->add_option("--end", ingest.end, "Window end (YYYY-MM-DD)");

    SummaryOptions summary;
    auto* c_summary = app.add_subcommand("summary", "Per-sector statistics, Hill plot and Pareto QQ data");
    add_input_options(c_summary, summary.common, true);
    c_summary->add_option("--k-max", summary.k_max, "Largest k in the Hill plot");
    c_summary->add_option("--confidence", summary.confidence, "Hill plot interval level");

    TailfitOptions tailfit;
    auto* c_tailfit = app.add_subcommand("tailfit", "Tail-index estimates per sector");
    add_input_options(c_tailfit, tailfit.common, true);
    c_tailfit->add_option("--method", tailfit.methods,
                          "hill, smoothed-hill, trimmed-hill, mle, mle-unbiased, ls, wls, pm, ecf, mpm or all")
        ->delimiter(',');
    c_tailfit->add_option("--k", tailfit.k, "Order statistics used (0 = n/10)");
    c_tailfit->add_option("--k0", tailfit.k0, "Trimmed top order statistics");
    c_tailfit->add_option("--r", tailfit.r, "Smoothing factor");
    c_tailfit->add_option("--delta", tailfit.delta, "ECF grid exponent");
    c_tailfit->add_option("--xmin", tailfit.xmin, "Pareto threshold for MLE/WLS (0 = sample minimum)");
    c_tailfit->add_option("--min-events", tailfit.min_events, "Skip sectors with fewer events");

    SweepOptions sweep;
    auto* c_sweep = app.add_subcommand("trim-sweep", "Trimmed Hill over a (k0, k) grid with optional premiums");
    add_input_options(c_sweep, sweep.common, false);
    c_sweep->add_option("--sector", sweep.sector, "Sector (default: largest)");
    c_sweep->add_option("--k0", sweep.k0, "k0 grid, start:stop:step or a,b,c");
    c_sweep->add_option("--k", sweep.k, "k grid, start:stop:step or a,b,c");
    c_sweep->add_flag("--premium", sweep.premium, "Price each cell with a spliced Pareto-tail severity");
    c_sweep->add_option("--J", sweep.J, "Marginal scenarios per cell");
    c_sweep->add_option("--wealth", sweep.wealth, "Wealth w (USD)");
    c_sweep->add_option("--cover", sweep.cover, "Cover fraction c");
    c_sweep->add_option("--utility", sweep.utility, "log | linear");

    ExtremogramOptions extremo;
    auto* c_extremo = app.add_subcommand("extremogram", "Sample extremogram matrix per sector");
    add_input_options(c_extremo, extremo.common, true);
    c_extremo->add_option("--levels", extremo.levels, "Quantile levels, start:stop:step or list");
    c_extremo->add_option("--max-lag", extremo.max_lag, "Largest lag in quarters");
    c_extremo->add_option("--variant", extremo.variant, "ratio | covariance");
    c_extremo->add_option("--series", extremo.series, "aggregate | count");

    Common corr_common;
    DependenceOptions corr;
    auto* c_corr = app.add_subcommand("corr", "Correlation matrices of quarterly aggregates");
    add_input_options(c_corr, corr_common, true);
    add_dependence_options(c_corr, corr, "--method");

    CopulaOptions copula;
    auto* c_copula = app.add_subcommand("copula", "Pair-copula fits and product-of-pairs structure ranking");
    add_input_options(c_copula, copula.common, true);
    c_copula->add_option("--families", copula.families, "Pair families to consider")->delimiter(',');

    PricingOptions price;
    auto* c_price = app.add_subcommand("price", "Zero-utility premiums on coupled compound scenarios");
    add_pricing_options(c_price, price);
    c_price->add_flag("--portfolio", price.portfolio, "Price the weighted portfolio instead of each line");
    c_price->add_option("--wealth", price.wealth, "Wealth w (0 = 1e9 per line, 1e10 portfolio)");
    c_price->add_option("--cover", price.cover, "Cover fraction c (events capped at c*w)");
    c_price->add_option("--utility", price.utility, "log | linear | exponential");
    c_price->add_option("--risk-aversion", price.risk_aversion, "Exponential utility coefficient");
    c_price->add_flag("--aggregate-cap", price.aggregate_cap, "Cap period totals instead of single events");
    c_price->add_option("--conditional-level", price.conditional_level,
                        "Also price each line given all others exceed this quantile (0 = off)");

    PricingOptions diversify;
    auto* c_div = app.add_subcommand("diversify", "VaR diversification ratio on coupled scenarios");
    add_pricing_options(c_div, diversify);
    c_div->add_option("--level", diversify.var_level, "VaR level");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return 1;
    }

    try {
        set_thread_count(threads);
        ctx.out_dir = out_dir;
        json result;
        if (c_synth->parsed())
            result = cmd_synth(synth, ctx);
        else if (c_ingest->parsed())
            result = cmd_ingest(ingest, ctx);
        else if (c_summary->parsed())
            result = cmd_summary(summary, ctx);
        else if (c_tailfit->parsed())
            result = cmd_tailfit(tailfit, ctx);
        else if (c_sweep->parsed())
            result = cmd_trim_sweep(sweep, ctx);
        else if (c_extremo->parsed())
            result = cmd_extremogram(extremo, ctx);
        else if (c_corr->parsed())
            result = cmd_corr(corr_common, corr, ctx);
        else if (c_copula->parsed())
            result = cmd_copula(copula, ctx);
        else if (c_price->parsed())
            result = cmd_price(price, ctx);
        else if (c_div->parsed())
            result = cmd_diversify(diversify, ctx);
        result["status"] = "ok";
        out << result.dump() << '\n';
        return 0;
    } catch (const ValidationError& e) {
        err << "invalid input: " << e.what() << '\n';
        out << json{{"status", "error"}, {"kind", "validation"}, {"message", e.what()}}.dump() << '\n';
        return 1;
    } catch (const ComputationError& e) {
        err << "computation failed: " << e.what() << '\n';
        out << json{{"status", "error"}, {"kind", "computation"}, {"message", e.what()}}.dump() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        out << json{{"status", "error"}, {"kind", "internal"}, {"message", e.what()}}.dump() << '\n';
        return 2;
    }
}

}  // namespace cyberrisk

#include "phaselab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "phaselab/coloring.hpp"
#include "phaselab/error.hpp"
#include "phaselab/mus.hpp"
#include "phaselab/stats.hpp"

namespace phaselab {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------- names

namespace {

const std::vector<std::pair<Measure, std::string>> kMeasureNames{
    {Measure::cost, "cost"},
    {Measure::solvable_fraction, "solvable_fraction"},
    {Measure::solution_counts, "solution_counts"},
    {Measure::multi_solution_fraction, "multi_solution_fraction"},
    {Measure::mus, "mus"},
    {Measure::cost_by_smallest_mus, "cost_by_smallest_mus"},
    {Measure::coloring, "coloring"},
};

std::string format_number(double x)
{
    if (x == 0.0)
        return "0";  // no "-0"
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

std::string exact_number(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string to_string(SearchStatus s)
{
    switch (s) {
    case SearchStatus::solution:
        return "solution";
    case SearchStatus::unsolvable:
        return "unsolvable";
    case SearchStatus::censored:
        return "censored";
    }
    return "?";
}

SearchStatus parse_status(const std::string& text)
{
    if (text == "solution")
        return SearchStatus::solution;
    if (text == "unsolvable")
        return SearchStatus::unsolvable;
    if (text == "censored")
        return SearchStatus::censored;
    throw InputError("unknown run status '" + text + "'");
}

std::uint64_t fnv1a(const std::string& text)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t axis_key(double axis)
{
    return static_cast<std::uint64_t>(std::llround(axis * 1000.0));
}

std::vector<double> range(double first, double last, double step)
{
    std::vector<double> out;
    for (int k = 0;; ++k) {
        const double x = first + k * step;
        if (x > last + 1e-9)
            break;
        out.push_back(std::round(x * 1000.0) / 1000.0);
    }
    return out;
}

} // namespace

std::string to_string(Measure measure)
{
    for (const auto& [m, name] : kMeasureNames)
        if (m == measure)
            return name;
    return "?";
}

Measure parse_measure(const std::string& text)
{
    for (const auto& [m, name] : kMeasureNames)
        if (name == text)
            return m;
    throw InputError("unknown measure '" + text + "'");
}

std::string to_string(SeriesKind kind)
{
    return kind == SeriesKind::csp ? "csp" : "coloring";
}

SeriesKind parse_series_kind(const std::string& text)
{
    if (text == "csp")
        return SeriesKind::csp;
    if (text == "coloring")
        return SeriesKind::coloring;
    throw InputError("unknown series kind '" + text + "'");
}

bool SeriesConfig::has(Measure m) const
{
    return std::find(measures.begin(), measures.end(), m) != measures.end();
}

// ------------------------------------------------------------- validation

void ExperimentConfig::validate() const
{
    if (!(scale > 0.0))
        throw InputError("scale must be positive");
    if (wall_time_cap < 0.0)
        throw InputError("wall-time cap must be non-negative");
    if (max_attempts == 0)
        throw InputError("max_attempts must be positive");
    if (series.empty())
        throw InputError("experiment has no series");
    std::vector<std::string> names;
    for (const auto& s : series) {
        if (s.name.empty() || s.name.find_first_of("/\\ ,") != std::string::npos)
            throw InputError("series name must be non-empty without '/', spaces or commas");
        names.push_back(s.name);
        if (s.axis.empty())
            throw InputError("series '" + s.name + "' has no axis values");
        if (s.samples < 1 || s.runs < 1)
            throw InputError("series '" + s.name + "' needs at least one sample and one run");
        if (s.kind == SeriesKind::coloring) {
            if (s.n < 1)
                throw InputError("coloring series needs at least one node");
            Rng probe(0);
            for (double g : s.axis)
                if (s.n <= 2000)
                    random_graph(s.n, g, probe);  // validates the edge count
            continue;
        }
        if (s.has(Measure::coloring))
            throw InputError("coloring measure needs a coloring series");
        if ((s.has(Measure::mus) || s.has(Measure::cost_by_smallest_mus)) && s.n > kMaxLatticeVariables)
            throw InputError("MUS measures need at most 20 variables");
        if ((s.has(Measure::cost) || s.has(Measure::cost_by_smallest_mus)) && s.solvers.empty())
            throw InputError("series '" + s.name + "' measures cost without a solver");
        for (double m : s.axis) {
            if (m != std::floor(m))
                throw InputError("nogood counts must be integers");
            GenSpec spec{{s.n, s.d, static_cast<int>(m)}, s.predicate, s.method, max_attempts, 0, swap_budget};
            spec.validate();
        }
    }
    std::sort(names.begin(), names.end());
    if (std::adjacent_find(names.begin(), names.end()) != names.end())
        throw InputError("duplicate series name");
}

std::vector<const SeriesConfig*> ExperimentConfig::active_series() const
{
    std::vector<const SeriesConfig*> out;
    for (const auto& s : series)
        if (include_long || !s.long_running)
            out.push_back(&s);
    return out;
}

// ---------------------------------------------------------------- presets

std::vector<std::string> preset_names()
{
    return {"fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9"};
}

ExperimentConfig preset_config(const std::string& preset, double scale)
{
    if (!(scale > 0.0))
        throw InputError("scale must be positive");
    ExperimentConfig c;
    c.preset = preset;
    c.scale = scale;
    auto scaled = [scale](double full) { return std::max(1, static_cast<int>(std::lround(full * scale))); };

    auto csp = [&](std::string name, int n, std::vector<double> axis, Predicate pred, GenMethod method,
                   std::vector<SolverKind> solvers, std::vector<Measure> measures, double full_samples = 1000,
                   double full_runs = 100) {
        SeriesConfig s;
        s.name = std::move(name);
        s.n = n;
        s.axis = std::move(axis);
        s.predicate = pred;
        s.method = method;
        s.solvers = std::move(solvers);
        s.measures = std::move(measures);
        s.samples = scaled(full_samples);
        s.runs = scaled(full_runs);
        return s;
    };
    const auto dyn = std::vector<SolverKind>{SolverKind::dynamic};
    const auto both = std::vector<SolverKind>{SolverKind::chronological, SolverKind::dynamic};
    const auto gs = GenMethod::generate_select;
    const auto hc = GenMethod::hill_climb;

    if (preset == "fig1") {
        c.series.push_back(csp("all", 10, range(10, 140, 10), Predicate::any(), gs, dyn,
                               {Measure::cost, Measure::solvable_fraction}));
    } else if (preset == "fig2") {
        for (int n : {10, 20}) {
            const auto axis = range(n, 14 * n, n);
            const std::string tag = "-n" + std::to_string(n);
            auto sol = csp("solvable" + tag, n, axis, Predicate::solvable(), gs, dyn, {Measure::cost});
            auto uns = csp("unsolvable" + tag, n, axis, Predicate::unsolvable(), gs, dyn, {Measure::cost});
            for (auto* s : {&sol, &uns}) {
                s->axis_per_variable = true;
                s->long_running = n == 20;
                c.series.push_back(*s);
            }
        }
        auto hill = csp("hillclimb-unsolvable-n10", 10, range(10, 70, 10), Predicate::unsolvable(), hc, dyn,
                        {Measure::cost});
        hill.axis_per_variable = true;
        c.series.push_back(hill);
    } else if (preset == "fig3") {
        SeriesConfig s;
        s.name = "graphs-100";
        s.kind = SeriesKind::coloring;
        s.n = 100;
        s.d = 3;
        s.axis = range(1.0, 8.0, 0.5);
        s.solvers.clear();
        s.measures = {Measure::coloring};
        s.samples = scaled(100'000);
        s.runs = 1;
        c.series.push_back(s);
    } else if (preset == "fig4") {
        c.series.push_back(csp("solvable", 10, range(10, 140, 10), Predicate::solvable(), gs, {},
                               {Measure::solution_counts}));
    } else if (preset == "fig5") {
        for (int n : {10, 20}) {
            auto s = csp("solvable-n" + std::to_string(n), n, range(n, 14 * n, n), Predicate::solvable(), gs, {},
                         {Measure::multi_solution_fraction});
            s.axis_per_variable = true;
            s.long_running = n == 20;
            c.series.push_back(s);
        }
    } else if (preset == "fig6") {
        c.series.push_back(csp("one-solution-gs", 10, range(30, 140, 10), Predicate::exactly(1), gs, dyn,
                               {Measure::cost}));
        c.series.push_back(csp("one-solution-hc", 10, range(20, 140, 10), Predicate::exactly(1), hc, dyn,
                               {Measure::cost}));
    } else if (preset == "fig7") {
        c.series.push_back(csp("unsolvable-gs", 10, range(40, 140, 10), Predicate::unsolvable(), gs, both,
                               {Measure::cost}));
        c.series.push_back(csp("unsolvable-hc", 10, range(10, 70, 10), Predicate::unsolvable(), hc, both,
                               {Measure::cost}));
    } else if (preset == "fig8") {
        c.series.push_back(csp("unsolvable-gs", 10, range(40, 140, 10), Predicate::unsolvable(), gs, {},
                               {Measure::mus}));
        c.series.push_back(csp("unsolvable-hc", 10, range(10, 70, 10), Predicate::unsolvable(), hc, {},
                               {Measure::mus}));
    } else if (preset == "fig9") {
        c.series.push_back(csp("unsolvable-gs-m60", 10, {60}, Predicate::unsolvable(), gs, dyn,
                               {Measure::cost_by_smallest_mus}));
    } else {
        throw InputError("unknown preset '" + preset + "' (expected fig1 .. fig9)");
    }
    return c;
}

// ------------------------------------------------------------------- JSON

namespace {

json series_to_json(const SeriesConfig& s)
{
    json j;
    j["name"] = s.name;
    j["kind"] = to_string(s.kind);
    j["n"] = s.n;
    j["d"] = s.d;
    j["axis"] = s.axis;
    j["axis_per_variable"] = s.axis_per_variable;
    j["method"] = to_string(s.method);
    j["predicate"] = to_string(s.predicate);
    std::vector<std::string> solvers;
    for (auto k : s.solvers)
        solvers.push_back(to_string(k));
    j["solvers"] = solvers;
    std::vector<std::string> measures;
    for (auto m : s.measures)
        measures.push_back(to_string(m));
    j["measures"] = measures;
    j["samples"] = s.samples;
    j["runs"] = s.runs;
    j["long_running"] = s.long_running;
    return j;
}

SeriesConfig series_from_json(const json& j)
{
    SeriesConfig s;
    s.name = j.at("name").get<std::string>();
    if (j.contains("kind"))
        s.kind = parse_series_kind(j["kind"].get<std::string>());
    s.n = j.value("n", s.n);
    s.d = j.value("d", s.d);
    s.axis = j.at("axis").get<std::vector<double>>();
    s.axis_per_variable = j.value("axis_per_variable", false);
    if (j.contains("method"))
        s.method = parse_method(j["method"].get<std::string>());
    if (j.contains("predicate"))
        s.predicate = parse_predicate(j["predicate"].get<std::string>());
    if (j.contains("solvers")) {
        s.solvers.clear();
        for (const auto& name : j["solvers"])
            s.solvers.push_back(parse_solver(name.get<std::string>()));
    }
    if (j.contains("measures")) {
        s.measures.clear();
        for (const auto& name : j["measures"])
            s.measures.push_back(parse_measure(name.get<std::string>()));
    }
    s.samples = j.value("samples", s.samples);
    s.runs = j.value("runs", s.runs);
    s.long_running = j.value("long_running", false);
    return s;
}

json config_json(const ExperimentConfig& c)
{
    json j;
    j["preset"] = c.preset;
    j["scale"] = c.scale;
    j["seed"] = c.base_seed;
    j["aggregate"] = c.aggregate == Aggregate::median ? "median" : "mean";
    j["node_cap"] = c.node_cap;
    j["max_attempts"] = c.max_attempts;
    j["swap_budget"] = c.swap_budget;
    j["wall_time_cap"] = c.wall_time_cap;
    j["include_long"] = c.include_long;
    json series = json::array();
    for (const auto& s : c.series)
        series.push_back(series_to_json(s));
    j["series"] = series;
    return j;
}

} // namespace

std::string config_to_json(const ExperimentConfig& config)
{
    return config_json(config).dump(2) + "\n";
}

ExperimentConfig config_from_json(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw InputError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object())
        throw InputError("config must be a JSON object");
    static const std::vector<std::string> known{"preset", "scale", "seed", "aggregate", "node_cap",
                                                "max_attempts", "swap_budget", "wall_time_cap",
                                                "include_long", "series", "paper_scale", "workers", "out"};
    for (const auto& [key, value] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw InputError("unknown config key '" + key + "'");
    try {
        double scale = j.value("scale", 0.1);
        if (j.value("paper_scale", false))
            scale = 1.0;
        const std::string preset = j.value("preset", std::string("custom"));
        ExperimentConfig c;
        if (preset != "custom")
            c = preset_config(preset, scale);
        c.preset = preset;
        c.scale = scale;
        c.base_seed = j.value("seed", c.base_seed);
        if (j.contains("aggregate")) {
            const auto a = j["aggregate"].get<std::string>();
            if (a != "median" && a != "mean")
                throw InputError("aggregate must be median or mean");
            c.aggregate = a == "median" ? Aggregate::median : Aggregate::mean;
        }
        c.node_cap = j.value("node_cap", c.node_cap);
        c.max_attempts = j.value("max_attempts", c.max_attempts);
        c.swap_budget = j.value("swap_budget", c.swap_budget);
        c.wall_time_cap = j.value("wall_time_cap", c.wall_time_cap);
        c.include_long = j.value("include_long", c.include_long);
        if (j.contains("series")) {
            c.series.clear();
            for (const auto& s : j["series"])
                c.series.push_back(series_from_json(s));
        }
        return c;
    } catch (const json::exception& e) {
        throw InputError(std::string("bad config value: ") + e.what());
    }
}

// ------------------------------------------------------------------ seeds

std::uint64_t point_gen_seed(const ExperimentConfig& config, const SeriesConfig& series, double axis)
{
    return derive_seed(derive_seed(config.base_seed, fnv1a(series.name)), 1, axis_key(axis));
}

std::uint64_t point_solve_seed(const ExperimentConfig& config, const SeriesConfig& series, double axis)
{
    return derive_seed(derive_seed(config.base_seed, fnv1a(series.name)), 2, axis_key(axis));
}

int default_workers()
{
    if (const char* env = std::getenv("PHASE_LAB_WORKERS")) {
        char* end = nullptr;
        const long w = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && w >= 1 && w <= 1024)
            return static_cast<int>(w);
        throw InputError("PHASE_LAB_WORKERS must be an integer in 1..1024");
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

// ------------------------------------------------------------ computation

namespace {

struct InstanceResult {
    bool ok = false;
    std::uint64_t attempts = 0;
    ProblemRecord record;
    std::vector<RunRecord> runs;
    std::exception_ptr error;
};

std::string point_label(const SeriesConfig& series, double axis)
{
    char buf[64];
    if (series.kind == SeriesKind::csp)
        std::snprintf(buf, sizeof buf, "m%03d", static_cast<int>(axis));
    else
        std::snprintf(buf, sizeof buf, "g%.3f", axis);
    return buf;
}

std::string instance_name(const SeriesConfig& series, int id)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, series.kind == SeriesKind::csp ? "p%04d.csp" : "g%04d.graph", id);
    return buf;
}

InstanceResult compute_csp_instance(const ExperimentConfig& config, const SeriesConfig& series, int m, int id,
                                    std::uint64_t gen_seed, std::uint64_t solve_seed, const std::string& dir)
{
    InstanceResult out;
    GenSpec spec{{series.n, series.d, m}, series.predicate, series.method, config.max_attempts,
                 derive_seed(gen_seed, static_cast<std::uint64_t>(id)), config.swap_budget};
    GenResult gen;
    try {
        gen = generate_with_predicate(spec);
    } catch (const ExhaustionError& e) {
        out.attempts = e.attempts();
        return out;
    }
    out.ok = true;
    out.attempts = gen.attempts;
    const Problem& p = gen.problem;
    auto& r = out.record;
    r.id = id;
    r.seed = spec.seed;
    r.attempts = gen.attempts;
    r.size = static_cast<int>(p.size());

    if (series.has(Measure::solution_counts)) {
        const auto count = count_solutions(p);
        r.solutions = count.count;
    } else if (series.has(Measure::multi_solution_fraction)) {
        const auto count = count_solutions(p, 2);
        r.solutions = count.count;
        r.solutions_capped = count.capped;
    }
    r.solvable = r.solutions ? *r.solutions > 0 : is_solvable(p);

    if (series.has(Measure::mus) || series.has(Measure::cost_by_smallest_mus)) {
        const auto report = enumerate_mus(p);
        r.mus_count = static_cast<int>(report.count);
        if (report.smallest_size)
            r.smallest_mus = *report.smallest_size;
        std::string sizes;
        for (auto s : report.mus_list) {
            if (!sizes.empty())
                sizes += ';';
            sizes += std::to_string(std::popcount(s));
        }
        r.mus_sizes = sizes;
    }

    if (series.has(Measure::cost) || series.has(Measure::cost_by_smallest_mus)) {
        for (auto solver : series.solvers) {
            for (int run = 0; run < series.runs; ++run) {
                const auto seed = run_seed(solve_seed, static_cast<std::uint64_t>(id), static_cast<std::uint64_t>(run));
                const auto res = solve_once(p, solver, seed, {config.node_cap});
                out.runs.push_back({id, solver, run, seed, res.nodes, res.status});
            }
        }
    }
    if (!dir.empty())
        save_problem((fs::path(dir) / instance_name(series, id)).string(), p);
    return out;
}

InstanceResult compute_graph_instance(const ExperimentConfig& config, const SeriesConfig& series, double gamma,
                                      int id, std::uint64_t gen_seed, std::uint64_t solve_seed,
                                      const std::string& dir)
{
    InstanceResult out;
    out.ok = true;
    out.attempts = 1;
    auto& r = out.record;
    r.id = id;
    r.seed = derive_seed(gen_seed, static_cast<std::uint64_t>(id));
    r.attempts = 1;
    Rng rng(r.seed);
    const Graph g = random_graph(series.n, gamma, rng);
    r.size = static_cast<int>(g.edge_count());
    r.connected = is_connected(g);
    for (int run = 0; run < series.runs; ++run) {
        const auto seed = run_seed(solve_seed, static_cast<std::uint64_t>(id), static_cast<std::uint64_t>(run));
        const auto res = brelaz_backtrack(g, seed, {config.node_cap});
        // Stored under the dynamic tag; coloring series have one search.
        out.runs.push_back({id, SolverKind::dynamic, run, seed, res.nodes, res.status});
        if (res.status == SearchStatus::solution)
            r.solvable = true;
        else if (res.status == SearchStatus::unsolvable)
            r.solvable = false;
    }
    if (!dir.empty())
        save_graph((fs::path(dir) / instance_name(series, id)).string(), g);
    return out;
}

} // namespace

PointData compute_point(const ExperimentConfig& config, const SeriesConfig& series, double axis, int workers,
                        const std::string& instance_dir)
{
    workers = std::max(1, workers);
    PointData point;
    point.series = series.name;
    point.axis = axis;
    point.target = series.samples;
    point.gen_seed = point_gen_seed(config, series, axis);
    point.solve_seed = point_solve_seed(config, series, axis);
    if (!instance_dir.empty())
        fs::create_directories(instance_dir);

    const auto started = std::chrono::steady_clock::now();
    const int batch = workers * 4;
    for (int start = 0; start < series.samples; start += batch) {
        const int end = std::min(series.samples, start + batch);
        std::vector<InstanceResult> slots(static_cast<std::size_t>(end - start));
        std::atomic<int> next{start};
        auto work = [&] {
            for (int id = next++; id < end; id = next++) {
                auto& slot = slots[static_cast<std::size_t>(id - start)];
                try {
                    slot = series.kind == SeriesKind::csp
                               ? compute_csp_instance(config, series, static_cast<int>(axis), id, point.gen_seed,
                                                      point.solve_seed, instance_dir)
                               : compute_graph_instance(config, series, axis, id, point.gen_seed, point.solve_seed,
                                                        instance_dir);
                } catch (...) {
                    slot.error = std::current_exception();
                }
            }
        };
        const int threads = std::min(workers, end - start);
        if (threads <= 1) {
            work();
        } else {
            std::vector<std::thread> pool;
            for (int t = 0; t < threads; ++t)
                pool.emplace_back(work);
            for (auto& t : pool)
                t.join();
        }
        for (auto& slot : slots) {
            if (slot.error)
                std::rethrow_exception(slot.error);
            point.attempts += slot.attempts;
            if (!slot.ok) {
                // Later instances are dropped so the result never depends on
                // the batch size.
                point.complete = false;
                point.note = "generation budget exhausted at problem " + std::to_string(point.problems.size());
                return point;
            }
            point.problems.push_back(std::move(slot.record));
            point.runs.insert(point.runs.end(), slot.runs.begin(), slot.runs.end());
        }
        if (config.wall_time_cap > 0.0 && end < series.samples) {
            const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
            if (elapsed > config.wall_time_cap) {
                point.complete = false;
                point.note = "wall-time cap reached";
                return point;
            }
        }
    }
    return point;
}

// ------------------------------------------------------------- statistics

namespace {

ResultRow make_row(double axis, std::size_t n, std::string statistic, double value, Interval ci,
                   std::uint64_t censored, std::uint64_t attempts)
{
    return ResultRow{axis, n, std::move(statistic), value, ci.lo, ci.hi, censored, attempts};
}

void add_cost_rows(std::vector<ResultRow>& rows, double axis, const std::vector<double>& costs,
                   std::uint64_t censored, std::uint64_t attempts, const std::string& suffix)
{
    const auto med = median_with_ci(costs);
    const auto mean = mean_with_ci(costs);
    rows.push_back(make_row(axis, costs.size(), "median_cost" + suffix, med.median, med.ci, censored, attempts));
    rows.push_back(make_row(axis, costs.size(), "mean_cost" + suffix, mean.mean, mean.ci, censored, attempts));
}

void add_fraction_row(std::vector<ResultRow>& rows, double axis, const std::string& name, std::uint64_t hits,
                      std::uint64_t n, std::uint64_t censored, std::uint64_t attempts)
{
    if (n == 0)
        return;
    const auto f = fraction_with_ci(hits, n);
    rows.push_back(make_row(axis, n, name, f.f, f.ci, censored, attempts));
}

/// Per-problem aggregated cost for one solver, in problem order.
std::vector<double> problem_costs(const PointData& point, SolverKind solver, Aggregate aggregate,
                                  std::uint64_t& censored)
{
    std::map<int, std::vector<std::uint64_t>> nodes;
    std::map<int, int> cens;
    for (const auto& r : point.runs) {
        if (r.solver != solver)
            continue;
        nodes[r.problem].push_back(r.nodes);
        cens[r.problem] += r.status == SearchStatus::censored ? 1 : 0;
    }
    std::vector<double> out;
    censored = 0;
    for (const auto& p : point.problems) {
        auto it = nodes.find(p.id);
        if (it == nodes.end())
            continue;
        censored += static_cast<std::uint64_t>(cens[p.id]);
        out.push_back(aggregate_costs(it->second, cens[p.id], p.solvable.value_or(false), aggregate).cost);
    }
    return out;
}

} // namespace

std::vector<ResultRow> summarize_point(const ExperimentConfig& config, const SeriesConfig& series,
                                       const PointData& point)
{
    const double axis = series.axis_per_variable ? point.axis / series.n : point.axis;
    const std::size_t n = point.problems.size();
    const auto attempts = point.attempts;
    std::vector<ResultRow> rows;
    rows.push_back(make_row(axis, n, "problems", static_cast<double>(n), {static_cast<double>(n), static_cast<double>(n)},
                            0, attempts));
    if (n == 0)
        return rows;

    if (series.kind == SeriesKind::coloring) {
        std::uint64_t censored = 0;
        std::vector<double> all;
        std::vector<double> colorable_costs;
        std::vector<double> uncolorable_costs;
        std::uint64_t colorable = 0;
        std::uint64_t known = 0;
        std::uint64_t connected = 0;
        const auto costs = problem_costs(point, SolverKind::dynamic, config.aggregate, censored);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& p = point.problems[i];
            connected += p.connected.value_or(false) ? 1 : 0;
            if (p.solvable) {
                ++known;
                colorable += *p.solvable ? 1 : 0;
                (*p.solvable ? colorable_costs : uncolorable_costs).push_back(costs[i]);
            }
        }
        add_fraction_row(rows, axis, "colorable_fraction", colorable, known, censored, attempts);
        add_fraction_row(rows, axis, "connected_fraction", connected, n, 0, attempts);
        add_cost_rows(rows, axis, costs, censored, attempts, "");
        if (!colorable_costs.empty())
            add_cost_rows(rows, axis, colorable_costs, 0, attempts, ":colorable");
        if (!uncolorable_costs.empty())
            add_cost_rows(rows, axis, uncolorable_costs, 0, attempts, ":uncolorable");
        return rows;
    }

    if (series.has(Measure::solvable_fraction)) {
        std::uint64_t solvable = 0;
        for (const auto& p : point.problems)
            solvable += p.solvable.value_or(false) ? 1 : 0;
        add_fraction_row(rows, axis, "solvable_fraction", solvable, n, 0, attempts);
    }
    if (series.has(Measure::cost)) {
        for (auto solver : series.solvers) {
            std::uint64_t censored = 0;
            const auto costs = problem_costs(point, solver, config.aggregate, censored);
            if (!costs.empty())
                add_cost_rows(rows, axis, costs, censored, attempts,
                              series.solvers.size() > 1 ? ":" + to_string(solver) : "");
        }
    }
    if (series.has(Measure::solution_counts)) {
        std::vector<double> counts;
        for (const auto& p : point.problems)
            if (p.solutions)
                counts.push_back(static_cast<double>(*p.solutions));
        if (!counts.empty()) {
            const auto mean = mean_with_ci(counts);
            const auto med = median_with_ci(counts);
            rows.push_back(make_row(axis, counts.size(), "mean_solutions", mean.mean, mean.ci, 0, attempts));
            rows.push_back(make_row(axis, counts.size(), "median_solutions", med.median, med.ci, 0, attempts));
        }
    }
    if (series.has(Measure::multi_solution_fraction)) {
        std::uint64_t multi = 0;
        std::uint64_t known = 0;
        for (const auto& p : point.problems) {
            if (!p.solutions)
                continue;
            ++known;
            multi += *p.solutions >= 2 ? 1 : 0;
        }
        add_fraction_row(rows, axis, "multi_solution_fraction", multi, known, 0, attempts);
    }

    const bool want_mus = series.has(Measure::mus) || series.has(Measure::cost_by_smallest_mus);
    if (want_mus) {
        std::vector<MusSample> samples;
        std::vector<double> costs;
        std::uint64_t censored = 0;
        if (series.has(Measure::cost_by_smallest_mus) && !series.solvers.empty())
            costs = problem_costs(point, series.solvers.front(), config.aggregate, censored);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& p = point.problems[i];
            if (!p.mus_count || *p.mus_count == 0)
                continue;
            MusSample s;
            s.m = static_cast<int>(point.axis);
            s.report.count = static_cast<std::size_t>(*p.mus_count);
            s.report.smallest_size = p.smallest_mus;
            if (i < costs.size())
                s.cost = costs[i];
            samples.push_back(s);
        }
        if (!samples.empty()) {
            const auto g = mus_sweep_stats(samples).front();
            const auto k = g.problems;
            if (series.has(Measure::mus)) {
                const auto& c = g.mus_count;
                const auto& s = g.smallest_size;
                rows.push_back(make_row(axis, k, "mean_mus_count", c.summary.mean, c.summary.mean_ci, 0, attempts));
                rows.push_back(make_row(axis, k, "median_mus_count", c.summary.median, c.summary.median_ci, 0, attempts));
                rows.push_back(make_row(axis, k, "mus_count_stddev", c.summary.stddev, {c.summary.stddev, c.summary.stddev}, 0, attempts));
                rows.push_back(make_row(axis, k, "min_mus_count", c.min, {c.min, c.min}, 0, attempts));
                rows.push_back(make_row(axis, k, "max_mus_count", c.max, {c.max, c.max}, 0, attempts));
                rows.push_back(make_row(axis, k, "mean_smallest_mus", s.summary.mean, s.summary.mean_ci, 0, attempts));
                rows.push_back(make_row(axis, k, "median_smallest_mus", s.summary.median, s.summary.median_ci, 0, attempts));
                rows.push_back(make_row(axis, k, "multi_mus_fraction", g.multiple.f, g.multiple.ci, 0, attempts));
            }
            if (series.has(Measure::cost_by_smallest_mus)) {
                for (const auto& group : g.cost_by_smallest)
                    rows.push_back(make_row(group.smallest_size, group.cost.n, "mean_cost_by_smallest_mus",
                                            group.cost.mean, group.cost.mean_ci, 0, attempts));
                if (g.spearman_cost_smallest) {
                    const double r1 = *g.spearman_cost_smallest;
                    const double r2 = *g.spearman_cost_count;
                    rows.push_back(make_row(axis, k, "spearman_cost_smallest_mus", r1, {r1, r1}, censored, attempts));
                    rows.push_back(make_row(axis, k, "spearman_cost_mus_count", r2, {r2, r2}, censored, attempts));
                }
            }
        }
    }
    return rows;
}

// ------------------------------------------------------------ persistence

namespace {

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open for reading", path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& path, const std::string& text)
{
    std::error_code ec;
    if (path.has_parent_path())
        fs::create_directories(path.parent_path(), ec);
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out)
            throw IoError("cannot open for writing", tmp.string());
        out << text;
        if (!out)
            throw IoError("write failed", tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec)
        throw IoError("cannot rename into place: " + ec.message(), path.string());
}

std::vector<std::string> split(const std::string& line, char sep)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, sep))
        out.push_back(cell);
    if (!line.empty() && line.back() == sep)
        out.emplace_back();
    return out;
}

std::vector<std::vector<std::string>> read_csv(const std::string& text, const std::string& header)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != header)
        throw InputError("expected CSV header '" + header + "'");
    const auto width = split(header, ',').size();
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        auto cells = split(line, ',');
        if (cells.size() != width)
            throw InputError("CSV row has " + std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(width));
        rows.push_back(std::move(cells));
    }
    return rows;
}

std::uint64_t to_u64(const std::string& s)
{
    try {
        std::size_t used = 0;
        const auto v = std::stoull(s, &used);
        if (used != s.size())
            throw InputError("bad integer '" + s + "'");
        return v;
    } catch (const std::logic_error&) {
        throw InputError("bad integer '" + s + "'");
    }
}

double to_double(const std::string& s)
{
    try {
        std::size_t used = 0;
        const auto v = std::stod(s, &used);
        if (used != s.size())
            throw InputError("bad number '" + s + "'");
        return v;
    } catch (const std::logic_error&) {
        throw InputError("bad number '" + s + "'");
    }
}

std::string opt_bool(const std::optional<bool>& b)
{
    return b ? (*b ? "1" : "0") : "";
}

std::optional<bool> parse_opt_bool(const std::string& s)
{
    if (s.empty())
        return std::nullopt;
    if (s == "1" || s == "0")
        return s == "1";
    throw InputError("bad flag '" + s + "'");
}

const char* kProblemsHeader =
    "problem_id,seed,attempts,size,solvable,solutions,solutions_capped,mus_count,smallest_mus,mus_sizes,connected";
const char* kRunsHeader = "problem_id,solver,run,seed,nodes,status";

std::string problems_csv(const PointData& point)
{
    std::ostringstream out;
    out << kProblemsHeader << '\n';
    for (const auto& p : point.problems) {
        out << p.id << ',' << p.seed << ',' << p.attempts << ',' << p.size << ',' << opt_bool(p.solvable) << ','
            << (p.solutions ? std::to_string(*p.solutions) : "") << ',' << (p.solutions_capped ? 1 : 0) << ','
            << (p.mus_count ? std::to_string(*p.mus_count) : "") << ','
            << (p.smallest_mus ? std::to_string(*p.smallest_mus) : "") << ',' << p.mus_sizes << ','
            << opt_bool(p.connected) << '\n';
    }
    return out.str();
}

std::string runs_csv(const PointData& point, SeriesKind kind)
{
    std::ostringstream out;
    out << kRunsHeader << '\n';
    for (const auto& r : point.runs)
        out << r.problem << ',' << (kind == SeriesKind::coloring ? "brelaz" : to_string(r.solver)) << ',' << r.run
            << ',' << r.seed << ',' << r.nodes << ',' << to_string(r.status) << '\n';
    return out.str();
}

std::vector<CostRow> point_cost_rows(const PointData& point, const SeriesConfig& series, Aggregate aggregate)
{
    std::vector<CostRow> rows;
    for (auto solver : series.solvers) {
        for (const auto& p : point.problems) {
            std::vector<std::uint64_t> nodes;
            int censored = 0;
            for (const auto& r : point.runs) {
                if (r.problem != p.id || r.solver != solver)
                    continue;
                nodes.push_back(r.nodes);
                censored += r.status == SearchStatus::censored ? 1 : 0;
            }
            if (nodes.empty())
                continue;
            rows.push_back({instance_name(series, p.id), solver,
                            aggregate_costs(nodes, censored, p.solvable.value_or(false), aggregate)});
        }
    }
    return rows;
}

std::string fingerprint(const ExperimentConfig& config, const SeriesConfig& series, double axis)
{
    json j;
    j["series"] = series_to_json(series);
    j["series"].erase("axis");
    j["series"].erase("long_running");
    j["axis"] = axis;
    j["seed"] = config.base_seed;
    j["node_cap"] = config.node_cap;
    j["max_attempts"] = config.max_attempts;
    j["swap_budget"] = config.swap_budget;
    return j.dump();
}

json point_meta(const ExperimentConfig& config, const SeriesConfig& series, const PointData& point)
{
    json j;
    j["series"] = point.series;
    j["axis"] = point.axis;
    j["target"] = point.target;
    j["complete"] = point.complete;
    j["attempts"] = point.attempts;
    j["note"] = point.note;
    j["gen_seed"] = point.gen_seed;
    j["solve_seed"] = point.solve_seed;
    j["problems"] = point.problems.size();
    j["fingerprint"] = fingerprint(config, series, point.axis);
    return j;
}

void save_point(const fs::path& dir, const ExperimentConfig& config, const SeriesConfig& series,
                const PointData& point)
{
    write_file(dir / "problems.csv", problems_csv(point));
    write_file(dir / "runs.csv", runs_csv(point, series.kind));
    if (series.kind == SeriesKind::csp && !series.solvers.empty() && !point.runs.empty())
        write_file(dir / "costs.csv", costs_csv(point_cost_rows(point, series, config.aggregate)));
    // meta.json last: its presence marks the point as finished.
    write_file(dir / "meta.json", point_meta(config, series, point).dump(2) + "\n");
}

std::optional<PointData> load_point(const fs::path& dir, const ExperimentConfig& config, const SeriesConfig& series,
                                    double axis, bool require_match)
{
    const auto meta_path = dir / "meta.json";
    if (!fs::exists(meta_path))
        return std::nullopt;
    json meta;
    try {
        meta = json::parse(read_file(meta_path));
    } catch (const json::exception& e) {
        throw InputError("corrupt " + meta_path.string() + ": " + e.what());
    }
    if (require_match && meta.value("fingerprint", std::string()) != fingerprint(config, series, axis))
        return std::nullopt;

    PointData point;
    point.series = meta.at("series").get<std::string>();
    point.axis = meta.at("axis").get<double>();
    point.target = meta.at("target").get<int>();
    point.complete = meta.at("complete").get<bool>();
    point.attempts = meta.at("attempts").get<std::uint64_t>();
    point.note = meta.value("note", std::string());
    point.gen_seed = meta.at("gen_seed").get<std::uint64_t>();
    point.solve_seed = meta.at("solve_seed").get<std::uint64_t>();

    for (const auto& c : read_csv(read_file(dir / "problems.csv"), kProblemsHeader)) {
        ProblemRecord p;
        p.id = static_cast<int>(to_u64(c[0]));
        p.seed = to_u64(c[1]);
        p.attempts = to_u64(c[2]);
        p.size = static_cast<int>(to_u64(c[3]));
        p.solvable = parse_opt_bool(c[4]);
        if (!c[5].empty())
            p.solutions = to_u64(c[5]);
        p.solutions_capped = c[6] == "1";
        if (!c[7].empty())
            p.mus_count = static_cast<int>(to_u64(c[7]));
        if (!c[8].empty())
            p.smallest_mus = static_cast<int>(to_u64(c[8]));
        p.mus_sizes = c[9];
        p.connected = parse_opt_bool(c[10]);
        point.problems.push_back(p);
    }
    for (const auto& c : read_csv(read_file(dir / "runs.csv"), kRunsHeader)) {
        RunRecord r;
        r.problem = static_cast<int>(to_u64(c[0]));
        r.solver = c[1] == "brelaz" ? SolverKind::dynamic : parse_solver(c[1]);
        r.run = static_cast<int>(to_u64(c[2]));
        r.seed = to_u64(c[3]);
        r.nodes = to_u64(c[4]);
        r.status = parse_status(c[5]);
        point.runs.push_back(r);
    }
    return point;
}

json row_json(const ResultRow& r)
{
    json j;
    j["axis"] = r.axis;
    j["n_problems"] = r.n_problems;
    j["statistic"] = r.statistic;
    j["value"] = r.value;
    j["ci_lo"] = r.ci_lo;
    j["ci_hi"] = r.ci_hi;
    j["censored"] = r.censored;
    j["attempts"] = r.attempts;
    return j;
}

fs::path point_dir(const fs::path& root, const SeriesConfig& series, double axis)
{
    return root / series.name / point_label(series, axis);
}

} // namespace

ResultTable run_experiment(const ExperimentConfig& config, const std::string& out_dir, int workers,
                           const ProgressFn& progress)
{
    config.validate();
    if (workers <= 0)
        workers = default_workers();
    const fs::path root(out_dir);
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec)
        throw IoError("cannot create output directory: " + ec.message(), out_dir);
    write_file(root / "config.json", config_to_json(config));

    ResultTable table;
    table.config = config;
    for (const auto* series : config.active_series()) {
        SeriesResult result;
        result.name = series->name;
        for (double axis : series->axis) {
            const auto dir = point_dir(root, *series, axis);
            auto cached = load_point(dir, config, *series, axis, true);
            PointData point;
            if (cached) {
                point = std::move(*cached);
                if (progress)
                    progress(series->name + " " + point_label(*series, axis) + ": reused");
            } else {
                point = compute_point(config, *series, axis, workers, (dir / "instances").string());
                save_point(dir, config, *series, point);
                if (progress)
                    progress(series->name + " " + point_label(*series, axis) + ": " +
                             std::to_string(point.problems.size()) + "/" + std::to_string(point.target) +
                             " problems, " + std::to_string(point.attempts) + " attempts" +
                             (point.complete ? "" : " (incomplete: " + point.note + ")"));
            }
            auto rows = summarize_point(config, *series, point);
            result.rows.insert(result.rows.end(), rows.begin(), rows.end());
            result.points.push_back(std::move(point));
        }
        table.series.push_back(std::move(result));
    }
    emit_results(table, out_dir);
    return table;
}

ResultTable analyze_experiment(const std::string& dir)
{
    const fs::path root(dir);
    const auto config = config_from_json(read_file(root / "config.json"));
    config.validate();
    ResultTable table;
    table.config = config;
    for (const auto* series : config.active_series()) {
        SeriesResult result;
        result.name = series->name;
        for (double axis : series->axis) {
            auto point = load_point(point_dir(root, *series, axis), config, *series, axis, false);
            if (!point)
                continue;  // never run
            auto rows = summarize_point(config, *series, *point);
            result.rows.insert(result.rows.end(), rows.begin(), rows.end());
            result.points.push_back(std::move(*point));
        }
        table.series.push_back(std::move(result));
    }
    return table;
}

// --------------------------------------------------------------- emission

std::string results_csv(const SeriesResult& series)
{
    std::ostringstream out;
    out << "axis,n_problems,statistic,value,ci_lo,ci_hi,censored,attempts\n";
    for (const auto& r : series.rows)
        out << format_number(r.axis) << ',' << r.n_problems << ',' << r.statistic << ',' << format_number(r.value)
            << ',' << format_number(r.ci_lo) << ',' << format_number(r.ci_hi) << ',' << r.censored << ','
            << r.attempts << '\n';
    return out.str();
}

std::string results_json(const ResultTable& table)
{
    json j;
    j["config"] = config_json(table.config);
    json series = json::array();
    for (const auto& s : table.series) {
        const SeriesConfig* cfg = nullptr;
        for (const auto& c : table.config.series)
            if (c.name == s.name)
                cfg = &c;
        json js;
        js["name"] = s.name;
        js["csv"] = s.name + ".csv";
        json points = json::array();
        for (const auto& p : s.points) {
            json jp;
            jp["axis"] = p.axis;
            jp["target"] = p.target;
            jp["problems"] = p.problems.size();
            jp["complete"] = p.complete;
            jp["attempts"] = p.attempts;
            jp["note"] = p.note;
            jp["gen_seed"] = p.gen_seed;
            jp["solve_seed"] = p.solve_seed;
            if (cfg)
                jp["raw"] = s.name + "/" + point_label(*cfg, p.axis) + "/";
            points.push_back(jp);
        }
        js["points"] = points;
        json rows = json::array();
        for (const auto& r : s.rows)
            rows.push_back(row_json(r));
        js["rows"] = rows;
        series.push_back(js);
    }
    j["series"] = series;
    return j.dump(2) + "\n";
}

void emit_results(const ResultTable& table, const std::string& dir)
{
    const fs::path root(dir);
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec)
        throw IoError("cannot create output directory: " + ec.message(), dir);
    for (const auto& s : table.series)
        write_file(root / (s.name + ".csv"), results_csv(s));
    write_file(root / "results.json", results_json(table));
    write_file(root / "config.json", config_to_json(table.config));
}

// ---------------------------------------------------------- costs.csv I/O

namespace {
const char* kCostsHeader = "problem_id,solver,runs,median_nodes,mean_nodes,min,max,censored_runs";
}

std::string costs_csv(const std::vector<CostRow>& rows)
{
    std::ostringstream out;
    out << kCostsHeader << '\n';
    for (const auto& r : rows)
        out << r.problem_id << ',' << to_string(r.solver) << ',' << r.costs.nodes.size() << ','
            << exact_number(r.costs.median) << ',' << exact_number(r.costs.mean) << ',' << r.costs.min << ','
            << r.costs.max << ',' << r.costs.censored << '\n';
    return out.str();
}

std::vector<CostRow> parse_costs_csv(const std::string& text)
{
    std::vector<CostRow> rows;
    for (const auto& c : read_csv(text, kCostsHeader)) {
        CostRow r;
        r.problem_id = c[0];
        r.solver = parse_solver(c[1]);
        r.costs.nodes.resize(to_u64(c[2]));
        r.costs.median = to_double(c[3]);
        r.costs.mean = to_double(c[4]);
        r.costs.min = to_u64(c[5]);
        r.costs.max = to_u64(c[6]);
        r.costs.censored = static_cast<int>(to_u64(c[7]));
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<ResultRow> summarize_costs(const std::vector<CostRow>& rows, double axis, Aggregate aggregate,
                                       std::uint64_t attempts)
{
    std::vector<ResultRow> out;
    std::map<std::string, std::vector<const CostRow*>> by_solver;
    std::vector<std::string> order;
    for (const auto& r : rows) {
        auto name = to_string(r.solver);
        if (!by_solver.count(name))
            order.push_back(name);
        by_solver[name].push_back(&r);
    }
    for (const auto& name : order) {
        std::vector<double> costs;
        std::uint64_t censored = 0;
        for (const auto* r : by_solver[name]) {
            costs.push_back(aggregate == Aggregate::median ? r->costs.median : r->costs.mean);
            censored += static_cast<std::uint64_t>(r->costs.censored);
        }
        add_cost_rows(out, axis, costs, censored, attempts, order.size() > 1 ? ":" + name : "");
    }
    return out;
}

} // namespace phaselab

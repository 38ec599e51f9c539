#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "phaselab/error.hpp"
#include "phaselab/harness.hpp"
#include "phaselab/stats.hpp"

using namespace phaselab;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name)
{
    auto dir = fs::temp_directory_path() / ("phaselab_harness_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

ExperimentConfig small_config()
{
    ExperimentConfig c;
    c.base_seed = 42;
    SeriesConfig s;
    s.name = "all";
    s.axis = {40, 80, 120};
    s.predicate = Predicate::any();
    s.solvers = {SolverKind::chronological, SolverKind::dynamic};
    s.measures = {Measure::cost, Measure::solvable_fraction};
    s.samples = 12;
    s.runs = 3;
    c.series.push_back(s);
    return c;
}

const ResultRow* find_row(const SeriesResult& s, double axis, const std::string& stat)
{
    for (const auto& r : s.rows)
        if (r.axis == axis && r.statistic == stat)
            return &r;
    return nullptr;
}

} // namespace

TEST_CASE("presets")
{
    for (const auto& name : preset_names()) {
        auto c = preset_config(name);
        CHECK_NOTHROW(c.validate());
        CHECK(c.preset == name);
        CHECK_FALSE(c.active_series().empty());
    }
    auto fig1 = preset_config("fig1", 0.1);
    REQUIRE(fig1.series.size() == 1);
    CHECK(fig1.series[0].axis.size() == 14);
    CHECK(fig1.series[0].axis.front() == 10);
    CHECK(fig1.series[0].axis.back() == 140);
    CHECK(fig1.series[0].samples == 100);
    CHECK(fig1.series[0].runs == 10);
    auto full = preset_config("fig1", 1.0);
    CHECK(full.series[0].samples == 1000);
    CHECK(full.series[0].runs == 100);

    auto fig2 = preset_config("fig2");
    CHECK(fig2.active_series().size() == 3);
    fig2.include_long = true;
    CHECK(fig2.active_series().size() == 5);

    auto fig3 = preset_config("fig3");
    CHECK(fig3.series[0].kind == SeriesKind::coloring);
    CHECK(fig3.series[0].n == 100);

    CHECK_THROWS_AS(preset_config("fig10"), InputError);
    CHECK_THROWS_AS(preset_config("fig1", 0.0), InputError);
}

TEST_CASE("config JSON round trip and overrides")
{
    for (const auto& name : preset_names()) {
        auto c = preset_config(name, 0.2);
        c.base_seed = 99;
        const auto text = config_to_json(c);
        CHECK(config_to_json(config_from_json(text)) == text);
    }
    auto c = config_from_json(R"({"preset": "fig7", "scale": 0.05, "seed": 3, "node_cap": 500})");
    CHECK(c.series.size() == 2);
    CHECK(c.series[0].samples == 50);
    CHECK(c.base_seed == 3);
    CHECK(c.node_cap == 500);
    CHECK(config_from_json(R"({"preset": "fig1", "paper_scale": true})").series[0].samples == 1000);

    CHECK_THROWS_AS(config_from_json("{"), InputError);
    CHECK_THROWS_AS(config_from_json(R"({"preset": "fig1", "bogus": 1})"), InputError);
    CHECK_THROWS_AS(config_from_json(R"({"preset": "fig1", "aggregate": "mode"})"), InputError);
    CHECK_THROWS_AS(config_from_json(R"({"series": [{"name": "x", "axis": [10], "measures": ["nope"]}]})"),
                    InputError);
}

TEST_CASE("config validation")
{
    auto c = small_config();
    CHECK_NOTHROW(c.validate());
    c.series[0].axis = {40.5};
    CHECK_THROWS_AS(c.validate(), InputError);
    c = small_config();
    c.series[0].axis = {406};
    CHECK_THROWS_AS(c.validate(), InputError);
    c = small_config();
    c.series.push_back(c.series[0]);
    CHECK_THROWS_AS(c.validate(), InputError);
    c = small_config();
    c.series[0].name = "a/b";
    CHECK_THROWS_AS(c.validate(), InputError);
    c = small_config();
    c.series[0].solvers.clear();
    CHECK_THROWS_AS(c.validate(), InputError);
    c = small_config();
    c.series[0].kind = SeriesKind::coloring;
    c.series[0].n = 100;
    c.series[0].axis = {4.55};
    CHECK_THROWS_AS(c.validate(), InputError);
}

TEST_CASE("run_experiment: tables, resumption, analysis, worker independence")
{
    const auto config = small_config();
    const auto dir = fresh_dir("run");
    auto table = run_experiment(config, dir.string(), 1);
    REQUIRE(table.series.size() == 1);
    const auto& s = table.series[0];
    REQUIRE(s.points.size() == 3);
    for (const auto& p : s.points) {
        CHECK(p.complete);
        CHECK(p.problems.size() == 12);
        CHECK(p.runs.size() == 12 * 3 * 2);
    }

    // Fraction rows carry the fraction_with_ci interval.
    const auto* frac = find_row(s, 80, "solvable_fraction");
    REQUIRE(frac != nullptr);
    std::uint64_t solvable = 0;
    for (const auto& p : s.points[1].problems)
        solvable += *p.solvable ? 1 : 0;
    const auto expected = fraction_with_ci(solvable, 12);
    CHECK(frac->value == expected.f);
    CHECK(frac->ci_lo == expected.ci.lo);
    CHECK(frac->ci_hi == expected.ci.hi);
    CHECK(find_row(s, 80, "median_cost:dynamic") != nullptr);
    CHECK(find_row(s, 80, "mean_cost:chronological") != nullptr);

    const auto csv = slurp(dir / "all.csv");
    const auto json = slurp(dir / "results.json");
    CHECK(csv.rfind("axis,n_problems,statistic,value,ci_lo,ci_hi,censored,attempts\n", 0) == 0);
    CHECK(fs::exists(dir / "all" / "m080" / "instances" / "p0011.csp"));
    CHECK(fs::exists(dir / "all" / "m080" / "runs.csv"));
    CHECK(fs::exists(dir / "all" / "m080" / "costs.csv"));
    CHECK(fs::exists(dir / "config.json"));

    // Re-running reuses everything and rewrites identical bytes.
    std::vector<std::string> log;
    run_experiment(config, dir.string(), 1, [&](const std::string& line) { log.push_back(line); });
    REQUIRE(log.size() == 3);
    CHECK(log[0].find("reused") != std::string::npos);
    CHECK(slurp(dir / "all.csv") == csv);
    CHECK(slurp(dir / "results.json") == json);

    // Interrupted run: one point lost its completion marker.
    fs::remove(dir / "all" / "m080" / "meta.json");
    fs::remove(dir / "all.csv");
    run_experiment(config, dir.string(), 3);
    CHECK(slurp(dir / "all.csv") == csv);
    CHECK(slurp(dir / "results.json") == json);

    // A different worker count from scratch gives the same bytes.
    const auto dir4 = fresh_dir("run4");
    run_experiment(config, dir4.string(), 4);
    CHECK(slurp(dir4 / "all.csv") == csv);

    // Analysis from the raw files alone.
    auto analyzed = analyze_experiment(dir.string());
    REQUIRE(analyzed.series.size() == 1);
    CHECK(results_csv(analyzed.series[0]) == csv);
    CHECK(results_json(analyzed) == json);

    // Per-problem costs.csv feeds the same cost summary.
    auto cost_rows = parse_costs_csv(slurp(dir / "all" / "m080" / "costs.csv"));
    CHECK(cost_rows.size() == 24);
    auto from_costs = summarize_costs(cost_rows, 80, Aggregate::median, s.points[1].attempts);
    REQUIRE(from_costs.size() == 4);
    for (const auto& r : from_costs) {
        const auto* direct = find_row(s, 80, r.statistic);
        REQUIRE(direct != nullptr);
        CHECK(direct->value == r.value);
        CHECK(direct->ci_lo == r.ci_lo);
        CHECK(direct->ci_hi == r.ci_hi);
        CHECK(direct->censored == r.censored);
    }

    // Changing a setting invalidates the stored points.
    auto changed = config;
    changed.series[0].runs = 2;
    log.clear();
    run_experiment(changed, dir.string(), 2, [&](const std::string& line) { log.push_back(line); });
    CHECK(log[0].find("reused") == std::string::npos);

    fs::remove_all(dir);
    fs::remove_all(dir4);
}

TEST_CASE("exhausted generation gives an incomplete point")
{
    ExperimentConfig c;
    c.base_seed = 1;
    c.max_attempts = 200;
    SeriesConfig s;
    s.name = "rare";
    s.axis = {20, 120};
    s.predicate = Predicate::unsolvable();
    s.samples = 5;
    s.runs = 2;
    c.series.push_back(s);
    const auto dir = fresh_dir("rare");
    auto table = run_experiment(c, dir.string(), 2);
    const auto& points = table.series[0].points;
    CHECK_FALSE(points[0].complete);
    CHECK(points[0].problems.empty());
    CHECK(points[0].attempts == 200);
    CHECK(points[1].complete);
    CHECK(points[1].problems.size() == 5);
    const auto& rows = table.series[0].rows;
    CHECK(rows[0].statistic == "problems");
    CHECK(rows[0].value == 0);
    CHECK(rows[0].attempts == 200);
    CHECK(rows[1].axis == 120);
    CHECK(results_json(table).find("\"complete\": false") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("mus, solution-count and coloring series")
{
    ExperimentConfig c;
    c.base_seed = 5;
    SeriesConfig mus;
    mus.name = "mus";
    mus.axis = {90, 140};
    mus.predicate = Predicate::unsolvable();
    mus.measures = {Measure::mus, Measure::cost_by_smallest_mus};
    mus.samples = 15;
    mus.runs = 3;
    c.series.push_back(mus);

    SeriesConfig counts;
    counts.name = "counts";
    counts.axis = {50};
    counts.predicate = Predicate::solvable();
    counts.solvers.clear();
    counts.measures = {Measure::solution_counts, Measure::multi_solution_fraction};
    counts.samples = 10;
    counts.axis_per_variable = true;
    c.series.push_back(counts);

    SeriesConfig graphs;
    graphs.name = "graphs";
    graphs.kind = SeriesKind::coloring;
    graphs.n = 40;
    graphs.axis = {2.0, 4.5, 7.0};
    graphs.solvers.clear();
    graphs.measures = {Measure::coloring};
    graphs.samples = 20;
    graphs.runs = 1;
    c.series.push_back(graphs);

    const auto dir = fresh_dir("mixed");
    auto table = run_experiment(c, dir.string(), 2);
    REQUIRE(table.series.size() == 3);

    const auto& m = table.series[0];
    CHECK(find_row(m, 140, "mean_mus_count") != nullptr);
    CHECK(find_row(m, 140, "multi_mus_fraction") != nullptr);
    CHECK(find_row(m, 140, "spearman_cost_smallest_mus") != nullptr);
    int grouped = 0;
    std::size_t population = 0;
    for (const auto& r : m.rows) {
        if (r.statistic == "mean_cost_by_smallest_mus") {
            ++grouped;
            population += r.n_problems;
            CHECK(r.axis >= 2);
            CHECK(r.axis <= 10);
        }
    }
    CHECK(population == 30);
    CHECK(grouped >= 2);

    const auto& k = table.series[1];
    const auto* mean = find_row(k, 5.0, "mean_solutions");
    REQUIRE(mean != nullptr);
    CHECK(mean->value >= 1.0);
    CHECK(find_row(k, 5.0, "multi_solution_fraction") != nullptr);

    const auto& g = table.series[2];
    const auto* easy = find_row(g, 2.0, "colorable_fraction");
    const auto* hard = find_row(g, 7.0, "colorable_fraction");
    REQUIRE(easy != nullptr);
    REQUIRE(hard != nullptr);
    CHECK(easy->value > hard->value);
    CHECK(find_row(g, 4.5, "connected_fraction") != nullptr);
    CHECK(find_row(g, 2.0, "median_cost") != nullptr);
    CHECK(fs::exists(dir / "graphs" / "g4.500" / "instances" / "g0019.graph"));

    auto analyzed = analyze_experiment(dir.string());
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(results_csv(analyzed.series[i]) == results_csv(table.series[i]));
    fs::remove_all(dir);
}

TEST_CASE("emission")
{
    SeriesResult s;
    s.name = "one";
    s.rows.push_back({80, 100, "solvable_fraction", 0.5, 0.4, 0.6, 0, 100});
    const auto csv = results_csv(s);
    CHECK(csv == "axis,n_problems,statistic,value,ci_lo,ci_hi,censored,attempts\n"
                 "80,100,solvable_fraction,0.5,0.4,0.6,0,100\n");
    CHECK(results_csv(s) == csv);

    ResultTable t;
    t.config = small_config();
    t.series.push_back(s);
    CHECK(results_json(t) == results_json(t));
    CHECK_THROWS_AS(emit_results(t, "/proc/phaselab/not/writable"), IoError);
}

TEST_CASE("costs.csv parsing rejects malformed input")
{
    CHECK_THROWS_AS(parse_costs_csv("nope\n"), InputError);
    CHECK_THROWS_AS(parse_costs_csv("problem_id,solver,runs,median_nodes,mean_nodes,min,max,censored_runs\n"
                                    "p0,dynamic,3,4\n"),
                    InputError);
    CHECK_THROWS_AS(parse_costs_csv("problem_id,solver,runs,median_nodes,mean_nodes,min,max,censored_runs\n"
                                    "p0,gsat,3,4,4,4,4,0\n"),
                    InputError);
    auto rows = parse_costs_csv("problem_id,solver,runs,median_nodes,mean_nodes,min,max,censored_runs\n"
                                "p0,dynamic,3,4,4.5,2,9,1\n");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].costs.mean == 4.5);
    CHECK(rows[0].costs.censored == 1);
}

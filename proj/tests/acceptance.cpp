// Acceptance run: one PASS/FAIL line per criterion.
#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "phaselab/coloring.hpp"
#include "phaselab/conflict_table.hpp"
#include "phaselab/csp.hpp"
#include "phaselab/generators.hpp"
#include "phaselab/harness.hpp"
#include "phaselab/mus.hpp"
#include "phaselab/solvers.hpp"

using namespace phaselab;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Verdict()>& check)
{
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
        v = check();
    } catch (const std::exception& e) {
        v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %2d %s: %s (%.1fs)\n", v.pass ? "PASS" : "FAIL", id, title.c_str(), v.detail.c_str(), secs);
    std::fflush(stdout);
    failures += v.pass ? 0 : 1;
}

std::string fmt(double x, int digits = 3)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

const fs::path kRoot = fs::temp_directory_path() / "phaselab_acceptance";
int workers = 1;

/// statistic value per axis value for one series.
std::map<double, double> curve(const SeriesResult& s, const std::string& statistic)
{
    std::map<double, double> out;
    for (const auto& r : s.rows)
        if (r.statistic == statistic)
            out[r.axis] = r.value;
    return out;
}

const SeriesResult& series_named(const ResultTable& t, const std::string& name)
{
    for (const auto& s : t.series)
        if (s.name == name)
            return s;
    throw std::runtime_error("missing series " + name);
}

std::string describe(const std::map<double, double>& c)
{
    std::string out;
    for (const auto& [x, y] : c)
        out += (out.empty() ? "" : " ") + fmt(x, 4) + ":" + fmt(y, 4);
    return out;
}

/// Axis of the unique maximum, or nullopt when the maximum is tied.
std::optional<double> unique_argmax(const std::map<double, double>& c)
{
    std::optional<double> best;
    double top = -1;
    int ties = 0;
    for (const auto& [x, y] : c) {
        if (y > top) {
            top = y;
            best = x;
            ties = 1;
        } else if (y == top) {
            ++ties;
        }
    }
    return ties == 1 ? best : std::nullopt;
}

SeriesConfig csp_series(std::string name, std::vector<double> axis, Predicate pred, GenMethod method,
                        std::vector<SolverKind> solvers, std::vector<Measure> measures, int samples, int runs)
{
    SeriesConfig s;
    s.name = std::move(name);
    s.axis = std::move(axis);
    s.predicate = pred;
    s.method = method;
    s.solvers = std::move(solvers);
    s.measures = std::move(measures);
    s.samples = samples;
    s.runs = runs;
    return s;
}

ResultTable run(const ExperimentConfig& config, const std::string& name)
{
    const auto dir = kRoot / name;
    fs::remove_all(dir);
    return run_experiment(config, dir.string(), workers);
}

// Shared unsolvable sweep for criteria 9-12.
std::optional<ResultTable> unsolvable_table;

const ResultTable& unsolvable_sweep()
{
    if (!unsolvable_table) {
        ExperimentConfig c;
        c.base_seed = 2024;
        const std::vector<SolverKind> both{SolverKind::chronological, SolverKind::dynamic};
        c.series.push_back(csp_series("unsolvable-gs", {40, 50, 60, 70, 80, 90, 100, 110, 120, 130, 140},
                                      Predicate::unsolvable(), GenMethod::generate_select, both,
                                      {Measure::cost, Measure::mus}, 100, 10));
        c.series.push_back(csp_series("unsolvable-hc", {10, 20, 30, 40, 50, 60, 70}, Predicate::unsolvable(),
                                      GenMethod::hill_climb, both, {Measure::cost, Measure::mus}, 100, 10));
        c.series.push_back(csp_series("unsolvable-gs-m60", {60}, Predicate::unsolvable(),
                                      GenMethod::generate_select, {SolverKind::dynamic},
                                      {Measure::cost_by_smallest_mus}, 1000, 100));
        unsolvable_table = run(c, "unsolvable");
    }
    return *unsolvable_table;
}

/// Median-cost curve over complete points only.
std::map<double, double> complete_curve(const SeriesResult& s, const std::string& statistic)
{
    auto c = curve(s, statistic);
    for (const auto& p : s.points)
        if (!p.complete)
            c.erase(p.axis);
    return c;
}

} // namespace

int main()
{
    workers = default_workers();
    std::printf("acceptance run with %d worker(s)\n", workers);

    report(1, "expected solution count and predicted crossover", [] {
        const double e0 = expected_solution_count(10, 3, 0);
        const double cross = predicted_crossover(10, 3);
        return Verdict{e0 == 59049.0 && std::abs(cross - 82.9) <= 0.1,
                       "E[N](m=0)=" + fmt(e0, 10) + ", crossover m=" + fmt(cross, 5)};
    });

    report(2, "nogood universe and consistent choices", [] {
        const auto all = enumerate_all_nogoods(10, 3);
        // Independent tally: nogoods that a fixed random assignment survives.
        Rng rng(7);
        std::vector<int> a(10);
        for (auto& v : a)
            v = rng.below(3);
        std::size_t consistent = 0;
        for (const auto& g : all)
            consistent += (a[g.var_i] == g.val_i && a[g.var_j] == g.val_j) ? 0 : 1;
        return Verdict{all.size() == 405 && consistent == 360 && consistent_nogood_count(10, 3) == 360,
                       std::to_string(all.size()) + " nogoods, " + std::to_string(consistent) +
                           " consistent with one assignment"};
    });

    report(3, "random graph edges and nogoods", [] {
        Rng rng(3);
        const auto g = random_graph(100, 4.5, rng);
        const auto p = coloring_to_csp(g);
        return Verdict{g.edge_count() == 225 && p.size() == 675 && p.size() == static_cast<std::size_t>(150 * 4.5),
                       std::to_string(g.edge_count()) + " edges, " + std::to_string(p.size()) + " nogoods"};
    });

    report(4, "solver completeness on 10^4 instances", [] {
        Rng rng(4);
        int disagreements = 0;
        int unsolvable = 0;
        const int trials = 10000;
        for (int t = 0; t < trials; ++t) {
            const int m = 30 + 10 * (t % 12);
            const auto p = generate_select({10, 3, m}, rng);
            const bool solvable = count_solutions(p, 1).count > 0;
            unsolvable += solvable ? 0 : 1;
            for (auto kind : {SolverKind::chronological, SolverKind::dynamic}) {
                const auto out = solve_once(p, kind, rng.next());
                const bool found = out.status == SearchStatus::solution;
                const bool sound = !found || is_consistent(p, out.assignment);
                if (out.status == SearchStatus::censored || found != solvable || !sound)
                    ++disagreements;
            }
        }
        return Verdict{disagreements == 0, std::to_string(disagreements) + " disagreements over " +
                                               std::to_string(trials) + " instances (" + std::to_string(unsolvable) +
                                               " unsolvable)"};
    });

    report(5, "MUS enumeration matches brute force", [] {
        Rng rng(5);
        int checked = 0;
        int mismatches = 0;
        while (checked < 100) {
            const auto p = generate_select({8, 3, 55 + rng.below(50)}, rng);
            if (is_solvable(p))
                continue;
            ++checked;
            std::vector<bool> solvable(256);
            for (std::uint32_t s = 0; s < 256; ++s) {
                const auto vars = subset_variables(s);
                solvable[s] = vars.empty() || count_solutions_exhaustive(induced_subproblem(p, vars).problem) > 0;
            }
            std::vector<std::uint32_t> expected;
            for (std::uint32_t s = 0; s < 256; ++s) {
                if (solvable[s])
                    continue;
                bool minimal = true;
                for (std::uint32_t t = 0; t < 256; ++t)
                    if ((t & s) == t && t != s && !solvable[t])
                        minimal = false;
                if (minimal)
                    expected.push_back(s);
            }
            mismatches += enumerate_mus(p).mus_list == expected ? 0 : 1;
        }
        const auto full = enumerate_mus(Problem(10, 3, enumerate_all_nogoods(10, 3)));
        const bool full_ok = full.count == 45 && full.size_histogram == std::map<int, int>{{2, 45}};
        return Verdict{mismatches == 0 && full_ok, std::to_string(mismatches) + " mismatches on " +
                                                       std::to_string(checked) + " instances; full set gives " +
                                                       std::to_string(full.count) + " MUSes of size " +
                                                       (full.smallest_size ? std::to_string(*full.smallest_size) : "-")};
    });

    report(6, "Brelaz completeness with fixed first two colors", [] {
        Rng rng(6);
        int disagreements = 0;
        int colorable = 0;
        int total = 0;
        for (int gamma = 2; gamma <= 7; ++gamma) {
            for (int t = 0; t < 167; ++t) {
                const auto g = random_graph(20, gamma, rng);
                const auto out = brelaz_backtrack(g, rng.next());
                // independent answer via the CSP encoding
                const bool expected = count_solutions(coloring_to_csp(g), 1).count > 0;
                const bool got = out.status == SearchStatus::solution;
                if (got != expected || (got && !is_proper_coloring(g, out.colors)))
                    ++disagreements;
                colorable += expected ? 1 : 0;
                ++total;
            }
        }
        return Verdict{disagreements == 0 && total >= 1000,
                       std::to_string(disagreements) + " disagreements over " + std::to_string(total) + " graphs (" +
                           std::to_string(colorable) + " colorable)"};
    });

    report(7, "solvable fraction crosses 0.5 at m in [72, 80]", [] {
        ExperimentConfig c;
        c.base_seed = 7;
        c.series.push_back(csp_series("crossover", {60, 65, 70, 75, 80, 85, 90, 95}, Predicate::any(),
                                      GenMethod::generate_select, {}, {Measure::solvable_fraction}, 500, 1));
        const auto t = run(c, "crossover");
        const auto f = curve(t.series[0], "solvable_fraction");
        std::optional<double> cross;
        for (auto it = f.begin(); std::next(it) != f.end(); ++it) {
            const auto nx = std::next(it);
            if (it->second >= 0.5 && nx->second < 0.5) {
                cross = it->first + (it->second - 0.5) / (it->second - nx->second) * (nx->first - it->first);
                break;
            }
        }
        return Verdict{cross && *cross >= 72 && *cross <= 80,
                       "crossing at m=" + (cross ? fmt(*cross, 4) : std::string("none")) + "; " + describe(f)};
    });

    report(8, "easy-hard-easy peak for dynamic backtracking", [] {
        auto c = preset_config("fig1", 0.1);
        c.base_seed = 8;
        const auto t = run(c, "fig1");
        const auto med = curve(t.series[0], "median_cost");
        const auto peak = unique_argmax(med);
        const bool interior = peak && *peak != med.begin()->first && *peak != med.rbegin()->first;
        const bool ok = interior && (*peak == 70 || *peak == 80 || *peak == 90 || *peak == 100);
        return Verdict{ok, "peak at m=" + (peak ? fmt(*peak, 4) : std::string("tied")) + "; " + describe(med)};
    });

    report(9, "unsolvable-cost peaks (generate-select and hill-climbing)", [] {
        const auto& t = unsolvable_sweep();
        const auto gs = complete_curve(series_named(t, "unsolvable-gs"), "median_cost:dynamic");
        const auto hc = complete_curve(series_named(t, "unsolvable-hc"), "median_cost:dynamic");
        const auto gp = unique_argmax(gs);
        const auto hp = unique_argmax(hc);
        const bool ok = gp && (*gp == 50 || *gp == 60 || *gp == 70) && hp && (*hp == 30 || *hp == 40 || *hp == 50);
        return Verdict{ok, "generate-select peak m=" + (gp ? fmt(*gp, 4) : std::string("tied")) + " [" +
                               describe(gs) + "]; hill-climbing peak m=" + (hp ? fmt(*hp, 4) : std::string("tied")) +
                               " [" + describe(hc) + "]"};
    });

    report(10, "no peak for chronological backtracking", [] {
        const auto& t = unsolvable_sweep();
        std::string detail;
        bool ok = true;
        for (const char* name : {"unsolvable-gs", "unsolvable-hc"}) {
            const auto& s = series_named(t, name);
            const auto chrono = complete_curve(s, "median_cost:chronological");
            const auto dyn = complete_curve(s, "median_cost:dynamic");
            std::vector<double> ys;
            for (const auto& [x, y] : chrono)
                if (dyn.count(x))
                    ys.push_back(y);
            int inversions = 0;
            for (std::size_t i = 1; i < ys.size(); ++i)
                inversions += ys[i] > ys[i - 1] ? 1 : 0;
            ok = ok && inversions <= 1 && ys.size() >= 3;
            detail += std::string(detail.empty() ? "" : "; ") + name + ": " + std::to_string(inversions) +
                      " inversions [" + describe(chrono) + "]";
        }
        return Verdict{ok, detail};
    });

    report(11, "MUS statistics", [] {
        const auto& s = series_named(unsolvable_sweep(), "unsolvable-gs");
        const auto count = curve(s, "mean_mus_count");
        const auto multi = curve(s, "multi_mus_fraction");
        const bool a = count.count(140) && count.at(140) >= 30 && count.at(140) <= 40;
        const bool b = count.count(90) && count.at(90) >= 4 && count.at(90) <= 8;
        bool c = true;
        std::string low;
        for (const auto& [m, f] : multi) {
            if (m > 50)
                continue;
            c = c && f < 0.2;
            low += " m=" + fmt(m, 3) + ":" + fmt(f, 3);
        }
        c = c && !low.empty();
        return Verdict{a && b && c, "mean MUS count m=140 " + (count.count(140) ? fmt(count.at(140), 4) : "-") +
                                        ", m=90 " + (count.count(90) ? fmt(count.at(90), 4) : "-") +
                                        "; fraction with >1 MUS" + low};
    });

    report(12, "cost rises with smallest-MUS size at m=60", [] {
        const auto& s = series_named(unsolvable_sweep(), "unsolvable-gs-m60");
        std::vector<std::pair<double, double>> groups;
        std::string detail;
        std::size_t problems = 0;
        for (const auto& r : s.rows) {
            if (r.statistic != "mean_cost_by_smallest_mus")
                continue;
            problems += r.n_problems;
            detail += " " + fmt(r.axis, 3) + "(" + std::to_string(r.n_problems) + "):" + fmt(r.value, 4);
            if (r.n_problems >= 10)
                groups.emplace_back(r.axis, r.value);
        }
        bool increasing = groups.size() >= 2;
        for (std::size_t i = 1; i < groups.size(); ++i)
            increasing = increasing && groups[i].second > groups[i - 1].second;
        return Verdict{increasing && problems >= 300,
                       std::to_string(problems) + " problems; size(n):mean cost" + detail};
    });

    report(13, "3-coloring crossover near gamma 4.5", [] {
        ExperimentConfig c;
        c.base_seed = 13;
        c.node_cap = 10'000'000;
        SeriesConfig s;
        s.name = "graphs-100";
        s.kind = SeriesKind::coloring;
        s.n = 100;
        s.axis = {3.8, 4.0, 4.2, 4.4, 4.6, 4.8, 5.0, 5.2};
        s.solvers.clear();
        s.measures = {Measure::coloring};
        s.samples = 200;
        s.runs = 1;
        c.series.push_back(s);
        const auto t = run(c, "coloring");
        const auto f = curve(t.series[0], "colorable_fraction");
        std::uint64_t censored = 0;
        for (const auto& r : t.series[0].rows)
            if (r.statistic == "colorable_fraction")
                censored += r.censored;
        std::optional<double> cross;
        for (auto it = f.begin(); std::next(it) != f.end(); ++it) {
            const auto nx = std::next(it);
            if (it->second >= 0.5 && nx->second < 0.5) {
                cross = it->first + (it->second - 0.5) / (it->second - nx->second) * (nx->first - it->first);
                break;
            }
        }
        return Verdict{cross && *cross >= 4.2 && *cross <= 4.8,
                       "crossing at gamma=" + (cross ? fmt(*cross, 4) : std::string("none")) + ", " +
                           std::to_string(censored) + " censored runs; " + describe(f)};
    });

    fs::remove_all(kRoot);
    std::printf("%d of 13 criteria passed\n", 13 - failures);
    return failures == 0 ? 0 : 1;
}

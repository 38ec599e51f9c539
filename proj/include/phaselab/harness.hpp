#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "phaselab/generators.hpp"
#include "phaselab/solvers.hpp"

namespace phaselab {

enum class SeriesKind { csp, coloring };

enum class Measure {
    cost,                     ///< median / mean per-problem cost, per solver
    solvable_fraction,
    solution_counts,          ///< mean / median exact solution count
    multi_solution_fraction,  ///< problems with at least two solutions
    mus,                      ///< MUS count and smallest-MUS size
    cost_by_smallest_mus,     ///< mean cost grouped by smallest-MUS size
    coloring,                 ///< colorable / connected fractions and costs
};

std::string to_string(Measure measure);
Measure parse_measure(const std::string& text);
std::string to_string(SeriesKind kind);
SeriesKind parse_series_kind(const std::string& text);

/// One curve of a figure: a sweep over m (or gamma for coloring) with a
/// fixed generation recipe and solver set.
struct SeriesConfig {
    std::string name;
    SeriesKind kind = SeriesKind::csp;
    int n = 10;  ///< variables, or graph nodes for coloring
    int d = 3;
    std::vector<double> axis;  ///< nogood counts, or gamma values
    bool axis_per_variable = false;  ///< report m / n on the axis
    GenMethod method = GenMethod::generate_select;
    Predicate predicate;
    std::vector<SolverKind> solvers{SolverKind::dynamic};
    std::vector<Measure> measures{Measure::cost};
    int samples = 100;  ///< problems per point
    int runs = 10;      ///< solver runs per problem
    bool long_running = false;

    bool has(Measure m) const;
};

struct ExperimentConfig {
    std::string preset = "custom";
    double scale = 0.1;
    std::uint64_t base_seed = 0;
    Aggregate aggregate = Aggregate::median;
    std::uint64_t node_cap = 10'000'000;
    std::uint64_t max_attempts = 1'000'000;  ///< per generated problem
    std::uint64_t swap_budget = 10'000;
    double wall_time_cap = 0.0;  ///< seconds per point, 0 = none
    bool include_long = false;
    std::vector<SeriesConfig> series;

    /// Throws InputError on inconsistent settings.
    void validate() const;
    /// Series that run under the current include_long setting.
    std::vector<const SeriesConfig*> active_series() const;
};

std::vector<std::string> preset_names();
/// Figure preset at the given scale (1.0 = 1000 problems x 100 runs).
ExperimentConfig preset_config(const std::string& preset, double scale = 0.1);

std::string config_to_json(const ExperimentConfig& config);
/// Accepts the keys written by config_to_json; a "preset" key expands the
/// preset first and other keys override it.
ExperimentConfig config_from_json(const std::string& text);

struct ProblemRecord {
    int id = 0;
    std::uint64_t seed = 0;
    std::uint64_t attempts = 0;
    int size = 0;  ///< nogoods, or edges
    std::optional<bool> solvable;
    std::optional<std::uint64_t> solutions;
    bool solutions_capped = false;
    std::optional<int> mus_count;
    std::optional<int> smallest_mus;
    std::string mus_sizes;  ///< semicolon-joined sizes
    std::optional<bool> connected;
};

struct RunRecord {
    int problem = 0;
    SolverKind solver = SolverKind::dynamic;
    int run = 0;
    std::uint64_t seed = 0;
    std::uint64_t nodes = 0;
    SearchStatus status = SearchStatus::solution;
};

/// Raw data for one sweep point, as persisted on disk.
struct PointData {
    std::string series;
    double axis = 0.0;  ///< m or gamma (never divided by n)
    int target = 0;
    bool complete = true;
    std::uint64_t attempts = 0;
    std::string note;
    std::uint64_t gen_seed = 0;
    std::uint64_t solve_seed = 0;
    std::vector<ProblemRecord> problems;
    std::vector<RunRecord> runs;
};

struct ResultRow {
    double axis = 0.0;
    std::size_t n_problems = 0;
    std::string statistic;
    double value = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::uint64_t censored = 0;
    std::uint64_t attempts = 0;
};

struct SeriesResult {
    std::string name;
    std::vector<ResultRow> rows;
    std::vector<PointData> points;
};

struct ResultTable {
    ExperimentConfig config;
    std::vector<SeriesResult> series;
};

/// Seeds for the problems and solver runs of one point.
std::uint64_t point_gen_seed(const ExperimentConfig& config, const SeriesConfig& series, double axis);
std::uint64_t point_solve_seed(const ExperimentConfig& config, const SeriesConfig& series, double axis);

/// Worker count: PHASE_LAB_WORKERS when set, else hardware concurrency.
int default_workers();

using ProgressFn = std::function<void(const std::string&)>;

/// Generates, solves and persists every point under out_dir, skipping points
/// already completed with the same settings, then writes the result files.
ResultTable run_experiment(const ExperimentConfig& config, const std::string& out_dir, int workers = 0,
                           const ProgressFn& progress = {});

/// Computes one point's raw data without touching the disk.
PointData compute_point(const ExperimentConfig& config, const SeriesConfig& series, double axis, int workers = 1,
                        const std::string& instance_dir = {});

/// Statistics of one point; rows sorted in a fixed order.
std::vector<ResultRow> summarize_point(const ExperimentConfig& config, const SeriesConfig& series,
                                       const PointData& point);

/// Rebuilds the table from a directory written by run_experiment, using
/// only the persisted raw files.
ResultTable analyze_experiment(const std::string& dir);

std::string results_csv(const SeriesResult& series);
std::string results_json(const ResultTable& table);
/// Writes <series>.csv for every series plus results.json and config.json.
void emit_results(const ResultTable& table, const std::string& dir);

/// Per-problem summary in the `solve` subcommand's costs.csv layout.
struct CostRow {
    std::string problem_id;
    SolverKind solver = SolverKind::dynamic;
    RunCosts costs;
};
std::string costs_csv(const std::vector<CostRow>& rows);
std::vector<CostRow> parse_costs_csv(const std::string& text);
/// median_cost and mean_cost rows over the per-problem aggregates.
std::vector<ResultRow> summarize_costs(const std::vector<CostRow>& rows, double axis, Aggregate aggregate,
                                       std::uint64_t attempts = 0);

} // namespace phaselab

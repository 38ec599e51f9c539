#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "phaselab/csp.hpp"

namespace phaselab {

enum class SearchStatus { solution, unsolvable, censored };

/// Result of one instrumented search. `nodes` counts value-assignment
/// events; `assignment` is complete iff status == solution.
struct SearchOutcome {
    SearchStatus status = SearchStatus::unsolvable;
    Assignment assignment;
    std::uint64_t nodes = 0;
    std::uint64_t seed = 0;
};

struct SearchLimits {
    /// 0 = unlimited. A run that would exceed the cap is reported as censored.
    std::uint64_t node_cap = 0;
};

/// Depth-first search over one random static variable order with a fresh
/// random value order each time a variable is entered. Every value tried
/// counts as a node, including ones that immediately conflict with earlier
/// assignments.
SearchOutcome chronological_backtrack(const Problem& problem, std::uint64_t seed, SearchLimits limits = {});

/// Read-only view of dynamic backtracking state, handed to observers.
/// explanation[var * d + val] is a bitmask of variables; meaningful only
/// where eliminated[var * d + val] is set.
struct EliminationView {
    int n = 0;
    int d = 0;
    std::span<const int> values;
    std::span<const std::uint64_t> explanation;
    std::span<const std::uint8_t> eliminated;
};

using EliminationObserver = std::function<void(const EliminationView&)>;

/// Dynamic backtracking with elimination explanations. Variables are picked
/// uniformly among the unassigned, values uniformly among the
/// non-eliminated; each assignment counts as a node. Limited to n <= 64.
SearchOutcome dynamic_backtrack(const Problem& problem, std::uint64_t seed, SearchLimits limits = {},
                                const EliminationObserver* observer = nullptr);

enum class SolverKind { chronological, dynamic };
enum class Aggregate { median, mean };

std::string to_string(SolverKind kind);
SolverKind parse_solver(const std::string& name);

struct RunProtocol {
    int runs = 100;
    std::uint64_t base_seed = 0;
    Aggregate aggregate = Aggregate::median;
    std::uint64_t node_cap = 0;
};

/// Per-problem cost over repeated randomized runs.
struct RunCosts {
    std::vector<std::uint64_t> nodes;  ///< one entry per run, run order
    double median = 0.0;               ///< nearest-rank median of nodes
    double mean = 0.0;
    double cost = 0.0;                 ///< median or mean, per protocol
    std::uint64_t min = 0;
    std::uint64_t max = 0;
    int censored = 0;
    bool solvable = false;             ///< some run found a solution
};

/// Seed of run `run` on problem `problem_id`.
std::uint64_t run_seed(std::uint64_t base_seed, std::uint64_t problem_id, std::uint64_t run);

SearchOutcome solve_once(const Problem& problem, SolverKind kind, std::uint64_t seed, SearchLimits limits = {});

RunCosts run_protocol(const Problem& problem, SolverKind kind, const RunProtocol& protocol,
                      std::uint64_t problem_id = 0);

/// Aggregates raw node counts exactly as run_protocol does.
RunCosts aggregate_costs(std::vector<std::uint64_t> nodes, int censored, bool solvable, Aggregate aggregate);

} // namespace phaselab

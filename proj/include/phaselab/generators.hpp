#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phaselab/csp.hpp"
#include "phaselab/random.hpp"

namespace phaselab {

enum class PredicateKind { any, solvable, unsolvable, exactly_k, at_least_k };

struct Predicate {
    PredicateKind kind = PredicateKind::any;
    std::uint64_t k = 0;

    static Predicate any() { return {PredicateKind::any, 0}; }
    static Predicate solvable() { return {PredicateKind::solvable, 0}; }
    static Predicate unsolvable() { return {PredicateKind::unsolvable, 0}; }
    static Predicate exactly(std::uint64_t k) { return {PredicateKind::exactly_k, k}; }
    static Predicate at_least(std::uint64_t k) { return {PredicateKind::at_least_k, k}; }

    /// Smallest solution cap that still decides the predicate (0 = none needed).
    std::uint64_t decisive_cap() const;
    bool holds(std::uint64_t capped_count) const;

    friend bool operator==(const Predicate&, const Predicate&) = default;
};

std::string to_string(const Predicate& p);
/// Accepts any, solvable, unsolvable, exactly:<k>, at-least:<k>.
Predicate parse_predicate(const std::string& text);

enum class GenMethod { generate_select, hill_climb, prespecified_solution, homogeneous };

std::string to_string(GenMethod method);
GenMethod parse_method(const std::string& text);

struct GenSpec {
    ProblemParams params;
    Predicate predicate;
    GenMethod method = GenMethod::generate_select;
    std::uint64_t max_attempts = 1'000'000;
    std::uint64_t seed = 0;
    /// Swap budget for each hill-climbing run.
    std::uint64_t swap_budget = 10'000;

    /// Throws InputError for inconsistent combinations.
    void validate() const;
};

struct GenResult {
    Problem problem;
    std::uint64_t attempts = 0;
    std::optional<SolutionCount> solution_count;
    std::uint64_t swaps = 0;
};

/// m distinct nogoods drawn uniformly without replacement.
Problem generate_select(const ProblemParams& params, Rng& rng);

struct PlantedProblem {
    Problem problem;
    Assignment solution;
};

/// Uniform random complete assignment A, then m nogoods drawn uniformly
/// from those that A satisfies.
PlantedProblem generate_prespecified_solution(const ProblemParams& params, Rng& rng);

/// per_pair distinct value-pair nogoods on every variable pair.
Problem generate_homogeneous(int n, int d, int per_pair, Rng& rng);

struct SwapRecord {
    std::vector<Nogood> before;     ///< nogood set at the start of the swap
    Nogood removed;
    std::uint64_t removal_gain = 0; ///< solutions gained by the removal
    int tied = 0;                   ///< candidates sharing the minimal gain
    Nogood added;
    std::uint64_t count_before = 0;
    std::uint64_t count_after = 0;
    bool backwards = false;         ///< no scanned candidate improved on count_before
};

struct HillClimbOptions {
    std::uint64_t swap_budget = 10'000;
    /// Consecutive swaps without a new lowest count before giving up
    /// (ExhaustionError). 0 disables the check.
    std::uint64_t stall_limit = 200;
    /// Records one SwapRecord per swap when set.
    std::vector<SwapRecord>* trace = nullptr;
};

struct HillClimbStats {
    std::uint64_t swaps = 0;
    std::uint64_t restarts = 0;
    std::uint64_t attempts = 0;  ///< candidate problems drawn (seeds and restarts)
};

/// Starts from a random unsolvable problem, removes random nogoods until it is
/// solvable, then adds back as many random nogoods as keep it solvable.
/// Restarts from a fresh unsolvable problem when no admissible nogood is
/// left; throws ExhaustionError after max_restarts restarts.
Problem hill_climb_solvable(const ProblemParams& params, Rng& rng, std::uint64_t max_restarts = 1000,
                            HillClimbStats* stats = nullptr);

/// Greedy swaps from a random solvable problem until no solution is left:
/// drop the nogood whose removal gains the fewest solutions, then add a random
/// nogood (from a freshly sampled third of the absent ones) that leaves fewer
/// solutions than before the drop, or the best scanned one otherwise.
Problem hill_climb_unsolvable(const ProblemParams& params, Rng& rng, const HillClimbOptions& options = {},
                              HillClimbStats* stats = nullptr);

/// Same swap structure, never going below k solutions, until exactly k remain.
Problem hill_climb_to_k_solutions(const Problem& start, std::uint64_t k, Rng& rng,
                                  const HillClimbOptions& options = {}, HillClimbStats* stats = nullptr);

/// Runs spec.method until spec.predicate holds or max_attempts candidates
/// have been examined (ExhaustionError).
GenResult generate_with_predicate(const GenSpec& spec);

/// Draws `trials` candidates with the spec's base method (generate_select,
/// prespecified_solution or homogeneous) and counts predicate hits.
std::uint64_t count_predicate_hits(const GenSpec& spec, std::uint64_t trials);

} // namespace phaselab

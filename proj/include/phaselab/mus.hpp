#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phaselab/csp.hpp"
#include "phaselab/stats.hpp"

namespace phaselab {

inline constexpr int kMaxLatticeVariables = 20;

/// Solvability of every induced subproblem, indexed by variable bitmask.
class SolvabilityLattice {
public:
    SolvabilityLattice() = default;
    SolvabilityLattice(int n, std::vector<std::uint8_t> solvable, std::uint64_t searches)
        : n_(n), solvable_(std::move(solvable)), searches_(searches)
    {
    }

    int variables() const { return n_; }
    std::size_t size() const { return solvable_.size(); }
    bool solvable(std::uint32_t subset) const { return solvable_[subset] != 0; }
    /// Subsets that needed an actual search (the rest were settled by
    /// an unsolvable subset or by size).
    std::uint64_t searches() const { return searches_; }

private:
    int n_ = 0;
    std::vector<std::uint8_t> solvable_;
    std::uint64_t searches_ = 0;
};

/// Bottom-up over subsets; a subset with an unsolvable subset is marked
/// unsolvable without search. Throws InputError when n > 20.
SolvabilityLattice build_lattice(const Problem& problem);

struct MusReport {
    std::vector<std::uint32_t> mus_list;  ///< ascending bitmask order
    std::size_t count = 0;
    std::optional<int> smallest_size;
    std::map<int, int> size_histogram;
};

MusReport enumerate_mus(const SolvabilityLattice& lattice);
MusReport enumerate_mus(const Problem& problem);

std::vector<int> subset_variables(std::uint32_t subset);
/// "0 3 7" style listing of a subset's variables.
std::string format_subset(std::uint32_t subset);

struct MusSample {
    int m = 0;
    MusReport report;
    std::optional<double> cost;
};

struct Spread {
    SampleSummary summary;
    double min = 0.0;
    double max = 0.0;
};

struct CostBySize {
    int smallest_size = 0;
    SampleSummary cost;
};

struct MusGroupStats {
    int m = 0;
    std::size_t problems = 0;
    Spread mus_count;
    Spread smallest_size;
    FractionSummary multiple;  ///< problems with more than one MUS
    /// Filled when every sample in the group has a cost.
    std::vector<CostBySize> cost_by_smallest;
    std::optional<double> spearman_cost_smallest;
    std::optional<double> spearman_cost_count;
};

/// Groups by m (ascending). Every sample must be unsolvable (count >= 1);
/// empty input or a solvable sample throws InputError.
std::vector<MusGroupStats> mus_sweep_stats(std::span<const MusSample> samples);

} // namespace phaselab

#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "phaselab/csp.hpp"

namespace phaselab {

/// Bit-level view of a problem's nogoods: for every (var, val, other) a mask
/// of the values of `other` that are forbidden alongside var = val.
/// Domains are limited to 32 values.
class ConflictTable {
public:
    using Mask = std::uint32_t;

    ConflictTable(int n, int d, std::span<const Nogood> nogoods);
    explicit ConflictTable(const Problem& problem);

    int variables() const { return n_; }
    int domain() const { return d_; }
    Mask full_domain() const { return full_; }

    Mask forbidden(int var, int val, int other) const
    {
        return table_[(static_cast<std::size_t>(var) * d_ + val) * n_ + other];
    }

    bool conflicts(int var, int val, int other, int other_val) const
    {
        return (forbidden(var, val, other) >> other_val) & 1U;
    }

    void add(const Nogood& g);
    void remove(const Nogood& g);

private:
    Mask& cell(int var, int val, int other)
    {
        return table_[(static_cast<std::size_t>(var) * d_ + val) * n_ + other];
    }

    int n_;
    int d_;
    Mask full_;
    std::vector<Mask> table_;
};

/// Counts complete consistent assignments over the variables in `vars`
/// (other variables are ignored), starting from the given per-variable
/// domain masks (indexed by variable). Stops once `cap` solutions are seen
/// when cap > 0. Dynamic smallest-domain-first branching with forward
/// checking.
std::uint64_t count_assignments(const ConflictTable& table,
                                std::span<const int> vars,
                                std::span<const ConflictTable::Mask> domains,
                                std::uint64_t cap = 0);

/// Convenience: all variables, full domains.
std::uint64_t count_assignments(const ConflictTable& table, std::uint64_t cap = 0);

/// True iff the variables selected by `var_mask` admit a consistent
/// assignment (requires n <= 64).
bool subset_solvable(const ConflictTable& table, std::uint64_t var_mask);

/// Calls `visit` with every complete consistent assignment (values indexed
/// by variable). Enumeration order is deterministic.
void for_each_solution(const ConflictTable& table,
                       const std::function<void(std::span<const int>)>& visit);

} // namespace phaselab

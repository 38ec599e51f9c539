#include "phaselab/mus.hpp"

#include <algorithm>
#include <bit>

#include "phaselab/conflict_table.hpp"
#include "phaselab/error.hpp"

namespace phaselab {

SolvabilityLattice build_lattice(const Problem& problem)
{
    const int n = problem.variables();
    if (n > kMaxLatticeVariables)
        throw InputError("solvability lattice supports at most " + std::to_string(kMaxLatticeVariables) +
                         " variables");
    const ConflictTable table(problem);
    const std::uint32_t total = std::uint32_t{1} << n;
    std::vector<std::uint8_t> solvable(total, 1);
    std::uint64_t searches = 0;

    // Numeric order visits every S \ {v} before S.
    for (std::uint32_t s = 0; s < total; ++s) {
        if (std::popcount(s) < 2)
            continue;
        bool pruned = false;
        for (std::uint32_t rest = s; rest != 0; rest &= rest - 1) {
            if (!solvable[s & ~(rest & -rest)]) {
                pruned = true;
                break;
            }
        }
        if (pruned) {
            solvable[s] = 0;
            continue;
        }
        ++searches;
        solvable[s] = subset_solvable(table, s) ? 1 : 0;
    }
    return SolvabilityLattice(n, std::move(solvable), searches);
}

MusReport enumerate_mus(const SolvabilityLattice& lattice)
{
    MusReport report;
    const auto total = static_cast<std::uint32_t>(lattice.size());
    for (std::uint32_t s = 0; s < total; ++s) {
        if (lattice.solvable(s))
            continue;
        bool minimal = true;
        for (std::uint32_t rest = s; rest != 0; rest &= rest - 1) {
            if (!lattice.solvable(s & ~(rest & -rest))) {
                minimal = false;
                break;
            }
        }
        if (!minimal)
            continue;
        report.mus_list.push_back(s);
        const int size = std::popcount(s);
        ++report.size_histogram[size];
        if (!report.smallest_size || size < *report.smallest_size)
            report.smallest_size = size;
    }
    report.count = report.mus_list.size();
    return report;
}

MusReport enumerate_mus(const Problem& problem)
{
    return enumerate_mus(build_lattice(problem));
}

std::vector<int> subset_variables(std::uint32_t subset)
{
    std::vector<int> vars;
    for (; subset != 0; subset &= subset - 1)
        vars.push_back(std::countr_zero(subset));
    return vars;
}

std::string format_subset(std::uint32_t subset)
{
    std::string text;
    for (int v : subset_variables(subset)) {
        if (!text.empty())
            text += ' ';
        text += std::to_string(v);
    }
    return text;
}

namespace {

Spread spread_of(const std::vector<double>& values)
{
    Spread s;
    s.summary = summarize(values);
    auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    s.min = *lo;
    s.max = *hi;
    return s;
}

} // namespace

std::vector<MusGroupStats> mus_sweep_stats(std::span<const MusSample> samples)
{
    if (samples.empty())
        throw InputError("no MUS samples to summarize");
    std::map<int, std::vector<const MusSample*>> groups;
    for (const auto& sample : samples) {
        if (sample.report.count == 0)
            throw InputError("MUS statistics need unsolvable problems");
        groups[sample.m].push_back(&sample);
    }

    std::vector<MusGroupStats> out;
    for (const auto& [m, members] : groups) {
        MusGroupStats g;
        g.m = m;
        g.problems = members.size();
        std::vector<double> counts;
        std::vector<double> smallest;
        std::vector<double> costs;
        std::uint64_t multiple = 0;
        bool all_costed = true;
        for (const auto* s : members) {
            counts.push_back(static_cast<double>(s->report.count));
            smallest.push_back(static_cast<double>(*s->report.smallest_size));
            multiple += s->report.count > 1 ? 1 : 0;
            if (s->cost)
                costs.push_back(*s->cost);
            else
                all_costed = false;
        }
        g.mus_count = spread_of(counts);
        g.smallest_size = spread_of(smallest);
        g.multiple = fraction_with_ci(multiple, members.size());

        if (all_costed) {
            std::map<int, std::vector<double>> by_size;
            for (std::size_t i = 0; i < members.size(); ++i)
                by_size[static_cast<int>(smallest[i])].push_back(costs[i]);
            for (const auto& [size, group_costs] : by_size)
                g.cost_by_smallest.push_back({size, summarize(group_costs)});
            g.spearman_cost_smallest = spearman(costs, smallest);
            g.spearman_cost_count = spearman(costs, counts);
        }
        out.push_back(std::move(g));
    }
    return out;
}

} // namespace phaselab

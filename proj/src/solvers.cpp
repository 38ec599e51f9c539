#include "phaselab/solvers.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

#include "phaselab/conflict_table.hpp"
#include "phaselab/error.hpp"
#include "phaselab/random.hpp"
#include "phaselab/stats.hpp"

namespace phaselab {

SearchOutcome chronological_backtrack(const Problem& problem, std::uint64_t seed, SearchLimits limits)
{
    const int n = problem.variables();
    const int d = problem.domain();
    ConflictTable table(problem);
    Rng rng(seed);

    SearchOutcome out;
    out.seed = seed;

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span<int>(order));

    std::vector<int> values(static_cast<std::size_t>(n), Assignment::kUnassigned);
    std::vector<int> tries(static_cast<std::size_t>(n) * d);
    std::vector<int> next(static_cast<std::size_t>(n), 0);

    auto enter = [&](int depth) {
        auto row = std::span<int>(tries).subspan(static_cast<std::size_t>(depth) * d, static_cast<std::size_t>(d));
        std::iota(row.begin(), row.end(), 0);
        rng.shuffle(row);
        next[static_cast<std::size_t>(depth)] = 0;
    };

    int depth = 0;
    if (n > 0)
        enter(0);
    while (depth < n) {
        const int x = order[static_cast<std::size_t>(depth)];
        int& cursor = next[static_cast<std::size_t>(depth)];
        if (cursor == d) {
            values[static_cast<std::size_t>(x)] = Assignment::kUnassigned;
            if (depth == 0) {
                out.status = SearchStatus::unsolvable;
                out.assignment = Assignment(std::move(values));
                return out;
            }
            --depth;
            continue;
        }
        if (limits.node_cap != 0 && out.nodes >= limits.node_cap) {
            out.status = SearchStatus::censored;
            out.assignment = Assignment(std::move(values));
            return out;
        }
        const int v = tries[static_cast<std::size_t>(depth) * d + static_cast<std::size_t>(cursor++)];
        ++out.nodes;

        bool consistent = true;
        for (int k = 0; k < depth; ++k) {
            const int y = order[static_cast<std::size_t>(k)];
            if (table.conflicts(x, v, y, values[static_cast<std::size_t>(y)])) {
                consistent = false;
                break;
            }
        }
        if (!consistent)
            continue;
        values[static_cast<std::size_t>(x)] = v;
        ++depth;
        if (depth < n)
            enter(depth);
    }
    out.status = SearchStatus::solution;
    out.assignment = Assignment(std::move(values));
    return out;
}

namespace {

/// State of one dynamic backtracking run. Explanations are variable
/// bitmasks; the assignment stamp orders variables by recency.
class DynamicBacktracker {
public:
    DynamicBacktracker(const Problem& problem, std::uint64_t seed, SearchLimits limits,
                       const EliminationObserver* observer)
        : n_(problem.variables()), d_(problem.domain()), table_(problem), rng_(seed), limits_(limits),
          observer_(observer), values_(static_cast<std::size_t>(n_), Assignment::kUnassigned),
          stamp_(static_cast<std::size_t>(n_), 0), explanation_(static_cast<std::size_t>(n_) * d_, 0),
          eliminated_(static_cast<std::size_t>(n_) * d_, 0)
    {
        if (n_ > 64)
            throw InputError("dynamic backtracking supports at most 64 variables");
        for (int v = 0; v < n_; ++v)
            unassigned_.push_back(v);
    }

    SearchOutcome run(std::uint64_t seed)
    {
        SearchOutcome out;
        out.seed = seed;
        out.status = search();
        out.nodes = nodes_;
        out.assignment = Assignment(values_);
        return out;
    }

private:
    std::size_t cell(int var, int val) const { return static_cast<std::size_t>(var) * d_ + static_cast<std::size_t>(val); }

    void notify() const
    {
        if (observer_)
            (*observer_)(EliminationView{n_, d_, values_, explanation_, eliminated_});
    }

    /// Eliminates values of x that clash with the current assignment. The
    /// explanation is the earliest-assigned clashing variable.
    void refresh(int x)
    {
        for (int v = 0; v < d_; ++v) {
            if (eliminated_[cell(x, v)])
                continue;
            int culprit = -1;
            for (int y = 0; y < n_; ++y) {
                const int w = values_[static_cast<std::size_t>(y)];
                if (w == Assignment::kUnassigned || y == x || !table_.conflicts(x, v, y, w))
                    continue;
                if (culprit < 0 || stamp_[static_cast<std::size_t>(y)] < stamp_[static_cast<std::size_t>(culprit)])
                    culprit = y;
            }
            if (culprit >= 0) {
                eliminated_[cell(x, v)] = 1;
                explanation_[cell(x, v)] = std::uint64_t{1} << culprit;
            }
        }
    }

    void take_unassigned(int x)
    {
        auto it = std::find(unassigned_.begin(), unassigned_.end(), x);
        *it = unassigned_.back();
        unassigned_.pop_back();
    }

    SearchStatus search()
    {
        while (!unassigned_.empty()) {
            int x = unassigned_[static_cast<std::size_t>(rng_.below(static_cast<int>(unassigned_.size())))];
            for (;;) {
                refresh(x);
                int live[32];
                int count = 0;
                for (int v = 0; v < d_; ++v)
                    if (!eliminated_[cell(x, v)])
                        live[count++] = v;

                if (count > 0) {
                    if (limits_.node_cap != 0 && nodes_ >= limits_.node_cap)
                        return SearchStatus::censored;
                    values_[static_cast<std::size_t>(x)] = live[rng_.below(count)];
                    stamp_[static_cast<std::size_t>(x)] = ++clock_;
                    ++nodes_;
                    take_unassigned(x);
                    notify();
                    break;
                }

                // Wipeout: every value of x is eliminated.
                std::uint64_t blame = 0;
                for (int v = 0; v < d_; ++v)
                    blame |= explanation_[cell(x, v)];
                if (blame == 0)
                    return SearchStatus::unsolvable;

                int culprit = -1;
                for (std::uint64_t rest = blame; rest != 0; rest &= rest - 1) {
                    const int y = std::countr_zero(rest);
                    if (culprit < 0 || stamp_[static_cast<std::size_t>(y)] > stamp_[static_cast<std::size_t>(culprit)])
                        culprit = y;
                }
                const int culprit_value = values_[static_cast<std::size_t>(culprit)];
                values_[static_cast<std::size_t>(culprit)] = Assignment::kUnassigned;
                unassigned_.push_back(culprit);

                const std::uint64_t culprit_bit = std::uint64_t{1} << culprit;
                for (std::size_t k = 0; k < explanation_.size(); ++k) {
                    if (eliminated_[k] && (explanation_[k] & culprit_bit)) {
                        eliminated_[k] = 0;
                        explanation_[k] = 0;
                    }
                }
                eliminated_[cell(culprit, culprit_value)] = 1;
                explanation_[cell(culprit, culprit_value)] = blame & ~culprit_bit;
                notify();
                x = culprit;
            }
        }
        return SearchStatus::solution;
    }

    int n_;
    int d_;
    ConflictTable table_;
    Rng rng_;
    SearchLimits limits_;
    const EliminationObserver* observer_;
    std::vector<int> values_;
    std::vector<std::uint64_t> stamp_;
    std::vector<std::uint64_t> explanation_;
    std::vector<std::uint8_t> eliminated_;
    std::vector<int> unassigned_;
    std::uint64_t clock_ = 0;
    std::uint64_t nodes_ = 0;
};

} // namespace

SearchOutcome dynamic_backtrack(const Problem& problem, std::uint64_t seed, SearchLimits limits,
                                const EliminationObserver* observer)
{
    DynamicBacktracker search(problem, seed, limits, observer);
    return search.run(seed);
}

std::string to_string(SolverKind kind)
{
    return kind == SolverKind::chronological ? "chronological" : "dynamic";
}

SolverKind parse_solver(const std::string& name)
{
    if (name == "chronological" || name == "chrono")
        return SolverKind::chronological;
    if (name == "dynamic")
        return SolverKind::dynamic;
    throw InputError("unknown solver '" + name + "' (expected chronological or dynamic)");
}

std::uint64_t run_seed(std::uint64_t base_seed, std::uint64_t problem_id, std::uint64_t run)
{
    return derive_seed(base_seed, problem_id, run);
}

SearchOutcome solve_once(const Problem& problem, SolverKind kind, std::uint64_t seed, SearchLimits limits)
{
    return kind == SolverKind::chronological ? chronological_backtrack(problem, seed, limits)
                                             : dynamic_backtrack(problem, seed, limits);
}

RunCosts aggregate_costs(std::vector<std::uint64_t> nodes, int censored, bool solvable, Aggregate aggregate)
{
    if (nodes.empty())
        throw InputError("no runs to aggregate");
    RunCosts costs;
    costs.censored = censored;
    costs.solvable = solvable;
    std::vector<double> sample(nodes.begin(), nodes.end());
    costs.median = median_with_ci(sample).median;
    costs.mean = mean_with_ci(sample).mean;
    costs.cost = aggregate == Aggregate::median ? costs.median : costs.mean;
    auto [lo, hi] = std::minmax_element(nodes.begin(), nodes.end());
    costs.min = *lo;
    costs.max = *hi;
    costs.nodes = std::move(nodes);
    return costs;
}

RunCosts run_protocol(const Problem& problem, SolverKind kind, const RunProtocol& protocol, std::uint64_t problem_id)
{
    if (protocol.runs < 1)
        throw InputError("run protocol needs at least one run");
    std::vector<std::uint64_t> nodes;
    nodes.reserve(static_cast<std::size_t>(protocol.runs));
    int censored = 0;
    bool solvable = false;
    for (int run = 0; run < protocol.runs; ++run) {
        auto out = solve_once(problem, kind, run_seed(protocol.base_seed, problem_id, static_cast<std::uint64_t>(run)),
                              {protocol.node_cap});
        nodes.push_back(out.nodes);
        censored += out.status == SearchStatus::censored ? 1 : 0;
        solvable = solvable || out.status == SearchStatus::solution;
    }
    return aggregate_costs(std::move(nodes), censored, solvable, protocol.aggregate);
}

} // namespace phaselab

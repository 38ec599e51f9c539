#include "phaselab/generators.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "phaselab/conflict_table.hpp"
#include "phaselab/error.hpp"

namespace phaselab {

std::uint64_t Predicate::decisive_cap() const
{
    switch (kind) {
    case PredicateKind::any:
        return 0;
    case PredicateKind::solvable:
    case PredicateKind::unsolvable:
        return 1;
    case PredicateKind::exactly_k:
        return k + 1;
    case PredicateKind::at_least_k:
        return k;
    }
    return 0;
}

bool Predicate::holds(std::uint64_t capped_count) const
{
    switch (kind) {
    case PredicateKind::any:
        return true;
    case PredicateKind::solvable:
        return capped_count >= 1;
    case PredicateKind::unsolvable:
        return capped_count == 0;
    case PredicateKind::exactly_k:
        return capped_count == k;
    case PredicateKind::at_least_k:
        return capped_count >= k;
    }
    return false;
}

std::string to_string(const Predicate& p)
{
    switch (p.kind) {
    case PredicateKind::any:
        return "any";
    case PredicateKind::solvable:
        return "solvable";
    case PredicateKind::unsolvable:
        return "unsolvable";
    case PredicateKind::exactly_k:
        return "exactly:" + std::to_string(p.k);
    case PredicateKind::at_least_k:
        return "at-least:" + std::to_string(p.k);
    }
    return "?";
}

Predicate parse_predicate(const std::string& text)
{
    if (text == "any")
        return Predicate::any();
    if (text == "solvable")
        return Predicate::solvable();
    if (text == "unsolvable")
        return Predicate::unsolvable();
    auto parse_k = [&](std::size_t prefix) {
        const std::string digits = text.substr(prefix);
        if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }))
            throw InputError("bad solution count in predicate '" + text + "'");
        const auto k = std::stoull(digits);
        if (k == 0)
            throw InputError("solution-count predicates need k >= 1 (use 'unsolvable' for zero)");
        return k;
    };
    if (text.rfind("exactly:", 0) == 0)
        return Predicate::exactly(parse_k(8));
    if (text.rfind("at-least:", 0) == 0)
        return Predicate::at_least(parse_k(9));
    throw InputError("unknown predicate '" + text + "'");
}

std::string to_string(GenMethod method)
{
    switch (method) {
    case GenMethod::generate_select:
        return "generate-select";
    case GenMethod::hill_climb:
        return "hill-climb";
    case GenMethod::prespecified_solution:
        return "prespecified";
    case GenMethod::homogeneous:
        return "homogeneous";
    }
    return "?";
}

GenMethod parse_method(const std::string& text)
{
    if (text == "generate-select" || text == "generate_select")
        return GenMethod::generate_select;
    if (text == "hill-climb" || text == "hill_climb")
        return GenMethod::hill_climb;
    if (text == "prespecified" || text == "prespecified-solution" || text == "prespecified_solution")
        return GenMethod::prespecified_solution;
    if (text == "homogeneous")
        return GenMethod::homogeneous;
    throw InputError("unknown generation method '" + text + "'");
}

void GenSpec::validate() const
{
    params.validate();
    if (max_attempts == 0)
        throw InputError("max_attempts must be positive");
    const auto pairs = static_cast<int>(params.n * (params.n - 1) / 2);
    switch (method) {
    case GenMethod::generate_select:
        break;
    case GenMethod::prespecified_solution:
        if (predicate.kind != PredicateKind::any && predicate.kind != PredicateKind::solvable)
            throw InputError("prespecified-solution generation only supports the any/solvable predicates");
        if (static_cast<std::uint64_t>(params.m) > consistent_nogood_count(params.n, params.d))
            throw InputError("m exceeds the nogoods consistent with a planted solution");
        break;
    case GenMethod::homogeneous:
        if (pairs == 0 ? params.m != 0 : params.m % pairs != 0)
            throw InputError("homogeneous generation needs m divisible by the number of variable pairs");
        break;
    case GenMethod::hill_climb:
        if (predicate.kind != PredicateKind::solvable && predicate.kind != PredicateKind::unsolvable &&
            predicate.kind != PredicateKind::exactly_k)
            throw InputError("hill climbing supports the solvable, unsolvable and exactly:<k> predicates");
        break;
    }
}

namespace {

/// Mutable nogood set over the lexicographic universe with O(1) add/remove
/// and a live conflict table.
class WorkingSet {
public:
    WorkingSet(int n, int d)
        : n_(n), d_(d), universe_(n, d), present_(universe_.size(), 0), slot_(universe_.size(), 0),
          table_(n, d, std::span<const Nogood>{})
    {
        absent_.resize(universe_.size());
        std::iota(absent_.begin(), absent_.end(), std::size_t{0});
        std::iota(slot_.begin(), slot_.end(), std::size_t{0});
    }

    void reset(const Problem& p)
    {
        while (!present_list_.empty())
            remove(present_list_.back());
        for (const auto& g : p.nogoods())
            add(universe_.index(g));
    }

    const NogoodUniverse& universe() const { return universe_; }
    const std::vector<std::size_t>& present_list() const { return present_list_; }
    const std::vector<std::size_t>& absent_list() const { return absent_; }
    bool present(std::size_t idx) const { return present_[idx] != 0; }

    void add(std::size_t idx)
    {
        move(idx, absent_, present_list_);
        present_[idx] = 1;
        table_.add(universe_.at(idx));
    }

    void remove(std::size_t idx)
    {
        move(idx, present_list_, absent_);
        present_[idx] = 0;
        table_.remove(universe_.at(idx));
    }

    Problem problem() const
    {
        std::vector<Nogood> nogoods;
        nogoods.reserve(present_list_.size());
        for (auto idx : present_list_)
            nogoods.push_back(universe_.at(idx));
        return Problem(n_, d_, std::move(nogoods));
    }

    std::vector<Nogood> nogoods_sorted() const { return problem().nogoods(); }

    std::uint64_t count(std::uint64_t cap = 0) const { return count_assignments(table_, cap); }

    /// Solutions gained by dropping the present nogood idx: the assignments
    /// whose only violated nogood is idx.
    std::uint64_t removal_gain(std::size_t idx)
    {
        const Nogood g = universe_.at(idx);
        table_.remove(g);
        std::vector<int> vars(static_cast<std::size_t>(n_));
        std::iota(vars.begin(), vars.end(), 0);
        std::vector<ConflictTable::Mask> domains(static_cast<std::size_t>(n_), table_.full_domain());
        domains[static_cast<std::size_t>(g.var_i)] = ConflictTable::Mask{1} << g.val_i;
        domains[static_cast<std::size_t>(g.var_j)] = ConflictTable::Mask{1} << g.val_j;
        const auto gain = count_assignments(table_, vars, domains);
        table_.add(g);
        return gain;
    }

    /// tally[idx] = number of current solutions that the nogood idx would kill.
    std::vector<std::uint64_t> kill_tally() const
    {
        std::vector<std::uint64_t> tally(universe_.size(), 0);
        for_each_solution(table_, [&](std::span<const int> s) {
            for (int i = 0; i < n_; ++i)
                for (int j = i + 1; j < n_; ++j)
                    ++tally[universe_.index(Nogood{i, s[static_cast<std::size_t>(i)], j, s[static_cast<std::size_t>(j)]})];
        });
        return tally;
    }

private:
    void move(std::size_t idx, std::vector<std::size_t>& from, std::vector<std::size_t>& to)
    {
        const std::size_t pos = slot_[idx];
        const std::size_t last = from.back();
        from[pos] = last;
        slot_[last] = pos;
        from.pop_back();
        slot_[idx] = to.size();
        to.push_back(idx);
    }

    int n_;
    int d_;
    NogoodUniverse universe_;
    std::vector<std::uint8_t> present_;
    std::vector<std::size_t> slot_;
    std::vector<std::size_t> present_list_;
    std::vector<std::size_t> absent_;
    ConflictTable table_;
};

/// Reusable uniform k-subset sampler over [0, size).
class SubsetSampler {
public:
    explicit SubsetSampler(std::size_t size) : items_(size)
    {
        std::iota(items_.begin(), items_.end(), std::size_t{0});
    }

    std::span<const std::size_t> draw(Rng& rng, std::size_t k)
    {
        rng.partial_shuffle(std::span<std::size_t>(items_), k);
        return std::span<const std::size_t>(items_).first(k);
    }

private:
    std::vector<std::size_t> items_;
};

Problem problem_from_indices(const NogoodUniverse& universe, int n, int d, std::span<const std::size_t> indices)
{
    std::vector<Nogood> nogoods;
    nogoods.reserve(indices.size());
    for (auto idx : indices)
        nogoods.push_back(universe.at(idx));
    return Problem(n, d, std::move(nogoods));
}

void check_draw(const ProblemParams& params)
{
    params.validate();
}

/// Greedy swap loop shared by hill_climb_unsolvable and
/// hill_climb_to_k_solutions; `floor` is the target solution count.
Problem greedy_swaps(WorkingSet& set, std::uint64_t floor, Rng& rng, const HillClimbOptions& options,
                     HillClimbStats& stats)
{
    std::uint64_t count = set.count();
    std::uint64_t lowest = count;
    std::uint64_t stalled = 0;
    while (count > floor) {
        if (stats.swaps >= options.swap_budget)
            throw ExhaustionError("hill-climbing swap budget exhausted", stats.swaps);
        if (options.stall_limit != 0 && stalled >= options.stall_limit)
            throw ExhaustionError("hill climbing stalled on a plateau", stats.swaps);
        if (set.present_list().empty())
            throw ExhaustionError("no nogood left to swap", stats.swaps);

        SwapRecord record;
        if (options.trace)
            record.before = set.nogoods_sorted();
        record.count_before = count;

        // (a) the nogood whose removal gains the fewest solutions
        std::uint64_t best_gain = std::numeric_limits<std::uint64_t>::max();
        std::vector<std::size_t> tied;
        for (auto idx : set.present_list()) {
            const auto gain = set.removal_gain(idx);
            if (gain < best_gain) {
                best_gain = gain;
                tied.clear();
            }
            if (gain == best_gain)
                tied.push_back(idx);
        }
        const std::size_t removed = tied[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(tied.size())))];
        set.remove(removed);
        const std::uint64_t relaxed = count + best_gain;

        // (b) a random absent nogood leaving fewer solutions than `count`,
        // searched over a fresh random third of the candidates
        const auto tally = set.kill_tally();
        std::vector<std::size_t> candidates;
        candidates.reserve(set.absent_list().size());
        for (auto idx : set.absent_list())
            if (idx != removed)
                candidates.push_back(idx);
        rng.shuffle(std::span<std::size_t>(candidates));
        const std::size_t scan = (candidates.size() + 2) / 3;

        std::optional<std::size_t> chosen;
        std::optional<std::size_t> fallback;
        std::uint64_t fallback_count = std::numeric_limits<std::uint64_t>::max();
        for (std::size_t k = 0; k < candidates.size(); ++k) {
            const auto idx = candidates[k];
            const std::uint64_t after = relaxed - tally[idx];
            if (after < floor)
                continue;
            if (k < scan && after < count) {
                chosen = idx;
                break;
            }
            if (after < fallback_count) {
                fallback_count = after;
                fallback = idx;
            }
            // Past the scanned third only an admissible fallback is sought.
            if (k + 1 >= scan && fallback)
                break;
        }
        record.backwards = !chosen.has_value();
        if (!chosen)
            chosen = fallback.has_value() ? *fallback : removed;
        set.add(*chosen);
        count = relaxed - (*chosen == removed ? best_gain : tally[*chosen]);
        ++stats.swaps;
        if (count < lowest) {
            lowest = count;
            stalled = 0;
        } else {
            ++stalled;
        }

        if (options.trace) {
            record.removed = set.universe().at(removed);
            record.removal_gain = best_gain;
            record.tied = static_cast<int>(tied.size());
            record.added = set.universe().at(*chosen);
            record.count_after = count;
            options.trace->push_back(std::move(record));
        }
    }
    return set.problem();
}

} // namespace

Problem generate_select(const ProblemParams& params, Rng& rng)
{
    check_draw(params);
    NogoodUniverse universe(params.n, params.d);
    SubsetSampler sampler(universe.size());
    return problem_from_indices(universe, params.n, params.d, sampler.draw(rng, static_cast<std::size_t>(params.m)));
}

PlantedProblem generate_prespecified_solution(const ProblemParams& params, Rng& rng)
{
    params.validate();
    if (static_cast<std::uint64_t>(params.m) > consistent_nogood_count(params.n, params.d))
        throw InputError("m exceeds the nogoods consistent with a planted solution");
    std::vector<int> values(static_cast<std::size_t>(params.n));
    for (auto& v : values)
        v = rng.below(params.d);

    NogoodUniverse universe(params.n, params.d);
    std::vector<Nogood> allowed;
    allowed.reserve(static_cast<std::size_t>(consistent_nogood_count(params.n, params.d)));
    for (const auto& g : universe.all())
        if (values[static_cast<std::size_t>(g.var_i)] != g.val_i || values[static_cast<std::size_t>(g.var_j)] != g.val_j)
            allowed.push_back(g);
    rng.partial_shuffle(std::span<Nogood>(allowed), static_cast<std::size_t>(params.m));
    allowed.resize(static_cast<std::size_t>(params.m));
    return {Problem(params.n, params.d, std::move(allowed)), Assignment(std::move(values))};
}

Problem generate_homogeneous(int n, int d, int per_pair, Rng& rng)
{
    if (n < 1 || d < 1)
        throw InputError("n and d must be positive");
    if (per_pair < 0 || per_pair > d * d)
        throw InputError("per_pair must lie in [0, d^2]");
    std::vector<Nogood> nogoods;
    std::vector<int> cells(static_cast<std::size_t>(d * d));
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            std::iota(cells.begin(), cells.end(), 0);
            rng.partial_shuffle(std::span<int>(cells), static_cast<std::size_t>(per_pair));
            for (int k = 0; k < per_pair; ++k)
                nogoods.push_back({i, cells[static_cast<std::size_t>(k)] / d, j, cells[static_cast<std::size_t>(k)] % d});
        }
    }
    return Problem(n, d, std::move(nogoods));
}

Problem hill_climb_solvable(const ProblemParams& params, Rng& rng, std::uint64_t max_restarts, HillClimbStats* stats)
{
    params.validate();
    HillClimbStats local;
    HillClimbStats& st = stats ? *stats : local;
    WorkingSet set(params.n, params.d);
    SubsetSampler sampler(set.universe().size());
    const int n = params.n;

    for (;;) {
        // Random unsolvable seed problem.
        for (;;) {
            ++st.attempts;
            set.reset(problem_from_indices(set.universe(), params.n, params.d,
                                           sampler.draw(rng, static_cast<std::size_t>(params.m))));
            if (set.count(1) == 0)
                break;
            if (st.attempts >= 1'000'000)
                throw ExhaustionError("no unsolvable starting problem found", st.attempts);
        }

        std::size_t removed = 0;
        while (set.count(1) == 0) {
            const auto& present = set.present_list();
            set.remove(present[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(present.size())))]);
            ++removed;
        }

        std::vector<int> solutions;
        for_each_solution(ConflictTable(set.problem()), [&](std::span<const int> s) {
            solutions.insert(solutions.end(), s.begin(), s.end());
        });

        bool stuck = false;
        for (std::size_t r = 0; r < removed && !stuck; ++r) {
            std::vector<std::size_t> candidates(set.absent_list().begin(), set.absent_list().end());
            rng.shuffle(std::span<std::size_t>(candidates));
            const std::size_t stride = static_cast<std::size_t>(n);
            const std::size_t total = solutions.size() / stride;
            std::optional<std::size_t> pick;
            for (auto idx : candidates) {
                const Nogood g = set.universe().at(idx);
                for (std::size_t s = 0; s < total; ++s) {
                    const int* row = &solutions[s * stride];
                    if (row[g.var_i] != g.val_i || row[g.var_j] != g.val_j) {
                        pick = idx;
                        break;
                    }
                }
                if (pick)
                    break;
            }
            if (!pick) {
                stuck = true;
                break;
            }
            set.add(*pick);
            const Nogood g = set.universe().at(*pick);
            std::vector<int> kept;
            kept.reserve(solutions.size());
            for (std::size_t s = 0; s < total; ++s) {
                const int* row = &solutions[s * stride];
                if (row[g.var_i] != g.val_i || row[g.var_j] != g.val_j)
                    kept.insert(kept.end(), row, row + stride);
            }
            solutions.swap(kept);
        }
        if (!stuck)
            return set.problem();
        if (st.restarts >= max_restarts)
            throw ExhaustionError("hill climbing toward solvable kept getting stuck", st.attempts);
        ++st.restarts;
    }
}

Problem hill_climb_unsolvable(const ProblemParams& params, Rng& rng, const HillClimbOptions& options,
                              HillClimbStats* stats)
{
    params.validate();
    HillClimbStats local;
    HillClimbStats& st = stats ? *stats : local;
    WorkingSet set(params.n, params.d);
    SubsetSampler sampler(set.universe().size());
    for (;;) {
        ++st.attempts;
        set.reset(problem_from_indices(set.universe(), params.n, params.d,
                                       sampler.draw(rng, static_cast<std::size_t>(params.m))));
        if (set.count(1) == 1)
            break;
        if (st.attempts >= 1'000'000)
            throw ExhaustionError("no solvable starting problem found", st.attempts);
    }
    return greedy_swaps(set, 0, rng, options, st);
}

Problem hill_climb_to_k_solutions(const Problem& start, std::uint64_t k, Rng& rng, const HillClimbOptions& options,
                                  HillClimbStats* stats)
{
    if (k == 0)
        throw InputError("target solution count must be positive (use hill_climb_unsolvable for zero)");
    if (count_solutions(start, k).count < k)
        throw InputError("starting problem has fewer than k solutions");
    HillClimbStats local;
    HillClimbStats& st = stats ? *stats : local;
    WorkingSet set(start.variables(), start.domain());
    set.reset(start);
    return greedy_swaps(set, k, rng, options, st);
}

namespace {

/// One candidate from a non-hill-climbing base method plus the capped
/// solution count needed to decide the predicate.
struct Candidate {
    Problem problem;
    std::uint64_t capped = 0;
};

class BaseDrawer {
public:
    explicit BaseDrawer(const GenSpec& spec)
        : spec_(spec), universe_(spec.params.n, spec.params.d), sampler_(universe_.size()),
          cap_(spec.predicate.decisive_cap())
    {
    }

    /// Returns the capped count; keeps the nogood indices of the last draw.
    std::uint64_t draw(Rng& rng)
    {
        const auto& p = spec_.params;
        switch (spec_.method) {
        case GenMethod::generate_select: {
            auto picked = sampler_.draw(rng, static_cast<std::size_t>(p.m));
            last_.assign(picked.begin(), picked.end());
            last_problem_.reset();
            break;
        }
        case GenMethod::prespecified_solution:
            last_problem_ = generate_prespecified_solution(p, rng).problem;
            break;
        case GenMethod::homogeneous: {
            const int pairs = p.n * (p.n - 1) / 2;
            last_problem_ = generate_homogeneous(p.n, p.d, pairs == 0 ? 0 : p.m / pairs, rng);
            break;
        }
        case GenMethod::hill_climb:
            throw InputError("hill climbing is not a base drawing method");
        }
        if (cap_ == 0)
            return 0;
        if (last_problem_)
            return count_assignments(ConflictTable(*last_problem_), cap_);
        std::vector<Nogood> nogoods;
        nogoods.reserve(last_.size());
        for (auto idx : last_)
            nogoods.push_back(universe_.at(idx));
        return count_assignments(ConflictTable(p.n, p.d, nogoods), cap_);
    }

    Problem last_problem() const
    {
        if (last_problem_)
            return *last_problem_;
        return problem_from_indices(universe_, spec_.params.n, spec_.params.d, last_);
    }

    std::uint64_t cap() const { return cap_; }

private:
    const GenSpec& spec_;
    NogoodUniverse universe_;
    SubsetSampler sampler_;
    std::uint64_t cap_;
    std::vector<std::size_t> last_;
    std::optional<Problem> last_problem_;
};

std::optional<SolutionCount> capped_count(std::uint64_t cap, std::uint64_t count)
{
    if (cap == 0)
        return std::nullopt;
    return SolutionCount{count, count >= cap};
}

} // namespace

GenResult generate_with_predicate(const GenSpec& spec)
{
    spec.validate();
    Rng rng(spec.seed);
    GenResult result;

    if (spec.method != GenMethod::hill_climb) {
        BaseDrawer drawer(spec);
        for (std::uint64_t attempt = 1; attempt <= spec.max_attempts; ++attempt) {
            const auto count = drawer.draw(rng);
            if (spec.predicate.holds(count)) {
                result.problem = drawer.last_problem();
                result.attempts = attempt;
                result.solution_count = capped_count(drawer.cap(), count);
                return result;
            }
        }
        throw ExhaustionError("no candidate satisfied predicate " + to_string(spec.predicate) + " in " +
                                  std::to_string(spec.max_attempts) + " attempts",
                              spec.max_attempts);
    }

    HillClimbOptions options;
    options.swap_budget = spec.swap_budget;
    switch (spec.predicate.kind) {
    case PredicateKind::solvable: {
        HillClimbStats stats;
        result.problem = hill_climb_solvable(spec.params, rng, spec.max_attempts, &stats);
        result.attempts = stats.restarts + 1;
        result.solution_count = SolutionCount{1, true};
        return result;
    }
    case PredicateKind::unsolvable:
    case PredicateKind::exactly_k: {
        const std::uint64_t target = spec.predicate.kind == PredicateKind::unsolvable ? 0 : spec.predicate.k;
        for (std::uint64_t attempt = 1; attempt <= spec.max_attempts; ++attempt) {
            HillClimbStats stats;
            try {
                if (target == 0) {
                    result.problem = hill_climb_unsolvable(spec.params, rng, options, &stats);
                } else {
                    // Start from a generate-select problem with at least k solutions.
                    GenSpec start = spec;
                    start.method = GenMethod::generate_select;
                    start.predicate = Predicate::at_least(target);
                    start.seed = rng.next();
                    auto seed_problem = generate_with_predicate(start).problem;
                    result.problem = hill_climb_to_k_solutions(seed_problem, target, rng, options, &stats);
                }
            } catch (const ExhaustionError&) {
                continue;
            }
            result.attempts = attempt;
            result.swaps = stats.swaps;
            result.solution_count = SolutionCount{target, false};
            return result;
        }
        throw ExhaustionError("hill climbing exhausted its swap budget on every attempt", spec.max_attempts);
    }
    default:
        throw InputError("hill climbing supports the solvable, unsolvable and exactly:<k> predicates");
    }
}

std::uint64_t count_predicate_hits(const GenSpec& spec, std::uint64_t trials)
{
    spec.validate();
    if (spec.method == GenMethod::hill_climb)
        throw InputError("hit frequencies are defined for the base drawing methods only");
    Rng rng(spec.seed);
    BaseDrawer drawer(spec);
    std::uint64_t hits = 0;
    for (std::uint64_t t = 0; t < trials; ++t)
        hits += spec.predicate.holds(drawer.draw(rng)) ? 1 : 0;
    return hits;
}

} // namespace phaselab

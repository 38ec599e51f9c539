#include "phaselab/conflict_table.hpp"

#include <numeric>

#include "phaselab/error.hpp"

namespace phaselab {

ConflictTable::ConflictTable(int n, int d, std::span<const Nogood> nogoods)
    : n_(n), d_(d), full_(d >= 32 ? ~Mask{0} : (Mask{1} << d) - 1),
      table_(static_cast<std::size_t>(n) * d * n, 0)
{
    if (d < 1 || d > 32)
        throw InputError("domain size must be in [1, 32] for the search kernels");
    for (const auto& g : nogoods)
        add(g);
}

ConflictTable::ConflictTable(const Problem& problem)
    : ConflictTable(problem.variables(), problem.domain(), problem.nogoods())
{
}

void ConflictTable::add(const Nogood& g)
{
    cell(g.var_i, g.val_i, g.var_j) |= Mask{1} << g.val_j;
    cell(g.var_j, g.val_j, g.var_i) |= Mask{1} << g.val_i;
}

void ConflictTable::remove(const Nogood& g)
{
    cell(g.var_i, g.val_i, g.var_j) &= ~(Mask{1} << g.val_j);
    cell(g.var_j, g.val_j, g.var_i) &= ~(Mask{1} << g.val_i);
}

namespace {

using Mask = ConflictTable::Mask;

class Enumerator {
public:
    Enumerator(const ConflictTable& table, std::span<const int> vars, std::uint64_t cap,
               const std::function<void(std::span<const int>)>* visit)
        : table_(table), n_(table.variables()), vars_(vars.begin(), vars.end()), cap_(cap),
          visit_(visit), levels_(static_cast<std::size_t>(n_) * (vars.size() + 1), 0)
    {
        if (visit_)
            values_.assign(static_cast<std::size_t>(n_), Assignment::kUnassigned);
    }

    std::uint64_t run(std::span<const Mask> domains)
    {
        for (int v : vars_)
            levels_[static_cast<std::size_t>(v)] = domains[static_cast<std::size_t>(v)];
        for (int v : vars_)
            if (levels_[static_cast<std::size_t>(v)] == 0)
                return 0;
        descend(0, vars_.size());
        return count_;
    }

private:
    bool done() const { return cap_ != 0 && count_ >= cap_; }

    void leaf_values(int x, Mask dom)
    {
        while (dom != 0 && !done()) {
            int v = std::countr_zero(dom);
            dom &= dom - 1;
            values_[static_cast<std::size_t>(x)] = v;
            (*visit_)(values_);
            ++count_;
        }
    }

    void descend(std::size_t level, std::size_t remaining)
    {
        if (remaining == 0) {
            if (visit_)
                (*visit_)(values_);
            ++count_;
            return;
        }
        const Mask* dom = &levels_[level * static_cast<std::size_t>(n_)];

        std::size_t pick = 0;
        int best = 33;
        for (std::size_t k = 0; k < remaining; ++k) {
            int size = std::popcount(dom[vars_[k]]);
            if (size < best) {
                best = size;
                pick = k;
            }
        }
        std::swap(vars_[pick], vars_[remaining - 1]);
        const int x = vars_[remaining - 1];
        Mask values = dom[x];

        if (remaining == 1) {
            if (visit_) {
                leaf_values(x, values);
            } else {
                count_ += static_cast<std::uint64_t>(std::popcount(values));
                if (cap_ != 0 && count_ > cap_)
                    count_ = cap_;
            }
            return;
        }

        Mask* next = &levels_[(level + 1) * static_cast<std::size_t>(n_)];
        while (values != 0 && !done()) {
            int v = std::countr_zero(values);
            values &= values - 1;
            bool wiped = false;
            for (std::size_t k = 0; k + 1 < remaining; ++k) {
                int y = vars_[k];
                Mask narrowed = dom[y] & ~table_.forbidden(x, v, y);
                next[y] = narrowed;
                if (narrowed == 0) {
                    wiped = true;
                    break;
                }
            }
            if (wiped)
                continue;
            if (visit_)
                values_[static_cast<std::size_t>(x)] = v;
            descend(level + 1, remaining - 1);
        }
    }

    const ConflictTable& table_;
    int n_;
    std::vector<int> vars_;
    std::uint64_t cap_;
    const std::function<void(std::span<const int>)>* visit_;
    std::vector<Mask> levels_;
    std::vector<int> values_;
    std::uint64_t count_ = 0;
};

} // namespace

std::uint64_t count_assignments(const ConflictTable& table, std::span<const int> vars,
                                std::span<const Mask> domains, std::uint64_t cap)
{
    Enumerator e(table, vars, cap, nullptr);
    return e.run(domains);
}

std::uint64_t count_assignments(const ConflictTable& table, std::uint64_t cap)
{
    std::vector<int> vars(static_cast<std::size_t>(table.variables()));
    std::iota(vars.begin(), vars.end(), 0);
    std::vector<Mask> domains(vars.size(), table.full_domain());
    return count_assignments(table, vars, domains, cap);
}

bool subset_solvable(const ConflictTable& table, std::uint64_t var_mask)
{
    std::vector<int> vars;
    for (int v = 0; v < table.variables(); ++v)
        if ((var_mask >> v) & 1U)
            vars.push_back(v);
    std::vector<Mask> domains(static_cast<std::size_t>(table.variables()), table.full_domain());
    return count_assignments(table, vars, domains, 1) >= 1;
}

void for_each_solution(const ConflictTable& table,
                       const std::function<void(std::span<const int>)>& visit)
{
    std::vector<int> vars(static_cast<std::size_t>(table.variables()));
    std::iota(vars.begin(), vars.end(), 0);
    std::vector<Mask> domains(vars.size(), table.full_domain());
    Enumerator e(table, vars, 0, &visit);
    e.run(domains);
}

} // namespace phaselab

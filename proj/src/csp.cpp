#include "phaselab/csp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "phaselab/conflict_table.hpp"
#include "phaselab/error.hpp"

namespace phaselab {

std::uint64_t total_nogood_count(int n, int d)
{
    const auto pairs = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n - 1) / 2;
    return pairs * static_cast<std::uint64_t>(d) * static_cast<std::uint64_t>(d);
}

std::uint64_t consistent_nogood_count(int n, int d)
{
    const auto pairs = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n - 1) / 2;
    return pairs * (static_cast<std::uint64_t>(d) * static_cast<std::uint64_t>(d) - 1);
}

void ProblemParams::validate() const
{
    if (n < 1 || d < 1)
        throw InputError("n and d must be positive");
    if (m < 0 || static_cast<std::uint64_t>(m) > total_nogood_count(n, d))
        throw InputError("nogood count m=" + std::to_string(m) + " out of range [0, " +
                         std::to_string(total_nogood_count(n, d)) + "]");
}

Nogood Nogood::make(int var_a, int val_a, int var_b, int val_b)
{
    if (var_a == var_b)
        throw InputError("nogood must involve two distinct variables");
    if (var_a < var_b)
        return {var_a, val_a, var_b, val_b};
    return {var_b, val_b, var_a, val_a};
}

NogoodUniverse::NogoodUniverse(int n, int d)
    : n_(n), d_(d), size_(static_cast<std::size_t>(total_nogood_count(n, d)))
{
    row_offset_.resize(static_cast<std::size_t>(n) + 1, 0);
    for (int i = 0; i < n; ++i)
        row_offset_[static_cast<std::size_t>(i) + 1] =
            row_offset_[static_cast<std::size_t>(i)] + static_cast<std::size_t>(d) * d * (n - 1 - i);
    nogoods_.reserve(size_);
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < d; ++a)
            for (int j = i + 1; j < n; ++j)
                for (int b = 0; b < d; ++b)
                    nogoods_.push_back({i, a, j, b});
}

std::size_t NogoodUniverse::index(const Nogood& g) const
{
    const auto width = static_cast<std::size_t>(n_ - 1 - g.var_i) * d_;
    return row_offset_[static_cast<std::size_t>(g.var_i)] + static_cast<std::size_t>(g.val_i) * width +
           static_cast<std::size_t>(g.var_j - g.var_i - 1) * d_ + static_cast<std::size_t>(g.val_j);
}

Problem::Problem(int n, int d, std::vector<Nogood> nogoods) : n_(n), d_(d), nogoods_(std::move(nogoods))
{
    // n = 0 is allowed only as the vacuous induced subproblem.
    if (n < 0 || d < 1)
        throw InputError("n must be non-negative and d positive");
    for (auto& g : nogoods_) {
        if (g.var_i < 0 || g.var_i >= n || g.var_j < 0 || g.var_j >= n)
            throw InputError("nogood variable index out of range");
        if (g.val_i < 0 || g.val_i >= d || g.val_j < 0 || g.val_j >= d)
            throw InputError("nogood value index out of range");
        g = Nogood::make(g.var_i, g.val_i, g.var_j, g.val_j);
    }
    std::sort(nogoods_.begin(), nogoods_.end());
    if (std::adjacent_find(nogoods_.begin(), nogoods_.end()) != nogoods_.end())
        throw InputError("duplicate nogood");
}

bool Problem::contains(const Nogood& g) const
{
    return std::binary_search(nogoods_.begin(), nogoods_.end(), g);
}

bool Assignment::complete() const
{
    return std::none_of(values_.begin(), values_.end(), [](int v) { return v == kUnassigned; });
}

bool is_consistent(const Problem& problem, const Assignment& assignment)
{
    if (assignment.size() != problem.variables())
        throw InputError("assignment covers " + std::to_string(assignment.size()) + " variables, problem has " +
                         std::to_string(problem.variables()));
    for (int v : assignment.values())
        if (v != Assignment::kUnassigned && (v < 0 || v >= problem.domain()))
            throw InputError("assigned value out of range");
    for (const auto& g : problem.nogoods())
        if (assignment[g.var_i] == g.val_i && assignment[g.var_j] == g.val_j)
            return false;
    return true;
}

SolutionCount count_solutions(const Problem& problem, std::optional<std::uint64_t> cap)
{
    if (cap && *cap == 0)
        throw InputError("solution cap must be positive");
    ConflictTable table(problem);
    const std::uint64_t limit = cap.value_or(0);
    const std::uint64_t count = count_assignments(table, limit);
    return {count, limit != 0 && count >= limit};
}

std::uint64_t count_solutions_exhaustive(const Problem& problem)
{
    const int n = problem.variables();
    const int d = problem.domain();
    double total = std::pow(static_cast<double>(d), n);
    if (total > 1e6)
        throw InputError("exhaustive enumeration limited to d^n <= 10^6");
    std::vector<int> values(static_cast<std::size_t>(n), 0);
    std::uint64_t solutions = 0;
    const auto limit = static_cast<std::uint64_t>(total);
    for (std::uint64_t code = 0; code < limit; ++code) {
        std::uint64_t rest = code;
        for (int v = 0; v < n; ++v) {
            values[static_cast<std::size_t>(v)] = static_cast<int>(rest % static_cast<std::uint64_t>(d));
            rest /= static_cast<std::uint64_t>(d);
        }
        bool ok = true;
        for (const auto& g : problem.nogoods()) {
            if (values[static_cast<std::size_t>(g.var_i)] == g.val_i &&
                values[static_cast<std::size_t>(g.var_j)] == g.val_j) {
                ok = false;
                break;
            }
        }
        solutions += ok ? 1 : 0;
    }
    return solutions;
}

bool is_solvable(const Problem& problem)
{
    return count_solutions(problem, 1).count >= 1;
}

double expected_solution_count(int n, int d, int m)
{
    ProblemParams{n, d, m}.validate();
    const auto universe = static_cast<double>(total_nogood_count(n, d));
    const auto allowed = static_cast<double>(consistent_nogood_count(n, d));
    if (static_cast<double>(m) > allowed)
        return 0.0;
    // d^n * prod_{k<m} (allowed - k) / (universe - k); every factor is <= 1,
    // so the running product cannot overflow.
    double value = std::pow(static_cast<double>(d), n);
    for (int k = 0; k < m; ++k)
        value *= (allowed - k) / (universe - k);
    return value;
}

namespace {

double log_binomial(double top, double k)
{
    return std::lgamma(top + 1.0) - std::lgamma(k + 1.0) - std::lgamma(top - k + 1.0);
}

} // namespace

double predicted_crossover(int n, int d)
{
    if (n < 2)
        throw InputError("crossover needs at least two variables");
    if (d < 2)
        throw InputError("crossover needs a domain of at least two values");
    const auto universe = static_cast<double>(total_nogood_count(n, d));
    const auto allowed = static_cast<double>(consistent_nogood_count(n, d));
    const double log_assignments = n * std::log(static_cast<double>(d));
    auto log_expected = [&](double m) {
        return log_assignments + log_binomial(allowed, m) - log_binomial(universe, m);
    };

    // log_expected is positive at 0 and strictly decreasing in m.
    double lo = 0.0;
    double hi = allowed;
    while (hi - lo > 1e-4) {
        const double mid = 0.5 * (lo + hi);
        if (log_expected(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<Nogood> enumerate_all_nogoods(int n, int d)
{
    return NogoodUniverse(n, d).all();
}

Subproblem induced_subproblem(const Problem& problem, std::span<const int> vars)
{
    const int n = problem.variables();
    std::vector<int> local(static_cast<std::size_t>(n), -1);
    std::vector<int> original(vars.begin(), vars.end());
    std::sort(original.begin(), original.end());
    original.erase(std::unique(original.begin(), original.end()), original.end());
    for (std::size_t k = 0; k < original.size(); ++k) {
        if (original[k] < 0 || original[k] >= n)
            throw InputError("subproblem variable out of range");
        local[static_cast<std::size_t>(original[k])] = static_cast<int>(k);
    }

    std::vector<Nogood> kept;
    for (const auto& g : problem.nogoods()) {
        int a = local[static_cast<std::size_t>(g.var_i)];
        int b = local[static_cast<std::size_t>(g.var_j)];
        if (a >= 0 && b >= 0)
            kept.push_back({a, g.val_i, b, g.val_j});
    }
    Subproblem sub;
    sub.original = std::move(original);
    sub.problem = Problem(static_cast<int>(sub.original.size()), problem.domain(), std::move(kept));
    return sub;
}

void write_problem(std::ostream& out, const Problem& problem)
{
    out << "csp " << problem.variables() << ' ' << problem.domain() << ' ' << problem.size() << '\n';
    for (const auto& g : problem.nogoods())
        out << g.var_i << ' ' << g.val_i << ' ' << g.var_j << ' ' << g.val_j << '\n';
}

Problem read_problem(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line))
        throw InputError("empty instance file");
    std::istringstream header(line);
    std::string tag;
    long long n = 0;
    long long d = 0;
    long long m = 0;
    if (!(header >> tag >> n >> d >> m) || tag != "csp")
        throw InputError("expected header 'csp <n> <d> <m>'");
    std::string trailing;
    if (header >> trailing)
        throw InputError("trailing data in header");
    if (n < 1 || d < 1 || m < 0 || n > 1'000'000 || d > 1'000'000)
        throw InputError("header values out of range");
    ProblemParams{static_cast<int>(n), static_cast<int>(d), static_cast<int>(m)}.validate();

    std::vector<Nogood> nogoods;
    nogoods.reserve(static_cast<std::size_t>(m));
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::istringstream row(line);
        Nogood g;
        if (!(row >> g.var_i >> g.val_i >> g.var_j >> g.val_j) || (row >> trailing))
            throw InputError("malformed nogood line: '" + line + "'");
        if (g.var_i >= g.var_j)
            throw InputError("nogood not in canonical order: '" + line + "'");
        if (!nogoods.empty()) {
            if (g == nogoods.back())
                throw InputError("duplicate nogood: '" + line + "'");
            if (g < nogoods.back())
                throw InputError("nogoods not sorted: '" + line + "'");
        }
        nogoods.push_back(g);
    }
    if (static_cast<long long>(nogoods.size()) != m)
        throw InputError("header declares " + std::to_string(m) + " nogoods, found " +
                         std::to_string(nogoods.size()));
    return Problem(static_cast<int>(n), static_cast<int>(d), std::move(nogoods));
}

void save_problem(const std::string& path, const Problem& problem)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open for writing", path);
    write_problem(out, problem);
    if (!out)
        throw IoError("write failed", path);
}

Problem load_problem(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open for reading", path);
    return read_problem(in);
}

} // namespace phaselab

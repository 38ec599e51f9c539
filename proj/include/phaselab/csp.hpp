#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace phaselab {

/// Size parameters of a random binary CSP: n variables sharing a domain of
/// d values, constrained by m binary nogoods.
struct ProblemParams {
    int n = 0;
    int d = 0;
    int m = 0;

    /// Throws InputError unless n, d >= 1 and 0 <= m <= total_nogood_count(n, d).
    void validate() const;

    friend bool operator==(const ProblemParams&, const ProblemParams&) = default;
};

/// C(n,2) * d^2, the number of distinct binary nogoods.
std::uint64_t total_nogood_count(int n, int d);

/// C(n,2) * (d^2 - 1), the number of nogoods that leave a fixed complete
/// assignment consistent.
std::uint64_t consistent_nogood_count(int n, int d);

/// A forbidden pair of variable-value assignments. Always stored with
/// var_i < var_j; make() swaps the pairs when needed.
struct Nogood {
    int var_i = 0;
    int val_i = 0;
    int var_j = 0;
    int val_j = 0;

    static Nogood make(int var_a, int val_a, int var_b, int val_b);

    friend auto operator<=>(const Nogood&, const Nogood&) = default;
};

/// Lexicographic ranking of the nogood universe for fixed (n, d).
class NogoodUniverse {
public:
    NogoodUniverse(int n, int d);

    std::size_t size() const { return size_; }
    std::size_t index(const Nogood& g) const;
    Nogood at(std::size_t index) const { return nogoods_[index]; }
    const std::vector<Nogood>& all() const { return nogoods_; }

private:
    int n_;
    int d_;
    std::size_t size_;
    std::vector<std::size_t> row_offset_;
    std::vector<Nogood> nogoods_;
};

/// A binary CSP with a uniform domain. Immutable once built; the nogood list
/// is canonical, sorted and duplicate-free.
class Problem {
public:
    Problem() = default;

    /// Canonicalizes and sorts the nogoods. Throws InputError on bad indices
    /// or duplicate nogoods.
    Problem(int n, int d, std::vector<Nogood> nogoods);

    int variables() const { return n_; }
    int domain() const { return d_; }
    std::size_t size() const { return nogoods_.size(); }
    ProblemParams params() const { return {n_, d_, static_cast<int>(nogoods_.size())}; }
    const std::vector<Nogood>& nogoods() const { return nogoods_; }

    bool contains(const Nogood& g) const;

    friend bool operator==(const Problem&, const Problem&) = default;

private:
    int n_ = 0;
    int d_ = 0;
    std::vector<Nogood> nogoods_;
};

/// Possibly partial assignment of values to variables.
class Assignment {
public:
    static constexpr int kUnassigned = -1;

    Assignment() = default;
    explicit Assignment(int n) : values_(static_cast<std::size_t>(n), kUnassigned) {}
    explicit Assignment(std::vector<int> values) : values_(std::move(values)) {}

    int size() const { return static_cast<int>(values_.size()); }
    int operator[](int var) const { return values_[static_cast<std::size_t>(var)]; }
    bool assigned(int var) const { return values_[static_cast<std::size_t>(var)] != kUnassigned; }
    bool complete() const;

    void set(int var, int value) { values_[static_cast<std::size_t>(var)] = value; }
    void clear(int var) { values_[static_cast<std::size_t>(var)] = kUnassigned; }

    const std::vector<int>& values() const { return values_; }

    friend bool operator==(const Assignment&, const Assignment&) = default;

private:
    std::vector<int> values_;
};

struct SolutionCount {
    std::uint64_t count = 0;
    bool capped = false;

    friend bool operator==(const SolutionCount&, const SolutionCount&) = default;
};

/// True iff no nogood has both of its variable-value pairs in the assignment.
/// The assignment must cover exactly the problem's variables (unassigned
/// entries allowed); out-of-range values throw InputError.
bool is_consistent(const Problem& problem, const Assignment& assignment);

/// Number of complete consistent assignments, stopping at cap when given.
SolutionCount count_solutions(const Problem& problem, std::optional<std::uint64_t> cap = std::nullopt);

/// Reference counter: tests every one of the d^n complete assignments.
/// Refuses (InputError) when d^n exceeds 10^6.
std::uint64_t count_solutions_exhaustive(const Problem& problem);

bool is_solvable(const Problem& problem);

/// d^n * C(A, m) / C(B, m) with A = C(n,2)(d^2-1), B = C(n,2)d^2.
double expected_solution_count(int n, int d, int m);

/// Real m at which the expected solution count (binomials continued through
/// lgamma) equals one. Requires n >= 2 and d >= 2.
double predicted_crossover(int n, int d);

std::vector<Nogood> enumerate_all_nogoods(int n, int d);

struct Subproblem {
    Problem problem;
    /// original[k] is the index in the parent problem of subproblem variable k.
    std::vector<int> original;
};

/// Restriction of a problem to a set of variables, reindexed 0..|vars|-1 in
/// increasing order of the original indices.
Subproblem induced_subproblem(const Problem& problem, std::span<const int> vars);

// Instance file format:
//   csp <n> <d> <m>
//   <var_i> <val_i> <var_j> <val_j>     (m lines, canonical, sorted)

void write_problem(std::ostream& out, const Problem& problem);
Problem read_problem(std::istream& in);

void save_problem(const std::string& path, const Problem& problem);
Problem load_problem(const std::string& path);

} // namespace phaselab

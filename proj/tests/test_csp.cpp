#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "phaselab/conflict_table.hpp"
#include "phaselab/csp.hpp"
#include "phaselab/error.hpp"
#include "phaselab/random.hpp"

using namespace phaselab;

namespace {

Problem pair_blocked(int n, int d, int a, int b)
{
    std::vector<Nogood> nogoods;
    for (int x = 0; x < d; ++x)
        for (int y = 0; y < d; ++y)
            nogoods.push_back(Nogood::make(a, x, b, y));
    return Problem(n, d, nogoods);
}

Problem random_problem(Rng& rng, int n, int d, int m)
{
    auto universe = enumerate_all_nogoods(n, d);
    rng.partial_shuffle(std::span<Nogood>(universe), static_cast<std::size_t>(m));
    universe.resize(static_cast<std::size_t>(m));
    return Problem(n, d, universe);
}

} // namespace

TEST_CASE("is_consistent")
{
    Problem p(2, 2, {{0, 0, 1, 0}});
    CHECK(is_consistent(p, Assignment(2)));
    CHECK_FALSE(is_consistent(p, Assignment(std::vector<int>{0, 0})));
    CHECK(is_consistent(p, Assignment(std::vector<int>{0, Assignment::kUnassigned})));
    CHECK(is_consistent(p, Assignment(std::vector<int>{1, 0})));
    CHECK_THROWS_AS(is_consistent(p, Assignment(std::vector<int>{2, 0})), InputError);
    CHECK_THROWS_AS(is_consistent(p, Assignment(3)), InputError);
}

TEST_CASE("count_solutions examples")
{
    CHECK(count_solutions(Problem(10, 3, {})) == SolutionCount{59049, false});
    CHECK(count_solutions(pair_blocked(2, 2, 0, 1)).count == 0);
    CHECK(count_solutions(Problem(2, 2, {{0, 0, 1, 0}, {0, 0, 1, 1}, {0, 1, 1, 0}})).count == 1);

    auto capped = count_solutions(Problem(10, 3, {}), 100);
    CHECK(capped.count == 100);
    CHECK(capped.capped);
    CHECK_THROWS_AS(count_solutions(Problem(2, 2, {}), 0), InputError);
}

TEST_CASE("is_solvable")
{
    CHECK(is_solvable(Problem(5, 3, {})));
    CHECK_FALSE(is_solvable(Problem(4, 3, enumerate_all_nogoods(4, 3))));
    auto p = pair_blocked(3, 3, 0, 1);
    CHECK(p.size() == 9);
    CHECK(count_solutions_exhaustive(p) == 0);
    CHECK_FALSE(is_solvable(p));
}

TEST_CASE("count_solutions agrees with exhaustive enumeration")
{
    Rng rng(20240601);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 2 + rng.below(7);  // 2..8
        const int d = 2 + rng.below(2);  // 2..3
        const auto universe = static_cast<int>(total_nogood_count(n, d));
        const int m = rng.below(universe + 1);
        auto p = random_problem(rng, n, d, m);
        const auto exact = count_solutions_exhaustive(p);
        CHECK(count_solutions(p).count == exact);
        CHECK(is_solvable(p) == (exact > 0));
        auto capped = count_solutions(p, 3);
        CHECK(capped.count == std::min<std::uint64_t>(exact, 3));
        CHECK(capped.capped == (exact >= 3));
    }
}

TEST_CASE("removing a nogood never decreases the solution count")
{
    Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        auto p = random_problem(rng, 7, 3, 20 + rng.below(60));
        const auto before = count_solutions(p).count;
        auto nogoods = p.nogoods();
        nogoods.erase(nogoods.begin() + rng.below(static_cast<int>(nogoods.size())));
        CHECK(count_solutions(Problem(7, 3, nogoods)).count >= before);
    }
}

TEST_CASE("canonical form closure")
{
    Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        auto p = random_problem(rng, 6, 3, 25);
        std::vector<Nogood> flipped;
        for (const auto& g : p.nogoods()) {
            if (rng.below(2) == 1)
                flipped.push_back({g.var_j, g.val_j, g.var_i, g.val_i});
            else
                flipped.push_back(g);
        }
        rng.shuffle(std::span<Nogood>(flipped));
        CHECK(Problem(6, 3, flipped) == p);
    }
    CHECK(Nogood::make(3, 1, 0, 2) == Nogood{0, 2, 3, 1});
    CHECK_THROWS_AS(Problem(2, 2, {{0, 0, 1, 0}, {1, 0, 0, 0}}), InputError);
    CHECK_THROWS_AS(Problem(2, 2, {{0, 0, 2, 0}}), InputError);
    CHECK_THROWS_AS(Problem(2, 2, {{0, 0, 1, 2}}), InputError);
}

TEST_CASE("expected_solution_count")
{
    CHECK(expected_solution_count(10, 3, 0) == 59049.0);
    CHECK(expected_solution_count(10, 3, 82) > 1.0);
    CHECK(expected_solution_count(10, 3, 83) < 1.0);
    CHECK(expected_solution_count(10, 3, 405) == 0.0);
    CHECK(expected_solution_count(10, 3, 361) == 0.0);
    CHECK_THROWS_AS(expected_solution_count(10, 3, 406), InputError);
    CHECK_THROWS_AS(expected_solution_count(10, 3, -1), InputError);

    double previous = expected_solution_count(10, 3, 0);
    for (int m = 1; m <= 360; ++m) {
        const double value = expected_solution_count(10, 3, m);
        CHECK(value < previous);
        previous = value;
    }

    // Small case against direct binomials: n=3, d=2 -> 12 nogoods, 9 allowed.
    // m=2: 8 * C(9,2)/C(12,2) = 8 * 36/66.
    CHECK(expected_solution_count(3, 2, 2) == doctest::Approx(8.0 * 36.0 / 66.0));
}

TEST_CASE("predicted_crossover")
{
    const double root = predicted_crossover(10, 3);
    CHECK(std::abs(root - 82.9) <= 0.1);
    CHECK(root > 82.0);
    CHECK(root < 83.0);
    CHECK_THROWS_AS(predicted_crossover(2, 1), InputError);
    CHECK_THROWS_AS(predicted_crossover(1, 3), InputError);
}

TEST_CASE("enumerate_all_nogoods")
{
    auto all = enumerate_all_nogoods(10, 3);
    CHECK(all.size() == 405);
    CHECK(std::is_sorted(all.begin(), all.end()));
    CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
    CHECK(enumerate_all_nogoods(2, 2).size() == 4);
    CHECK(enumerate_all_nogoods(1, 3).empty());
    CHECK(consistent_nogood_count(10, 3) == 360);

    NogoodUniverse universe(7, 3);
    for (std::size_t k = 0; k < universe.size(); ++k)
        CHECK(universe.index(universe.at(k)) == k);
}

TEST_CASE("induced_subproblem")
{
    Rng rng(5);
    auto p = random_problem(rng, 6, 3, 30);
    std::vector<int> all{0, 1, 2, 3, 4, 5};
    auto whole = induced_subproblem(p, all);
    CHECK(whole.problem == p);
    CHECK(whole.original == all);

    auto empty = induced_subproblem(p, std::vector<int>{});
    CHECK(empty.problem.variables() == 0);
    CHECK(count_solutions(empty.problem).count == 1);

    auto blocked = pair_blocked(3, 3, 0, 1);
    auto sub = induced_subproblem(blocked, std::vector<int>{0, 2});
    CHECK(sub.problem.size() == 0);
    CHECK(sub.original == std::vector<int>{0, 2});
    auto sub01 = induced_subproblem(blocked, std::vector<int>{1, 0});
    CHECK(sub01.problem.size() == 9);

    CHECK_THROWS_AS(induced_subproblem(p, std::vector<int>{0, 6}), InputError);
}

TEST_CASE("subproblem unsolvability is upward closed")
{
    Rng rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        auto p = random_problem(rng, 7, 3, 60 + rng.below(40));
        ConflictTable table(p);
        for (std::uint64_t small = 0; small < (1U << 7); small += 1 + static_cast<std::uint64_t>(rng.below(9))) {
            if (subset_solvable(table, small))
                continue;
            std::vector<int> vars;
            for (int v = 0; v < 7; ++v)
                if ((small >> v) & 1U)
                    vars.push_back(v);
            CHECK_FALSE(is_solvable(induced_subproblem(p, vars).problem));
            const std::uint64_t bigger = small | (1U << rng.below(7));
            CHECK_FALSE(subset_solvable(table, bigger));
        }
    }
}

TEST_CASE("instance file format")
{
    Problem p(4, 3, {{2, 1, 0, 0}, {1, 2, 3, 0}, {0, 1, 1, 1}});
    std::ostringstream out;
    write_problem(out, p);
    CHECK(out.str() == "csp 4 3 3\n0 0 2 1\n0 1 1 1\n1 2 3 0\n");
    std::istringstream in(out.str());
    CHECK(read_problem(in) == p);

    auto rejects = [](const std::string& text) {
        std::istringstream s(text);
        CHECK_THROWS_AS(read_problem(s), InputError);
    };
    rejects("csp 4 3 2\n0 0 2 1\n0 0 2 1\n");  // duplicate
    rejects("csp 4 3 1\n2 1 0 0\n");           // not canonical
    rejects("csp 4 3 2\n0 1 1 1\n0 0 2 1\n");  // not sorted
    rejects("csp 4 3 3\n0 0 2 1\n");           // m mismatch
    rejects("csp 4 3 1\n0 0 4 1\n");           // variable out of range
    rejects("csp 4 3 1\n0 0 2 3\n");           // value out of range
    rejects("graph 4 3\n");
    rejects("");
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "phaselab/error.hpp"
#include "phaselab/random.hpp"
#include "phaselab/stats.hpp"

using namespace phaselab;

namespace {

std::vector<double> iota_sample(int n)
{
    std::vector<double> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), 1.0);
    return v;
}

} // namespace

TEST_CASE("median_with_ci uses the 50 -/+ 100/sqrt(N) percentiles")
{
    auto hundred = iota_sample(100);
    auto est = median_with_ci(hundred);
    CHECK(est.median == 50.0);
    CHECK(est.ci.lo == 40.0);
    CHECK(est.ci.hi == 60.0);

    // 100/sqrt(1000) = 3.162..., so the 46.84th and 53.16th percentiles:
    // nearest ranks ceil(468.4) = 469 and ceil(531.6) = 532.
    auto thousand = iota_sample(1000);
    est = median_with_ci(thousand);
    CHECK(est.median == 500.0);
    CHECK(est.ci.lo == 469.0);
    CHECK(est.ci.hi == 532.0);

    std::vector<double> constant{5, 5, 5, 5};
    est = median_with_ci(constant);
    CHECK(est.median == 5.0);
    CHECK(est.ci.lo == 5.0);
    CHECK(est.ci.hi == 5.0);

    // N = 1: rank clipped at both ends.
    std::vector<double> single{7};
    est = median_with_ci(single);
    CHECK(est.ci.lo == 7.0);
    CHECK(est.ci.hi == 7.0);

    CHECK_THROWS_AS(median_with_ci(std::vector<double>{}), InputError);
}

TEST_CASE("fraction_with_ci")
{
    auto half = fraction_with_ci(50, 100);
    CHECK(half.f == 0.5);
    CHECK(half.ci.lo == doctest::Approx(0.4));
    CHECK(half.ci.hi == doctest::Approx(0.6));

    auto none = fraction_with_ci(0, 100);
    CHECK(none.f == 0.0);
    CHECK(none.ci.lo == 0.0);
    CHECK(none.ci.hi == 0.0);

    auto ninety = fraction_with_ci(9, 10);
    CHECK(ninety.ci.lo == doctest::Approx(0.9 - 0.18973666));
    CHECK(ninety.ci.hi == 1.0);  // 1.0897 clipped

    CHECK_THROWS_AS(fraction_with_ci(3, 2), InputError);
    CHECK_THROWS_AS(fraction_with_ci(0, 0), InputError);

    for (std::uint64_t k = 0; k <= 37; ++k)
        CHECK(fraction_with_ci(k, 37).f + fraction_with_ci(37 - k, 37).f == doctest::Approx(1.0));
}

TEST_CASE("mean_with_ci")
{
    auto ones = mean_with_ci(std::vector<double>{1, 1, 1, 1});
    CHECK(ones.mean == 1.0);
    CHECK(ones.ci.lo == 1.0);
    CHECK(ones.ci.hi == 1.0);

    auto pair = mean_with_ci(std::vector<double>{0, 2});
    CHECK(pair.mean == 1.0);
    CHECK(pair.stddev == doctest::Approx(std::sqrt(2.0)));
    CHECK(pair.ci.lo == doctest::Approx(1.0 - 1.96));
    CHECK(pair.ci.hi == doctest::Approx(1.0 + 1.96));

    auto single = mean_with_ci(std::vector<double>{3.5});
    CHECK(single.mean == 3.5);
    CHECK(single.ci.lo == 3.5);
    CHECK(single.ci.hi == 3.5);

    CHECK_THROWS_AS(mean_with_ci(std::vector<double>{}), InputError);
}

TEST_CASE("median_with_ci is scale equivariant")
{
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> sample(static_cast<std::size_t>(1 + rng.below(200)));
        for (auto& x : sample)
            x = static_cast<double>(rng.below(1000));
        const double c = 0.5 + static_cast<double>(rng.below(100)) / 10.0;
        auto scaled = sample;
        for (auto& x : scaled)
            x *= c;
        auto a = median_with_ci(sample);
        auto b = median_with_ci(scaled);
        CHECK(b.median == doctest::Approx(c * a.median));
        CHECK(b.ci.lo == doctest::Approx(c * a.ci.lo));
        CHECK(b.ci.hi == doctest::Approx(c * a.ci.hi));
    }
}

TEST_CASE("median interval covers the true median")
{
    // Uniform integers on [0, 10000): true median 4999.5; at N = 1000 the
    // interval should contain it in well over 90% of trials.
    Rng rng(42);
    int covered = 0;
    const int trials = 10000;
    std::vector<double> sample(1000);
    for (int t = 0; t < trials; ++t) {
        for (auto& x : sample)
            x = static_cast<double>(rng.below(10000));
        auto est = median_with_ci(sample);
        CHECK(est.ci.lo <= est.median);
        CHECK(est.median <= est.ci.hi);
        covered += (est.ci.lo <= 4999.5 && 4999.5 <= est.ci.hi) ? 1 : 0;
    }
    CHECK(covered >= trials * 9 / 10);
}

TEST_CASE("spearman")
{
    std::vector<double> x{1, 2, 3, 4, 5};
    std::vector<double> up{10, 20, 30, 40, 50};
    std::vector<double> down{5, 4, 3, 2, 1};
    CHECK(spearman(x, up) == doctest::Approx(1.0));
    CHECK(spearman(x, down) == doctest::Approx(-1.0));
    std::vector<double> flat{2, 2, 2, 2, 2};
    CHECK(spearman(x, flat) == 0.0);
    // Ties get average ranks: y ranks (1.5, 1.5, 3, 4, 5).
    std::vector<double> tied{1, 1, 2, 3, 4};
    CHECK(spearman(x, tied) == doctest::Approx(0.9746794));
}

#include "phaselab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "phaselab/error.hpp"

namespace phaselab {

double nearest_rank(std::span<const double> sorted, double p)
{
    if (sorted.empty())
        throw InputError("percentile of an empty sample");
    p = std::clamp(p, 0.0, 100.0);
    const auto n = static_cast<double>(sorted.size());
    auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

MedianEstimate median_with_ci(std::span<const double> samples)
{
    if (samples.empty())
        throw InputError("median of an empty sample");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double half_width = 100.0 / std::sqrt(static_cast<double>(sorted.size()));
    return {nearest_rank(sorted, 50.0), {nearest_rank(sorted, 50.0 - half_width), nearest_rank(sorted, 50.0 + half_width)}};
}

MeanEstimate mean_with_ci(std::span<const double> samples)
{
    if (samples.empty())
        throw InputError("mean of an empty sample");
    const auto n = static_cast<double>(samples.size());
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
    if (samples.size() == 1)
        return {mean, 0.0, {mean, mean}};
    double squares = 0.0;
    for (double x : samples)
        squares += (x - mean) * (x - mean);
    const double stddev = std::sqrt(squares / (n - 1.0));
    const double half_width = 1.96 * stddev / std::sqrt(n);
    return {mean, stddev, {mean - half_width, mean + half_width}};
}

FractionSummary fraction_with_ci(std::uint64_t successes, std::uint64_t n)
{
    if (n == 0 || successes > n)
        throw InputError("fraction needs 0 <= successes <= N and N >= 1");
    const double f = static_cast<double>(successes) / static_cast<double>(n);
    const double half_width = 2.0 * std::sqrt(f * (1.0 - f)) / std::sqrt(static_cast<double>(n));
    return {successes, n, f, {std::max(0.0, f - half_width), std::min(1.0, f + half_width)}};
}

SampleSummary summarize(std::span<const double> samples)
{
    auto median = median_with_ci(samples);
    auto mean = mean_with_ci(samples);
    return {samples.size(), median.median, median.ci, mean.mean, mean.stddev, mean.ci};
}

namespace {

std::vector<double> average_ranks(std::span<const double> values)
{
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]])
            ++j;
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k)
            ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

} // namespace

double spearman(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw InputError("rank correlation needs two equal-length samples of size >= 2");
    auto rx = average_ranks(x);
    auto ry = average_ranks(y);
    const auto n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0)
        return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

} // namespace phaselab

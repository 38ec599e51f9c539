#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace phaselab {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct MedianEstimate {
    double median = 0.0;
    Interval ci;
};

struct MeanEstimate {
    double mean = 0.0;
    double stddev = 0.0;
    Interval ci;
};

struct FractionSummary {
    std::uint64_t successes = 0;
    std::uint64_t n = 0;
    double f = 0.0;
    Interval ci;
};

struct SampleSummary {
    std::size_t n = 0;
    double median = 0.0;
    Interval median_ci;
    double mean = 0.0;
    double stddev = 0.0;
    Interval mean_ci;
};

/// Nearest-rank percentile of an ascending sample; p is clipped to [0, 100].
double nearest_rank(std::span<const double> sorted, double p);

/// Median with the interval spanned by the 50 -/+ 100/sqrt(N) percentiles.
MedianEstimate median_with_ci(std::span<const double> samples);

/// Mean +/- 1.96 s / sqrt(N), s the N-1 sample deviation. N = 1 gives a
/// degenerate interval.
MeanEstimate mean_with_ci(std::span<const double> samples);

/// f +/- 2 sqrt(f(1-f)) / sqrt(N), clipped to [0, 1].
FractionSummary fraction_with_ci(std::uint64_t successes, std::uint64_t n);

SampleSummary summarize(std::span<const double> samples);

/// Spearman rank correlation with average ranks for ties. Returns 0 when
/// either side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

template <typename T>
std::vector<double> as_doubles(std::span<const T> values)
{
    return std::vector<double>(values.begin(), values.end());
}

} // namespace phaselab

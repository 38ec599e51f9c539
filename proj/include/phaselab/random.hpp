#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace phaselab {

/// splitmix64 finalizer; used for every seed derivation in the project so
/// that experiment schedules never influence the random streams.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a) noexcept
{
    return mix64(mix64(base) ^ (a * 0xd6e8feb86659fd93ULL));
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) noexcept
{
    return derive_seed(derive_seed(base, a), b);
}

/// Thin wrapper around mt19937_64. Bounded draws and shuffles are done here
/// rather than through <random> distributions, whose output is
/// implementation-defined, so seeded runs are identical across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, bound). bound must be positive.
    std::uint64_t below(std::uint64_t bound)
    {
        // Lemire's nearly-divisionless method with rejection.
        unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = -bound % bound;
            while (low < threshold) {
                m = static_cast<unsigned __int128>(next()) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    int below(int bound) { return static_cast<int>(below(static_cast<std::uint64_t>(bound))); }

    template <typename T>
    void shuffle(std::span<T> items)
    {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = below(static_cast<std::uint64_t>(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    /// Moves a uniform random k-subset (uniformly ordered) to the front.
    template <typename T>
    void partial_shuffle(std::span<T> items, std::size_t k)
    {
        for (std::size_t i = 0; i < k && i < items.size(); ++i) {
            std::size_t j = i + below(static_cast<std::uint64_t>(items.size() - i));
            std::swap(items[i], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

} // namespace phaselab

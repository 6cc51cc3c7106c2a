#pragma once

// Seedable randomness with a fully pinned algorithm. Integer draws are fixed
// by the algorithms below on every toolchain; normal draws also pass through
// the platform's log and cos.
//
//   * engine: std::mt19937_64 (output sequence fixed by the C++ standard)
//   * bounded integers: Lemire's multiply-shift with rejection
//   * uniform reals: top 53 bits / 2^53
//   * standard normals: Box-Muller, one draw per pair of uniforms (no caching)
//   * seed splitting: stream seed = splitmix64(seed ^ splitmix64(tag * 2^32 + index))
//
// Standard library distributions are not used; their output is
// implementation-defined.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace bubblesim {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Independent random streams derived from one global seed.
enum class Stream : std::uint64_t {
    selection = 1,   // active-set sizes and members
    noise = 2,       // between-session price noise
    sweep_grid = 3,  // (alpha, beta) sampling for sweeps
    sweep_cell = 4,  // per-cell simulation seeds
    experiment = 5,  // per-repetition seeds inside experiments
};

inline constexpr std::uint64_t derive_seed(std::uint64_t seed, Stream stream,
                                           std::uint64_t index = 0) {
    const auto tag = static_cast<std::uint64_t>(stream);
    return splitmix64(seed ^ splitmix64((tag << 32) + index));
}

class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, bound). bound must be positive.
    std::uint64_t below(std::uint64_t bound) {
        unsigned __int128 product = static_cast<unsigned __int128>(next()) * bound;
        auto low = static_cast<std::uint64_t>(product);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                product = static_cast<unsigned __int128>(next()) * bound;
                low = static_cast<std::uint64_t>(product);
            }
        }
        return static_cast<std::uint64_t>(product >> 64);
    }

    /// Uniform integer in [lo, hi], inclusive.
    std::int64_t between(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    /// Uniform real in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
};

/// Draws m distinct indices from [0, n) by a partial Fisher-Yates shuffle over a
/// persistent permutation; the buffer never needs resetting between draws.
class IndexSampler {
public:
    explicit IndexSampler(std::size_t n) : perm_(n) { std::iota(perm_.begin(), perm_.end(), 0); }

    std::size_t population() const { return perm_.size(); }

    std::span<const std::size_t> draw(std::size_t m, RandomStream& rng) {
        for (std::size_t i = 0; i < m; ++i) {
            const auto j = i + static_cast<std::size_t>(rng.below(perm_.size() - i));
            std::swap(perm_[i], perm_[j]);
        }
        return {perm_.data(), m};
    }

private:
    std::vector<std::size_t> perm_;
};

} // namespace bubblesim

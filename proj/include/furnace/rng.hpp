#ifndef FURNACE_RNG_HPP
#define FURNACE_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace furnace {

/// Seedable random stream used by every stochastic operation in the library.
///
/// The raw engine is std::mt19937_64, whose output sequence is fixed by the
/// standard, so identical seeds give identical streams on every platform.
/// All derived draws below are fixed arithmetic on that output; the standard
/// library <random> distributions are deliberately not used because their
/// streams differ between implementations.
///
/// Draw accounting (one engine step per call unless noted):
///   uniform()        1 step, double in [0, 1)
///   uniform(lo, hi)  1 step
///   index(n)         1 step
///   normal()         2 steps (Box-Muller, cosine branch only)
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1), 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + uniform() * (hi - lo);
    }

    /// Uniform index in [0, n). The scaling bias is below 2^-53 per draw.
    std::size_t index(std::size_t n) {
        auto k = static_cast<std::size_t>(uniform() * static_cast<double>(n));
        return k < n ? k : n - 1;
    }

    /// Standard normal deviate; consumes exactly two uniforms.
    double normal() {
        double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

private:
    std::mt19937_64 engine_;
};

/// Mixes a role tag into a base seed so that cooperating runs (e.g. the two
/// best-response GAs and the Nash GA) consume independent streams while
/// remaining reproducible from one configured seed. SplitMix64 finalizer.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace furnace

#endif

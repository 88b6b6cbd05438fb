#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace exptrack {

// Counter-based pseudo-random generator built on the SplitMix64 mixer.
// Output i is a pure function of (seed, stream, i), so any draw sequence can
// be replayed exactly on any platform and independent streams never share
// state. All uniform/integer draws are derived from the raw 64-bit output
// with fixed bit arithmetic; gaussians use Box-Muller (two draws per call).
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : base_(mix(seed + kGamma * (stream + 1))), counter_(0) {}

    std::uint64_t next_u64() { return mix(base_ + kGamma * ++counter_); }

    // uniform in [0,1) with 53-bit resolution
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // +1 or -1 with equal probability
    double next_rademacher() { return (next_u64() & 1u) ? 1.0 : -1.0; }

    // index in [0, n)
    std::size_t next_index(std::size_t n) {
        if (n == 0)
            throw std::invalid_argument("next_index: n must be positive");
        std::size_t i = static_cast<std::size_t>(next_double() * static_cast<double>(n));
        return i < n ? i : n - 1;
    }

    // standard normal
    double next_gaussian() {
        double u1 = 1.0 - next_double();  // (0,1], keeps log finite
        double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    std::uint64_t draws() const { return counter_; }

private:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
    static constexpr double kPi = 3.14159265358979323846;

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t base_;
    std::uint64_t counter_;
};

}  // namespace exptrack

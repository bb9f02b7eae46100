#pragma once

// Random numbers used throughout driftlab.
//
// Uniform bits come from std::mt19937_64, whose output sequence is fixed by
// the C++ standard, so a seed produces the same stream on every platform.
// Standard normals are produced here by the Box-Muller transform (the
// distributions in <random> are implementation-defined). Seeds for
// independent streams (replications, posterior draws) are derived from a
// base seed with the SplitMix64 finalizer.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace driftlab {

/// SplitMix64 finalizer; maps (base, stream) to a well-mixed 64-bit seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream)
{
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on the open interval (0,1).
    double uniform()
    {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; the second variate of each pair is cached.
    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    std::uint64_t bits() { return engine_(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace driftlab

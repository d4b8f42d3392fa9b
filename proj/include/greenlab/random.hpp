#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace greenlab {

/// Seeded 64-bit generator with the splitmix64 state update.
///
/// Streams are addressed by (seed, index): every sample, radius level or
/// resampling round draws from its own substream, so results do not depend
/// on how work is split across threads.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    /// Substream `index` of `seed`.
    SplitMix64(std::uint64_t seed, std::uint64_t index) : state_(mix(seed ^ mix(index + kGolden))) {}

    std::uint64_t next() {
        state_ += kGolden;
        return mix(state_);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1].
    double uniform_open_low() { return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53; }

    /// Standard normal via Box-Muller (one value per call, no caching so the
    /// draw count per sample is fixed).
    double normal() {
        const double u1 = uniform_open_low();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Standard complex Gaussian: E|z|^2 = 1.
    std::complex<double> complex_normal() {
        const double u1 = uniform_open_low();
        const double u2 = uniform();
        const double radius = std::sqrt(-std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        return {radius * std::cos(angle), radius * std::sin(angle)};
    }

    /// Uniform in the closed unit disk.
    std::complex<double> unit_disk() {
        const double radius = std::sqrt(uniform());
        const double angle = 2.0 * std::numbers::pi * uniform();
        return {radius * std::cos(angle), radius * std::sin(angle)};
    }

    static constexpr std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
    std::uint64_t state_;
};

}  // namespace greenlab

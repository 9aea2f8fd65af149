#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace risfl {

// Deterministic random source. The engine is std::mt19937_64 (bit-exact by
// the standard); the uniform/normal/complex transforms are coded here instead
// of using std::*_distribution, whose output is implementation-defined and
// would break the "same seed, same artifact bytes" contract across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t bits() { return engine_(); }

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n). Multiply-shift; n is tiny next to 2^64 so
    // the modulo bias of the classical approach is avoided without rejection.
    std::uint64_t uniform_index(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(bits()) * n) >> 64);
    }

    // Standard normal via Box-Muller; the second draw is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1], keeps log() finite
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Normal truncated to [-2, 2] standard deviations (resampled).
    double truncated_normal() {
        for (;;) {
            const double z = normal();
            if (std::abs(z) <= 2.0) return z;
        }
    }

    // Circularly-symmetric complex normal CN(0, 1).
    std::complex<double> complex_normal() {
        return {normal() * M_SQRT1_2, normal() * M_SQRT1_2};
    }

    // Independent child stream; mixing is SplitMix64 so nearby stream ids do
    // not produce correlated engines.
    Rng stream(std::uint64_t stream_id) const {
        std::uint64_t x = seed_ + 0x9e3779b97f4a7c15ULL * (stream_id + 1);
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return Rng(x ^ (x >> 31));
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace risfl

#pragma once

#include <cmath>
#include <cstdint>

namespace simon {

/// Counter-free splittable PRNG built on splitmix64. Distribution sampling is
/// implemented by hand so that output streams are bit-identical across
/// platforms and standard library versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {
        // Decorrelate trivially related seeds (0, 1, 2, ...).
        next_u64();
        next_u64();
    }

    /// Independent stream for (seed, stream_index), e.g. one per game round.
    static Rng stream(std::uint64_t seed, std::uint64_t stream_index) {
        return Rng(mix(seed ^ mix(stream_index + 0x9e3779b97f4a7c15ULL)));
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    /// Uniform integer in [0, bound), bound >= 1. Rejection sampling, unbiased.
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool next_bool() { return (next_u64() >> 63) != 0; }

    /// Bernoulli(p).
    bool next_bernoulli(double p) { return next_double() < p; }

    /// Standard normal via Box-Muller (the spare deviate is cached).
    double next_normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 == 0.0) u1 = next_double();
        const double u2 = next_double();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = radius * std::sin(theta);
        has_spare_ = true;
        return radius * std::cos(theta);
    }

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace simon

#ifndef ORCA_RNG_HPP
#define ORCA_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace orca {

// Seeded generator with hand-rolled float draws. std::mt19937 is fully
// specified by the standard, and building uniforms/normals from raw draws
// (instead of std::*_distribution, whose algorithms are
// implementation-defined) keeps every artifact bit-reproducible across
// standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(static_cast<std::uint32_t>(seed ^ (seed >> 32))) {}

    std::uint32_t next_u32() { return gen_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() {
        const std::uint64_t hi = next_u32() >> 5;   // 27 bits
        const std::uint64_t lo = next_u32() >> 6;   // 26 bits
        return static_cast<double>((hi << 26) | lo) / 9007199254740992.0; // 2^53
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller; one value per call, the spare is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) {
            u1 = uniform();
        }
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Uniform integer in [0, n).
    std::uint32_t below(std::uint32_t n) {
        if (n == 0) {
            return 0;
        }
        // Rejection sampling to avoid modulo bias.
        const std::uint32_t limit = 0xFFFFFFFFu - (0xFFFFFFFFu % n);
        std::uint32_t r = next_u32();
        while (r >= limit) {
            r = next_u32();
        }
        return r % n;
    }

private:
    std::mt19937 gen_;
    bool has_spare_{false};
    double spare_{0.0};
};

// Stable derivation of stream-specific seeds from one master seed
// (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace orca

#endif

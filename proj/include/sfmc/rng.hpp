#ifndef SFMC_RNG_HPP
#define SFMC_RNG_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace sfmc {

/// Seeded PRNG (xoshiro256++) with deterministic stream derivation.
///
/// Monte-Carlo trials and estimator restarts each run on their own stream,
/// derived from a master seed and a stream index via `derive_stream`, so
/// results do not depend on execution order or thread count.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        // Seed expansion through splitmix64, the standard recipe.
        std::uint64_t x = seed;
        for (auto& word : state_) word = splitmix64(x);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1), 53-bit resolution.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [a, b).
    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    bool bernoulli(double p) { return uniform01() < p; }

    /// Standard normal via Box-Muller (consumes two uniforms per call).
    double normal() {
        double u1 = uniform01();
        double u2 = uniform01();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * pi() * u2);
    }

    /// Zero-mean Laplace with rate tau (variance 2/tau^2), by CDF inversion.
    double laplace(double tau) {
        const double u = uniform01() - 0.5;
        const double t = 1.0 - 2.0 * std::abs(u);
        return -(u < 0.0 ? -1.0 : 1.0) * std::log(t > 1e-300 ? t : 1e-300) / tau;
    }

    /// Poisson count with the given rate, exact for any rate.
    ///
    /// Knuth's product-of-uniforms method, applied in chunks of rate <= 500
    /// so exp(-chunk) never underflows; chunk counts add up by the
    /// superposition property.
    long poisson(double rate) {
        if (!(rate > 0.0)) throw std::domain_error("poisson rate must be > 0");
        long total = 0;
        double remaining = rate;
        while (remaining > 0.0) {
            const double chunk = remaining > 500.0 ? 500.0 : remaining;
            remaining -= chunk;
            const double limit = std::exp(-chunk);
            double prod = 1.0;
            long count = -1;
            do {
                prod *= uniform01();
                ++count;
            } while (prod > limit);
            total += count;
        }
        return total;
    }

private:
    static constexpr double pi() { return 3.14159265358979323846; }

    static std::uint64_t rotl(std::uint64_t x, int s) {
        return (x << s) | (x >> (64 - s));
    }

    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_[4];
};

/// Independent stream `index` of a master seed. Counter-based: the result
/// depends only on (master_seed, index), never on how many streams were
/// derived before.
inline Rng derive_stream(std::uint64_t master_seed, std::uint64_t index) {
    std::uint64_t x = master_seed + (index + 1) * 0x9E3779B97F4A7C15ULL;
    // one splitmix64 round to decorrelate adjacent indices
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return Rng(x ^ (x >> 31));
}

} // namespace sfmc

#endif // SFMC_RNG_HPP

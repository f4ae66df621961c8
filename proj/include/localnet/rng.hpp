#ifndef LOCALNET_RNG_HPP
#define LOCALNET_RNG_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace localnet {

// splitmix64, used for seeding and for deriving independent per-call streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Order-sensitive 64-bit mix of a seed and call indices. Every sampling
// operation derives its stream as hash64(seed, stream_tag, call_index), so
// results are a pure function of (parameters, seed) and trials can run in
// any order.
inline std::uint64_t hash64(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = a;
    std::uint64_t h = splitmix64(s);
    s ^= b + 0x632be59bd9b4e019ULL;
    h ^= splitmix64(s);
    s ^= c + 0xd6e8feb86659fd93ULL;
    h ^= splitmix64(s);
    return h;
}

// xoshiro256** by Blackman & Vigna (public domain reference implementation),
// seeded through splitmix64.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // uniform in [0, 1), 53-bit resolution
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // uniform integer in [0, n)
    std::uint64_t uniform_index(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
        // rejection to avoid modulo bias
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

    bool bernoulli(double p) { return uniform01() < p; }

    // standard normal via Box-Muller; spare value cached for determinism
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586476925286766559 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    // normal conditioned on |value| <= bound, by rejection
    double truncated_normal(double sigma, double bound) {
        if (!(bound > 0.0)) throw std::invalid_argument("truncated_normal: bound must be positive");
        for (;;) {
            const double v = sigma * normal();
            if (std::fabs(v) <= bound) return v;
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4];
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace localnet

#endif

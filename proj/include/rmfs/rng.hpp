#pragma once

#include <cmath>
#include <cstdint>

namespace rmfs {

// splitmix64 step; used for seeding and for deriving sub-stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic seed combinator for per-instance / per-policy sub-streams.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
    return splitmix64(s);
}

// xoshiro256** — small state (32 bytes) so simulation snapshots stay cheap,
// and fully specified arithmetic so streams are reproducible across builds.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    std::uint64_t next() {
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

    // Uniform in [0, 1).
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1]; handy for inverse-CDF sampling with pow().
    double uniform01_open_low() { return 1.0 - uniform01(); }

    // Uniform index in [0, n). Modulo bias is ~n/2^64, irrelevant here.
    std::uint64_t below(std::uint64_t n) { return next() % n; }

    // Standard normal via Box-Muller (one value per pair of draws).
    double normal() {
        const double u1 = uniform01_open_low();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    std::uint64_t word(int i) const { return state_[i]; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4];
};

// Fisher-Yates with our own engine so shuffles do not depend on the standard
// library's unspecified algorithms.
template <typename T>
void shuffle(T* data, std::size_t n, Rng& rng) {
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.below(i));
        T tmp = data[i - 1];
        data[i - 1] = data[j];
        data[j] = tmp;
    }
}

}  // namespace rmfs

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace scae {

// Splitmix64: 64-bit state, one multiply-xor-shift chain per draw.
// Used for every random decision in the toolkit so that runs are a pure
// function of their seed.
class SplitMix64 {
  public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Box-Muller; avoids std::normal_distribution so the stream is
    // implementation-independent.
    double normal() {
        double u1 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    // Uniform integer in [0, n).
    uint64_t below(uint64_t n) { return next_u64() % n; }

  private:
    uint64_t state_;
};

// Stable combiner for deriving sub-seeds, e.g. (run seed, epoch index).
inline uint64_t mix_seed(uint64_t a, uint64_t b) {
    SplitMix64 g(a ^ (0x9e3779b97f4a7c15ull + (b << 1)));
    g.next_u64();
    return g.next_u64() ^ b;
}

// Deterministic Fisher-Yates.
inline void shuffle_indices(std::vector<size_t>& idx, uint64_t seed) {
    SplitMix64 g(seed);
    for (size_t i = idx.size(); i > 1; --i) {
        size_t j = size_t(g.below(i));
        std::swap(idx[i - 1], idx[j]);
    }
}

// FNV-1a 64-bit, used for dataset/content hashing.
inline uint64_t fnv1a64(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ull) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace scae

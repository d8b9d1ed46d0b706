#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

namespace algodiv {

// SplitMix64. Used for every seeded draw in the toolkit so that a seed
// replays identically across platforms and standard-library versions
// (std::shuffle and the std distributions are implementation-defined).
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Unbiased draw from [0, bound) by rejection. bound must be > 0.
    std::uint64_t bounded(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) return r % bound;
        }
    }

    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

// Fisher-Yates permutation of 0..n-1. Seed 0 means identity order.
inline std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (seed == 0) return idx;
    SplitMix64 rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.bounded(i));
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

}  // namespace algodiv

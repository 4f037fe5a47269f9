#pragma once

#include <cstdint>
#include <random>

namespace crowdforge {

// splitmix64; used to derive stream keys so that substreams of nearby seeds
// do not correlate.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic RNG wrapper. All draws go through our own mapping rather than
// std::uniform_*_distribution so results are identical across standard
// library implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t nextU64() { return engine_(); }

    // Uniform double in [0, 1): 53 high bits of the draw.
    double uniform01() { return static_cast<double>(nextU64() >> 11) * 0x1.0p-53; }

    // Uniform double in [lo, hi). Degenerate ranges return lo.
    double uniform(double lo, double hi) {
        if (!(hi > lo)) return lo;
        return lo + (hi - lo) * uniform01();
    }

    // Uniform integer in [0, n). Rejection sampling, unbiased. n must be > 0.
    std::uint64_t uniformInt(std::uint64_t n) {
        if (n <= 1) return 0;
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x = nextU64();
        while (x >= limit) x = nextU64();
        return x % n;
    }

    // Independent substream keyed on (this seed, key).
    static Rng substream(std::uint64_t seed, std::uint64_t key) {
        return Rng(mix64(mix64(seed) ^ mix64(key + 0x6a09e667f3bcc909ULL)));
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace crowdforge

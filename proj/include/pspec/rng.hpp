#pragma once

#include <cmath>
#include <cstdint>

// Deterministic, cross-platform random number generation. All stochastic
// code in this project derives substreams from a user seed via splitmix64
// and draws from xoshiro256**; results are reproducible bit-for-bit on any
// machine regardless of thread count, which the standard library
// distributions do not guarantee.

namespace pspec {

struct SplitMix64 {
    uint64_t state;

    explicit SplitMix64(uint64_t seed) : state(seed) {}

    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

/// Mix a seed with stream tags to derive independent substreams.
inline uint64_t mix_seed(uint64_t seed, uint64_t tag, uint64_t index = 0) {
    SplitMix64 m(seed);
    uint64_t a = m.next();
    SplitMix64 m2(a ^ (tag * 0xd1342543de82ef95ULL) ^ (index * 0x2545f4914f6cdd1dULL));
    m2.next();
    return m2.next();
}

class Xoshiro256StarStar {
  public:
    explicit Xoshiro256StarStar(uint64_t seed) {
        SplitMix64 m(seed);
        for (auto& w : s_) w = m.next();
    }

    uint64_t next() {
        const uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in (0, 1]; never returns 0 so log() is safe.
    double uniform() {
        return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    }

    /// Unit-mean exponential deviate.
    double exponential() { return -std::log(uniform()); }

    bool bernoulli(double p) { return uniform() <= p; }

  private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t s_[4];
};

// Stream tags for substream derivation (arbitrary distinct constants).
namespace stream {
inline constexpr uint64_t kOccupation = 0x101;
inline constexpr uint64_t kClicks = 0x102;
inline constexpr uint64_t kTrace = 0x103;
inline constexpr uint64_t kThin = 0x104;
inline constexpr uint64_t kWeights = 0x105;
inline constexpr uint64_t kSubset = 0x106;
inline constexpr uint64_t kExactJump = 0x107;
} // namespace stream

} // namespace pspec

#pragma once

#include <cmath>
#include <cstdint>

namespace evsoar {

// Counter-based random stream: SplitMix64 finalizer (Stafford mix13) applied
// to key + n*GAMMA. The key is derived from (seed, stream), so any substream
// can be opened independently of draw order -- see README "Random stream".
class Rng {
public:
    static constexpr uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

    Rng(uint64_t seed, uint64_t stream = 0)
        : key_(mix(mix(seed + kGamma) ^ mix(stream * kGamma + 0x632BE59BD9B4E019ULL))) {}

    static uint64_t mix(uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ULL;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return z;
    }

    uint64_t next_u64() { return mix(key_ + (counter_++) * kGamma); }

    // [0,1), 53-bit resolution
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    // Lemire bounded draw; n = 0 is undefined
    uint64_t next_below(uint64_t n) {
        return static_cast<uint64_t>((static_cast<__uint128_t>(next_u64()) * n) >> 64);
    }

    bool bernoulli(double p) { return next_unit() < p; }

    // Box-Muller, two uniforms consumed, second value discarded
    double gaussian(double mean, double sigma) {
        double u1 = next_unit();
        double u2 = next_unit();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        double r = std::sqrt(-2.0 * std::log(u1));
        return mean + sigma * r * std::cos(6.283185307179586476925286766559 * u2);
    }

    uint64_t counter() const { return counter_; }

private:
    uint64_t key_;
    uint64_t counter_ = 0;
};

} // namespace evsoar

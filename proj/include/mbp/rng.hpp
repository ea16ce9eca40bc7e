#pragma once

#include <cmath>
#include <cstdint>

namespace mbp {

// Splittable streams: stream k of master seed S is xoshiro256++ seeded from
// SplitMix64 started at S + k * golden-gamma.  Streams are cheap to create,
// statistically independent for distinct k, and reproducible across platforms
// (no library distributions are used; inversion only).
class RngStream {
  public:
    RngStream() : RngStream(0, 0) {}

    RngStream(std::uint64_t seed, std::uint64_t stream_index) {
        std::uint64_t x = seed + 0x9E3779B97F4A7C15ULL * (stream_index + 1);
        for (auto& w : state_) w = splitmix64(x);
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

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Exponential with the given rate, by inversion.  uniform() < 1 keeps the
    /// argument of log1p in (-1, 0], so the draw is always finite.
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_[4];
};

/// Stable 64-bit hash of a label, used to derive per-check stream offsets.
inline std::uint64_t stream_offset(const char* label) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (const char* p = label; *p; ++p) {
        h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(*p));
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace mbp

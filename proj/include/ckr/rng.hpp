#pragma once

#include <cstdint>

namespace ckr {

// SplitMix64 (Vigna). Counter-based: the state advances by a fixed odd
// constant and each output is a bijective mix of the counter, so streams
// derived from distinct initial states never correlate in practice.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t state) : state_(state) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1), 53-bit resolution
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

  private:
    std::uint64_t state_;
};

// Documented stream-derivation rule: stream i of master seed s starts from
// mix(s) xor mix((i+1)*phi64), where mix is the SplitMix64 finalizer.
// Deterministic in (seed, index) regardless of construction order.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline SplitMix64 derive_stream(std::uint64_t seed, std::uint64_t index) {
    return SplitMix64(mix64(seed) ^ mix64((index + 1) * 0x9E3779B97F4A7C15ull));
}

}  // namespace ckr

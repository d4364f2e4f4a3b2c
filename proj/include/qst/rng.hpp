#pragma once

#include <cmath>
#include <cstdint>

// Counter-based PRNG used everywhere randomness is needed (dataset sampling,
// weight init, shuffles). Every draw is a pure function of (stream seed,
// counter), so any subset of work is reproducible independently and in
// parallel.
//
// The avalanche mixer is the SplitMix64 finalizer (Steele et al.); streams
// are derived with mix64(seed, index) below. Values are documented here
// because dataset bytes depend on them.

namespace qst::rng {

inline constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ull;

/// SplitMix64 finalizer: full-avalanche 64-bit mixer.
inline uint64_t avalanche(uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

/// Derive a child stream seed from (parent seed, index).
inline uint64_t mix64(uint64_t seed, uint64_t index) {
    return avalanche(seed + kGolden * (index + 1));
}

/// k-th 64-bit word of the stream identified by `stream`.
inline uint64_t word_at(uint64_t stream, uint64_t counter) {
    return avalanche(stream ^ (counter * kGolden + 1));
}

/// Uniform double in (0, 1]: ((word >> 11) + 1) * 2^-53. Never 0, so it is
/// safe under log().
inline double uniform_pos(uint64_t stream, uint64_t counter) {
    return static_cast<double>((word_at(stream, counter) >> 11) + 1) * 0x1.0p-53;
}

/// Uniform double in [0, 1).
inline double uniform(uint64_t stream, uint64_t counter) {
    return static_cast<double>(word_at(stream, counter) >> 11) * 0x1.0p-53;
}

/// Uniform double in [lo, hi).
inline double uniform_in(uint64_t stream, uint64_t counter, double lo, double hi) {
    return lo + (hi - lo) * uniform(stream, counter);
}

/// Standard normal draw via Box-Muller; consumes counters 2k and 2k+1 of the
/// stream. |z| <= sqrt(2*53*ln 2) ~= 8.57 because uniform_pos is bounded away
/// from zero.
inline double gaussian(uint64_t stream, uint64_t k) {
    const double u1 = uniform_pos(stream, 2 * k);
    const double u2 = uniform(stream, 2 * k + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

} // namespace qst::rng

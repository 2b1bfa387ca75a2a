#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace rpslab {

// Stateless counter-based randomness. Every draw is a pure function of
// (seed, stream, counter), so any cell of any path can be regenerated in
// isolation and grid extensions never reshuffle history.

inline std::uint64_t hash_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream,
                                  std::uint64_t counter) {
    std::uint64_t z = hash_mix(seed + 0x9e3779b97f4a7c15ULL);
    z = hash_mix(z ^ (stream * 0xbf58476d1ce4e5b9ULL) ^ 0x94d049bb133111ebULL);
    z = hash_mix(z ^ (counter * 0x9e3779b97f4a7c15ULL));
    return z;
}

/// Uniform in (0, 1]; never returns 0, so log() is safe.
inline double u64_to_unit_open0(std::uint64_t h) {
    return (static_cast<double>(h >> 11) + 1.0) * 0x1.0p-53;
}

/// Uniform in [0, 1).
inline double u64_to_unit(std::uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

/// Standard normal draw for (seed, stream, counter), Box-Muller.
inline double gaussian_at(std::uint64_t seed, std::uint64_t stream,
                          std::uint64_t counter) {
    const std::uint64_t a = counter_hash(seed, stream, counter);
    const std::uint64_t b = hash_mix(a ^ 0xd1b54a32d192ed03ULL);
    const double u1 = u64_to_unit_open0(a);
    const double u2 = u64_to_unit(b);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Sequential convenience wrapper over the counter hash.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    double next_uniform() { return u64_to_unit(counter_hash(seed_, stream_, n_++)); }
    double next_gaussian() { return gaussian_at(seed_, stream_, n_++); }
    std::uint64_t next_u64() { return counter_hash(seed_, stream_, n_++); }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t n_ = 0;
};

}  // namespace rpslab

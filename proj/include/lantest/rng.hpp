#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

namespace lantest {

/// splitmix64 finalizer; used both as a seed expander and as the mixing
/// step of derive_seed.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic, order-independent seed derivation: each replicate gets
/// seed = derive_seed(master, {n, bits(a), replicate, tag}), so permuting
/// replicate execution order cannot change any stream.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> words) {
    std::uint64_t state = master;
    (void)splitmix64_next(state);
    for (std::uint64_t w : words) {
        state ^= w + 0x9e3779b97f4a7c15ULL + (state << 6) + (state >> 2);
        (void)splitmix64_next(state);
    }
    return splitmix64_next(state);
}

inline std::uint64_t double_bits(double x) {
    return std::bit_cast<std::uint64_t>(x);
}

/// Caller-owned random stream. All samplers are written out explicitly
/// (no std::xxx_distribution) so a given seed yields the same draws on
/// every standard-conforming platform.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) *
               (1.0 / 9007199254740992.0);
    }

    /// Standard normal via Box-Muller (one value per call).
    double normal() {
        double u1 = uniform01();
        double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
};

} // namespace lantest

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace snnk {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Counter-based stream splitting: the stream for (seed, a, b, ...) depends only
// on the path, never on how many other streams were consumed before it. This is
// what makes parallel instantiation results independent of scheduling.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = splitmix64(seed);
    for (std::uint64_t p : path) s = splitmix64(s ^ splitmix64(p + 0x632be59bd9b4e019ULL));
    return s;
}

inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> path = {}) {
    return Rng(derive_seed(seed, path));
}

inline double uniform01(Rng& rng) {
    // 53 random mantissa bits, open at 1.
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double standard_normal(Rng& rng) {
    // Box-Muller without caching so that every call consumes exactly two words.
    constexpr double two_pi = 6.283185307179586476925286766559;
    double u1 = uniform01(rng);
    double u2 = uniform01(rng);
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

inline double rademacher(Rng& rng) { return (rng() >> 63) ? 1.0 : -1.0; }

}  // namespace snnk

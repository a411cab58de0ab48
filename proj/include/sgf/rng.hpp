#pragma once

#include <cstdint>
#include <random>

namespace sgf {

// All randomness flows through std::mt19937_64 (the 64-bit Mersenne Twister,
// default tempering constants). Seeds are used verbatim; derived streams mix
// the seed with a fixed salt through splitmix64 so that e.g. the split and
// the weight init of one run do not share a stream.
using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline Rng derive_rng(std::uint64_t seed, std::uint64_t salt) {
    return Rng(splitmix64(seed ^ splitmix64(salt)));
}

}  // namespace sgf

#pragma once

#include <cstdint>
#include <string_view>

namespace uq {

// Platform-stable 64-bit hash (FNV-1a followed by a splitmix64 finalizer).
// Used wherever a decision must be a pure function of its inputs, so results
// do not depend on call order or thread interleaving.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t stable_hash(std::string_view bytes, std::uint64_t seed = 0) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ mix64(seed);
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return mix64(h);
}

// Maps a 64-bit value onto [0, 1) using the top 53 bits.
constexpr double unit_interval(std::uint64_t x) noexcept {
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

}  // namespace uq

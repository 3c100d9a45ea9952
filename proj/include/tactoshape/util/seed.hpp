#pragma once

#include <cstdint>
#include <string_view>

namespace tact::util {

// splitmix64 finalizer; decorrelates structured inputs (indices, epochs).
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Stable combination of a base seed with a stream id, so independent RNG
// consumers derived from one run seed do not share state.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix64(seed ^ mix64(stream));
}

// FNV-1a over the bytes; stable across platforms, for deriving streams
// from names (shape ids, subsystem labels).
constexpr std::uint64_t hash_name(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

} // namespace tact::util

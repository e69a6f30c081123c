#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pairdesign {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed for replicate `index` of stream `stream` under `master`. Depends only
/// on the three values, so replicates can run in any order.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t index) {
    return mix64(mix64(mix64(master) ^ stream) ^ index);
}

/// FNV-1a hash of a label, used as the stream of a named design or check.
constexpr std::uint64_t stream_id(std::string_view label) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace pairdesign

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace qlab {

// All randomness in the tool flows from one manifest seed. Substreams are
// derived by mixing the seed with a stream label and indices, so grid cells
// and trials are reproducible independently of evaluation order.

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t mix(uint64_t h, uint64_t v) { return splitmix64(h ^ v); }

inline uint64_t stream_id(uint64_t seed, std::string_view label) {
    uint64_t h = splitmix64(seed);
    for (char c : label) h = mix(h, static_cast<uint64_t>(static_cast<unsigned char>(c)));
    return h;
}

template <typename... Ix>
std::mt19937_64 substream(uint64_t seed, std::string_view label, Ix... indices) {
    uint64_t h = stream_id(seed, label);
    ((h = mix(h, static_cast<uint64_t>(indices))), ...);
    return std::mt19937_64(h);
}

}  // namespace qlab

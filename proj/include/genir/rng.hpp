#pragma once
// Seeded RNG plumbing. Every stochastic component takes an explicit
// 64-bit seed; sub-seeds are derived with splitmix64 so that independent
// generation stages (rec vs search, init vs shuffling) do not share state.

#include <cstdint>
#include <random>
#include <string_view>

namespace genir {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Stable sub-seed for a named generation stage.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view role) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the role tag
    for (char c : role) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return splitmix64(seed ^ h);
}

inline std::mt19937_64 make_rng(std::uint64_t seed) {
    return std::mt19937_64(seed);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::string_view role) {
    return std::mt19937_64(derive_seed(seed, role));
}

}  // namespace genir

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace gazedec {

// FNV-1a, used for content hashes in manifests and for deriving
// stream-specific seeds from (seed, tag) pairs.
inline uint64_t fnv1a64(std::string_view bytes, uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derived seed for an independent named stream. Generation is defined
// per (seed, tag) so results do not depend on worker scheduling.
inline uint64_t derive_seed(uint64_t seed, std::string_view tag) {
    return splitmix64(seed ^ fnv1a64(tag));
}

inline uint64_t derive_seed(uint64_t seed, std::string_view tag, uint64_t n) {
    return splitmix64(derive_seed(seed, tag) + 0x9e3779b97f4a7c15ULL * (n + 1));
}

using Rng = std::mt19937_64;

inline double runif(Rng& rng, double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double rnorm(Rng& rng, double mean = 0.0, double sd = 1.0) {
    return std::normal_distribution<double>(mean, sd)(rng);
}

} // namespace gazedec

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace graphtextack {

// splitmix64 finalizer; good avalanche for seed derivation.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
    return mix64(h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

// Deterministic sub-stream derivation: the same (seed, tags...) always maps
// to the same generator state, independent of call order elsewhere.
inline std::uint64_t derive_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t h = mix64(seed);
    for (std::uint64_t t : tags) h = hash_combine(h, t);
    return h;
}

inline std::mt19937_64 make_rng(std::uint64_t stream) { return std::mt19937_64(mix64(stream)); }

// Stream tags used across the attack pipeline.
namespace streams {
inline constexpr std::uint64_t kInit = 0x01;
inline constexpr std::uint64_t kOps = 0x02;
inline constexpr std::uint64_t kRealize = 0x03;
inline constexpr std::uint64_t kSbm = 0x04;
inline constexpr std::uint64_t kTrain = 0x05;
inline constexpr std::uint64_t kAttack = 0x06;
inline constexpr std::uint64_t kBaseline = 0x07;
inline constexpr std::uint64_t kDiagnostic = 0x08;
}  // namespace streams

}  // namespace graphtextack

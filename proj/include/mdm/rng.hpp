#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace mdm {

/// Identifies one reproducible random stream. Identical (master_seed, stream_id)
/// reproduces identical draw sequences bit-for-bit on one build.
struct RngSeed {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_id = 0;

    friend bool operator==(const RngSeed&, const RngSeed&) = default;
};

using Engine = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) noexcept {
    return mix64(h ^ mix64(v + 0x632BE59BD9B4E019ULL));
}

/// Child seed for a labelled sub-task: same master, stream id hashed with the
/// labels. Used for per-group, per-pair and per-iteration streams.
inline RngSeed derive(const RngSeed& parent, std::initializer_list<std::uint64_t> labels) {
    std::uint64_t h = mix64(parent.stream_id);
    for (auto label : labels) h = hash_combine(h, label);
    return {parent.master_seed, h};
}

inline Engine make_engine(const RngSeed& seed) {
    return Engine(hash_combine(mix64(seed.master_seed), seed.stream_id));
}

}  // namespace mdm

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace promptevo {

/// SplitMix64 generator with explicitly specified derived draws.
///
/// The standard distributions are implementation-defined, so every draw used by
/// the optimizer goes through this class to keep runs reproducible across
/// toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform integer in [0, n) by rejection sampling. Requires n > 0.
    std::size_t uniform(std::size_t n);

    /// k distinct indices from [0, n) via a partial Fisher-Yates shuffle, in draw order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

private:
    std::uint64_t state_;
};

}  // namespace promptevo

#include "promptevo/rng.hpp"

#include <numeric>
#include <stdexcept>
#include <utility>

namespace promptevo {

std::size_t Rng::uniform(std::size_t n) {
    if (n == 0) throw std::invalid_argument("Rng::uniform: empty range");
    const std::uint64_t bound = n;
    // 2^64 mod n; values below it would bias the modulo.
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const std::uint64_t x = next();
        if (x >= threshold) return static_cast<std::size_t>(x % bound);
    }
}

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t k) {
    if (k > n) throw std::invalid_argument("Rng::sample_without_replacement: k > n");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + uniform(n - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

}  // namespace promptevo

#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <utility>

namespace clustersig {

// SplitMix64: tiny counter-friendly generator. Satisfies
// UniformRandomBitGenerator, so it plugs into <random> distributions.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

inline std::uint64_t mix64(std::uint64_t x) noexcept { return SplitMix64(x)(); }

// Seed of the r-th member of a counter-indexed stream.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t counter) noexcept {
    return mix64(seed ^ mix64(counter + 0x632BE59BD9B4E019ULL));
}

// Named sub-stream of a root seed (FNV-1a over the name).
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view name) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return stream_seed(root, h);
}

// Uniform integer in [0, bound) by rejection; portable across standard libraries.
inline std::uint64_t uniform_below(SplitMix64& rng, std::uint64_t bound) noexcept {
    const std::uint64_t limit = SplitMix64::max() - SplitMix64::max() % bound;
    std::uint64_t x = rng();
    while (x >= limit) x = rng();
    return x % bound;
}

template <typename T>
void fisher_yates(std::span<T> items, SplitMix64& rng) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_below(rng, i));
        std::swap(items[i - 1], items[j]);
    }
}

}  // namespace clustersig

#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace witb {

// SplitMix64 output function.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Key of the stream for one (entity, index) cell under a master seed. Draws are
// addressed by this key rather than by position in a shared sequence, so they
// do not depend on entity order or on how work is scheduled.
constexpr std::uint64_t entity_seed(std::uint64_t master_seed, std::string_view entity) noexcept {
    return mix64(master_seed ^ mix64(fnv1a64(entity)));
}

constexpr std::uint64_t stream_key(std::uint64_t master_seed, std::string_view entity,
                                   std::uint64_t index) noexcept {
    return mix64(entity_seed(master_seed, entity) + index);
}

// SplitMix64 generator with portable uniform/normal transforms. The standard
// library distributions are implementation-defined, so they are not used
// anywhere results must be reproducible across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller; the second variate of each pair is cached.
    double normal() noexcept;

    // Uniform integer in [0, n), n > 0. Rejection keeps it unbiased.
    std::size_t below(std::size_t n) noexcept;

private:
    std::uint64_t state_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace witb

#pragma once
// Placement hypotheses: every assignment of N labeled objects to K labeled
// boxes, optionally requiring every box to be non-empty.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace witb {

using BoxIndex = std::uint32_t;

inline constexpr std::uint64_t kDefaultHypothesisCap = 1'000'000;

// Raised when a hypothesis space is larger than the configured cap (or its
// size does not fit in 64 bits).
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// One hypothesis: assignment[o] is the box holding object o.
struct Placement {
    std::vector<BoxIndex> assignment;

    auto operator<=>(const Placement&) const = default;
    bool operator==(const Placement&) const = default;
};

// Lexicographically sorted placements stored row-major.
class HypothesisSet {
public:
    HypothesisSet() = default;
    HypothesisSet(std::size_t n_objects, std::size_t k_boxes, bool allow_empty,
                  std::vector<BoxIndex> flat);

    std::size_t size() const noexcept { return n_objects_ == 0 ? 0 : flat_.size() / n_objects_; }
    bool empty() const noexcept { return size() == 0; }
    std::size_t n_objects() const noexcept { return n_objects_; }
    std::size_t k_boxes() const noexcept { return k_boxes_; }
    bool allow_empty() const noexcept { return allow_empty_; }

    std::span<const BoxIndex> operator[](std::size_t i) const noexcept {
        return {flat_.data() + i * n_objects_, n_objects_};
    }
    Placement placement(std::size_t i) const;

private:
    std::size_t n_objects_ = 0;
    std::size_t k_boxes_ = 0;
    bool allow_empty_ = false;
    std::vector<BoxIndex> flat_;
};

// Stirling number of the second kind. Throws std::overflow_error rather than
// wrapping.
std::uint64_t stirling2(std::uint64_t n, std::uint64_t k);

// K!·S(N,K) placements without empty boxes, K^N with them allowed. Throws
// std::overflow_error past 64 bits and std::invalid_argument for n or k of 0.
std::uint64_t count_hypotheses(std::uint64_t n_objects, std::uint64_t k_boxes, bool allow_empty);

// All valid placements in lexicographic order. Throws CapacityError when the
// count exceeds `cap`.
HypothesisSet enumerate_hypotheses(std::size_t n_objects, std::size_t k_boxes, bool allow_empty,
                                   std::uint64_t cap = kDefaultHypothesisCap);

// Objects assigned to `box`, ascending.
std::vector<std::size_t> box_contents(std::span<const BoxIndex> assignment, BoxIndex box);

}  // namespace witb

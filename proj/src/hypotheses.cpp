#include "witb/hypotheses.hpp"

#include <algorithm>
#include <string>

namespace witb {

namespace {

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
    std::uint64_t out = 0;
    if (__builtin_add_overflow(a, b, &out)) throw std::overflow_error("hypothesis count overflows 64 bits");
    return out;
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
    std::uint64_t out = 0;
    if (__builtin_mul_overflow(a, b, &out)) throw std::overflow_error("hypothesis count overflows 64 bits");
    return out;
}

// Depth-first fill in lexicographic order, pruning branches that can no
// longer reach every box.
void fill_surjective(std::size_t n, std::size_t k, std::vector<BoxIndex>& current,
                     std::vector<std::size_t>& used, std::size_t distinct,
                     std::vector<BoxIndex>& out) {
    const std::size_t pos = current.size();
    if (pos == n) {
        out.insert(out.end(), current.begin(), current.end());
        return;
    }
    const std::size_t remaining_after = n - pos - 1;
    for (std::size_t b = 0; b < k; ++b) {
        const std::size_t now_distinct = distinct + (used[b] == 0 ? 1 : 0);
        if (k - now_distinct > remaining_after) continue;
        current.push_back(static_cast<BoxIndex>(b));
        ++used[b];
        fill_surjective(n, k, current, used, now_distinct, out);
        --used[b];
        current.pop_back();
    }
}

}  // namespace

HypothesisSet::HypothesisSet(std::size_t n_objects, std::size_t k_boxes, bool allow_empty,
                             std::vector<BoxIndex> flat)
    : n_objects_(n_objects), k_boxes_(k_boxes), allow_empty_(allow_empty), flat_(std::move(flat)) {}

Placement HypothesisSet::placement(std::size_t i) const {
    auto row = (*this)[i];
    return Placement{{row.begin(), row.end()}};
}

std::uint64_t stirling2(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    if (n == 0) return 1;  // S(0,0)
    if (k == 0) return 0;
    // row[j] = S(i, j), updated in place for i = 1..n.
    std::vector<std::uint64_t> row(k + 1, 0);
    row[0] = 1;
    for (std::uint64_t i = 1; i <= n; ++i) {
        const std::uint64_t top = std::min(i, k);
        for (std::uint64_t j = top; j >= 1; --j) {
            row[j] = checked_add(checked_mul(j, row[j]), row[j - 1]);
        }
        row[0] = 0;
    }
    return row[k];
}

std::uint64_t count_hypotheses(std::uint64_t n_objects, std::uint64_t k_boxes, bool allow_empty) {
    if (n_objects == 0 || k_boxes == 0) {
        throw std::invalid_argument("hypothesis counts need at least one object and one box");
    }
    if (allow_empty) {
        std::uint64_t out = 1;
        for (std::uint64_t i = 0; i < n_objects; ++i) out = checked_mul(out, k_boxes);
        return out;
    }
    const std::uint64_t s = stirling2(n_objects, k_boxes);
    if (s == 0) return 0;
    std::uint64_t out = s;
    for (std::uint64_t i = 2; i <= k_boxes; ++i) out = checked_mul(out, i);
    return out;
}

HypothesisSet enumerate_hypotheses(std::size_t n_objects, std::size_t k_boxes, bool allow_empty,
                                   std::uint64_t cap) {
    std::uint64_t count = 0;
    try {
        count = count_hypotheses(n_objects, k_boxes, allow_empty);
    } catch (const std::overflow_error&) {
        throw CapacityError("hypothesis space for " + std::to_string(n_objects) + " objects in " +
                            std::to_string(k_boxes) +
                            " boxes exceeds 2^64; reduce the number of objects or boxes");
    }
    if (count > cap) {
        throw CapacityError("hypothesis space for " + std::to_string(n_objects) + " objects in " +
                            std::to_string(k_boxes) + " boxes has " + std::to_string(count) +
                            " placements, above the cap of " + std::to_string(cap) +
                            "; reduce the scene size or raise the cap" +
                            (allow_empty ? "" : " (allow-empty mode is larger still)"));
    }

    std::vector<BoxIndex> flat;
    flat.reserve(static_cast<std::size_t>(count) * n_objects);
    if (allow_empty) {
        // Odometer with the last object varying fastest.
        std::vector<BoxIndex> digits(n_objects, 0);
        for (std::uint64_t h = 0; h < count; ++h) {
            flat.insert(flat.end(), digits.begin(), digits.end());
            for (std::size_t pos = n_objects; pos-- > 0;) {
                if (++digits[pos] < k_boxes) break;
                digits[pos] = 0;
            }
        }
    } else if (count > 0) {
        std::vector<BoxIndex> current;
        current.reserve(n_objects);
        std::vector<std::size_t> used(k_boxes, 0);
        fill_surjective(n_objects, k_boxes, current, used, 0, flat);
    }
    return HypothesisSet(n_objects, k_boxes, allow_empty, std::move(flat));
}

std::vector<std::size_t> box_contents(std::span<const BoxIndex> assignment, BoxIndex box) {
    std::vector<std::size_t> out;
    for (std::size_t o = 0; o < assignment.size(); ++o) {
        if (assignment[o] == box) out.push_back(o);
    }
    return out;
}

}  // namespace witb

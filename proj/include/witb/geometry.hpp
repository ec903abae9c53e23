#pragma once
// Visual likelihood P(box observation | hypothesized contents): the fraction
// of sampled dimension realizations in which the contents fit the box.
//
// Fit is a pair of necessary conditions: every item fits on its own in its
// best axis-aligned orientation, and the summed item volume is within
// `packing_efficiency` of the box volume. It is not an exact packing solver;
// e.g. two 15 cm cubes pass in a 20 cm cube although they cannot be packed.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "witb/hypotheses.hpp"
#include "witb/random.hpp"
#include "witb/scene.hpp"

namespace witb {

struct FitParams {
    std::size_t n_samples = 1000;
    double packing_efficiency = 1.0;
    // Lower clamp for sampled extents (cm).
    double dim_floor = 0.1;
    std::uint64_t master_seed = 0;
};

// Throws std::invalid_argument describing the first bad field.
void check_fit_params(const FitParams& params);

// Draws each extent from Normal(mean, std) and clamps it below at `dim_floor`.
// Always consumes exactly three normal variates.
Vec3 sample_dims(const UncertainDims& dims, Rng& rng, double dim_floor);

// Smallest extents an object compresses to: each axis scaled by `rigidity`.
Vec3 effective_dims(const Vec3& sampled, double rigidity) noexcept;

double volume(const Vec3& v) noexcept;

// Sorted extents compared axis by axis, i.e. the best orthogonal orientation.
bool item_fits(const Vec3& item, const Vec3& box) noexcept;

bool set_fits(std::span<const Vec3> items, const Vec3& box, double packing_efficiency);

// (box index, ascending object indices) identifying one box-contents pair.
struct FitKey {
    std::size_t box = 0;
    std::vector<std::size_t> objects;

    auto operator<=>(const FitKey&) const = default;
    bool operator==(const FitKey&) const = default;
};

// Distinct (box, contents) pairs over a hypothesis set, sorted.
std::vector<FitKey> fit_keys(const HypothesisSet& hypotheses);

class VisualLikelihoodTable {
public:
    VisualLikelihoodTable() = default;
    explicit VisualLikelihoodTable(std::map<FitKey, double> rates) : rates_(std::move(rates)) {}

    // Throws std::logic_error when the key was never estimated.
    double rate(std::size_t box, const std::vector<std::size_t>& objects) const;
    bool contains(const FitKey& key) const { return rates_.contains(key); }

    const std::map<FitKey, double>& entries() const noexcept { return rates_; }
    std::size_t size() const noexcept { return rates_.size(); }

    bool operator==(const VisualLikelihoodTable&) const = default;

private:
    std::map<FitKey, double> rates_;
};

// Stream names for per-entity draws. Keyed by name so reordering objects or
// boxes in the document does not change any draw.
std::string object_stream_name(const ObjectSpec& object);
std::string box_stream_name(const BoxSpec& box);

// Acceptance rate of every (box, contents) pair appearing in `hypotheses`.
// Trial t draws one realization per object and per box from the stream
// (master_seed, entity, t); all pairs are judged on the same realizations.
// Results do not depend on `threads`.
VisualLikelihoodTable visual_likelihood_table(const ParsedScene& scene,
                                              const HypothesisSet& hypotheses,
                                              const FitParams& params, unsigned threads = 1);

}  // namespace witb

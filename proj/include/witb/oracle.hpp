#pragma once
// Brute-force reference inference and a synthetic scene generator.
//
// The reference path enumerates assignments with a plain odometer, tests fit
// analytically on mean dimensions and multiplies probabilities directly. It
// calls nothing from the hypothesis, geometry or fusion modules, so agreement
// with them is an independent check rather than a restatement.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "witb/fusion.hpp"
#include "witb/hypotheses.hpp"
#include "witb/scene.hpp"

namespace witb {

inline constexpr std::size_t kOracleMaxObjects = 6;
inline constexpr std::size_t kOracleMaxBoxes = 3;

class OracleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct OracleResult {
    // Assignments in lexicographic order with their posterior probabilities.
    std::vector<std::vector<std::size_t>> assignments;
    std::vector<double> probs;
    MarginalTable table;
    bool degenerate = false;
    double total_weight = 0.0;
};

// Throws OracleError unless the scene has at most 6 objects, at most 3 boxes
// and zero standard deviation on every extent.
OracleResult brute_force_posterior(const ParsedScene& scene, const InferenceConfig& cfg);
MarginalTable brute_force_marginals(const ParsedScene& scene, const InferenceConfig& cfg);

// Oracle output shaped for build_report.
InferenceResult oracle_inference(const ParsedScene& scene, const InferenceConfig& cfg);

struct SyntheticScene {
    ParsedScene scene;
    Placement true_placement;
    double confusion = 0.0;
};

// Deterministic household-scale scene whose boxes are sized so that
// `true_placement` fits (on mean dimensions, packing efficiency 1). Audio rows
// mix the true contents with a uniform row: (1 - confusion)·truth +
// confusion·uniform. Extents get std = dims_std_fraction · mean. When
// k_boxes > n_objects the true placement leaves some boxes empty.
SyntheticScene generate_scene(std::uint64_t seed, std::size_t n_objects, std::size_t k_boxes,
                              double confusion, double dims_std_fraction = 0.0);

}  // namespace witb

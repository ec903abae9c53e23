#pragma once
// Posterior over placements from visual fit and audio evidence, assuming a
// uniform prior and conditionally independent cues:
//
//   P(H | O, A)  ∝  ∏_i P(O_i | H_i) · P(H_i | A_i),
//   P(H_i | A_i) =  ∏_{o ∈ H_i} P(o | A_i).
//
// Per-object marginals sum the posterior over hypotheses. The two unimodal
// baselines drop one factor: vision-only sets the audio term to 1, audio-only
// normalizes each object's classifier scores across boxes.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "witb/geometry.hpp"
#include "witb/hypotheses.hpp"
#include "witb/scene.hpp"

namespace witb {

enum class Mode { full, audio_only, vision_only };

std::string_view to_string(Mode mode) noexcept;
// Accepts "full", "audio", "audio-only", "vision", "vision-only".
std::optional<Mode> parse_mode(std::string_view text) noexcept;

struct InferenceConfig {
    Mode mode = Mode::full;
    FitParams fit;
    bool allow_empty_boxes = false;
    // Lower clamp for classifier probabilities inside the audio product.
    double audio_floor = 1e-6;
    std::uint64_t hypothesis_cap = kDefaultHypothesisCap;
    // Weights are accumulated as log-sums when objects × boxes exceeds this.
    std::size_t log_space_above = 64;
    unsigned threads = 1;
};

// Throws std::invalid_argument on out-of-range fields.
void check_config(const InferenceConfig& cfg);

struct PosteriorDiagnostics {
    bool degenerate_fallback = false;
    double total_unnormalized_weight = 0.0;
};

struct PosteriorResult {
    HypothesisSet hypotheses;
    std::vector<double> probs;
    PosteriorDiagnostics diagnostics;
};

// Row-major [object][box] placement probabilities.
struct MarginalTable {
    std::size_t n_objects = 0;
    std::size_t k_boxes = 0;
    std::vector<double> values;
    // Scene order; empty when built from counts alone.
    std::vector<std::string> object_names;
    std::vector<std::string> box_ids;
    // Objects whose row fell back to uniform (audio-only baseline with no
    // classifier mass for the object in any box).
    std::vector<std::size_t> fallback_rows;

    double at(std::size_t object, std::size_t box) const { return values[object * k_boxes + box]; }
    std::span<const double> row(std::size_t object) const {
        return {values.data() + object * k_boxes, k_boxes};
    }
};

// ∏_{o ∈ contents} max(P(o|A), audio_floor); 1 for empty contents.
double audio_score(std::span<const std::size_t> contents, std::span<const double> audio_row,
                   double audio_floor);

// Unnormalized weight of one placement: ∏ over boxes of visual rate × audio
// score (audio score taken as 1 in vision-only mode). `audio` is
// audio_matrix(scene). Throws std::logic_error when the table lacks a key.
double hypothesis_weight(std::span<const BoxIndex> placement, const VisualLikelihoodTable& visual,
                         const std::vector<std::vector<double>>& audio, const InferenceConfig& cfg);

// Normalized posterior for full or vision-only mode. Falls back to uniform,
// flagging degenerate_fallback, when every weight is zero.
PosteriorResult posterior(const ParsedScene& scene, const InferenceConfig& cfg);

// Same, reusing an already estimated visual table.
PosteriorResult posterior(const ParsedScene& scene, const HypothesisSet& hypotheses,
                          const VisualLikelihoodTable& visual, const InferenceConfig& cfg);

MarginalTable marginals(const PosteriorResult& post, std::size_t n_objects, std::size_t k_boxes);
MarginalTable marginals(const PosteriorResult& post, const ParsedScene& scene);

MarginalTable audio_only_baseline(const ParsedScene& scene);
MarginalTable vision_only_baseline(const ParsedScene& scene, const InferenceConfig& cfg);

// Highest-probability placement; the lexicographically first among ties.
Placement map_hypothesis(const PosteriorResult& post);

// Shannon entropy in nats.
double posterior_entropy(const PosteriorResult& post);

// Everything a report needs, for any mode.
struct InferenceResult {
    Mode mode = Mode::full;
    MarginalTable table;
    // Audio-only mode has no hypothesis posterior: map is the per-object
    // argmax of the table and entropy is absent.
    Placement map;
    std::optional<double> entropy;
    std::optional<std::size_t> hypothesis_count;
    PosteriorDiagnostics diagnostics;
};

InferenceResult infer(const ParsedScene& scene, const InferenceConfig& cfg);

}  // namespace witb

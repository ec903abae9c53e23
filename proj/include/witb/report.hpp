#pragma once
// Report document written by `witb infer` and `witb oracle`:
//
//   scenario_id, mode, config{samples, seed, eta, dim_floor, allow_empty_boxes,
//   audio_floor}, objects[], boxes[], marginals{object: {box: p}},
//   map_placement{object: box}, posterior_entropy (nats or null),
//   diagnostics{hypothesis_count, degenerate_fallback,
//   total_unnormalized_weight, uniform_fallback_objects[]}
//
// Keys appear in exactly this order and every number is rounded to 12
// significant digits, so identical runs produce identical bytes.

#include <string>
#include <string_view>

#include "witb/fusion.hpp"
#include "witb/scene.hpp"

namespace witb {

inline constexpr int kReportDigits = 12;

// Nearest double to `value` printed with `digits` significant digits.
double round_significant(double value, int digits = kReportDigits);

std::string build_report(const ParsedScene& scene, const InferenceConfig& cfg,
                         const InferenceResult& result);

struct ReportSummary {
    std::string scenario_id;
    std::string mode;
    MarginalTable table;
};

// Reads back the parts of a report the evaluation harness needs. Throws
// std::runtime_error naming the missing or malformed field.
ReportSummary parse_report(std::string_view text);

}  // namespace witb

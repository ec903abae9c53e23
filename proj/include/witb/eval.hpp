#pragma once
// Model-versus-human comparison. Human ratings are 1..100 sliders that sum to
// 100 across the boxes for each object; model marginals are scaled by 100 and
// paired with the mean human rating of the same (scenario, object, box) cell.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "witb/fusion.hpp"

namespace witb {

struct HumanRating {
    std::string scenario_id;
    std::string participant_id;
    std::string object;
    std::string box;
    double rating = 0.0;

    bool operator==(const HumanRating&) const = default;
};

// Slider granularity allowed on the per-object sum of 100.
inline constexpr double kRatingSumTolerance = 1.0;

class RatingsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Correlation of data with no variance (or fewer than two points).
class UndefinedCorrelation : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

double pearson_r(std::span<const double> xs, std::span<const double> ys);

struct RatingsLoad {
    std::vector<HumanRating> ratings;
    std::vector<std::string> warnings;
    // (scenario, participant, object) groups whose ratings miss the 100 total.
    std::size_t flagged_groups = 0;
};

// Parses `scenario_id,participant_id,object,box,rating` rows (header
// required). Malformed rows throw RatingsError with the line number; sum
// violations are warnings unless `strict`.
RatingsLoad load_ratings(std::string_view text, bool strict = false);
RatingsLoad load_ratings_file(const std::filesystem::path& path, bool strict = false);

// Mean over `n_splits` random halvings of the scenario's participants of the
// correlation between the two halves' mean rating per (object, box). Splits
// whose correlation is undefined are skipped. Throws RatingsError with fewer
// than 4 participants, UndefinedCorrelation when no split is defined.
double split_half_agreement(const std::vector<HumanRating>& ratings, std::string_view scenario_id,
                            std::uint64_t seed, std::size_t n_splits = 100);

struct EvalPoint {
    std::string scenario_id;
    // Empty when the point is a mean over participants.
    std::string participant_id;
    std::string object;
    std::string box;
    double human = 0.0;
    double model = 0.0;
};

struct ModeCorrelation {
    double r = 0.0;
    std::vector<EvalPoint> points;
    std::vector<std::string> scenarios;
};

struct CorrelationOptions {
    // Scenarios with split-half agreement below this are dropped.
    double exclusion_threshold = 0.8;
    std::uint64_t seed = 0;
    std::size_t n_splits = 100;
    // Pair every participant's rating instead of per-cell means.
    bool per_participant = false;
};

struct EvalReport {
    double exclusion_threshold = 0.8;
    std::map<std::string, ModeCorrelation> modes;
    // Absent when the scenario has too few participants or no defined split.
    std::map<std::string, std::optional<double>> split_half;
    std::vector<std::string> excluded_scenarios;
};

using ScenarioTables = std::map<std::string, MarginalTable>;

// Correlates each mode's tables against the ratings. Throws EvalError when a
// mode shares no scenario with the ratings or every shared scenario is
// excluded, UndefinedCorrelation when the paired points have no variance.
EvalReport correlate(const std::map<std::string, ScenarioTables>& tables_by_mode,
                     const std::vector<HumanRating>& ratings, const CorrelationOptions& options = {});

// Single-mode form; the mode is reported as "model".
EvalReport correlate(const ScenarioTables& model_tables, const std::vector<HumanRating>& ratings,
                     double exclusion_threshold);

std::string serialize_eval_report(const EvalReport& report);

// mode,scenario_id,participant_id,object,box,human,model rows for plotting.
std::string points_csv(const EvalReport& report);

}  // namespace witb

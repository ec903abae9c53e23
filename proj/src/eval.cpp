#include "witb/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "json.hpp"
#include "witb/random.hpp"
#include "witb/report.hpp"

namespace witb {

double pearson_r(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("pearson_r needs equal-length inputs");
    const std::size_t n = xs.size();
    if (n < 2) throw UndefinedCorrelation("correlation needs at least two points");
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) {
        throw UndefinedCorrelation("correlation is undefined for data with zero variance");
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

// Comma-separated fields; double quotes may wrap a field and "" escapes a quote.
std::optional<std::vector<std::string>> split_csv(std::string_view line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
            was_quoted = true;
        } else if (c == ',') {
            fields.push_back(was_quoted ? field : trim(field));
            field.clear();
            was_quoted = false;
        } else {
            field += c;
        }
    }
    if (quoted) return std::nullopt;
    fields.push_back(was_quoted ? field : trim(field));
    return fields;
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}

}  // namespace

RatingsLoad load_ratings(std::string_view text, bool strict) {
    RatingsLoad out;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::set<std::tuple<std::string, std::string, std::string, std::string>> seen;

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_csv(line);
        if (!fields) throw RatingsError("line " + std::to_string(line_no) + ": unterminated quote");
        if (!header_seen) {
            const std::vector<std::string> expected{"scenario_id", "participant_id", "object", "box", "rating"};
            if (*fields != expected) {
                throw RatingsError("line " + std::to_string(line_no) +
                                   ": expected header scenario_id,participant_id,object,box,rating");
            }
            header_seen = true;
            continue;
        }
        if (fields->size() != 5) {
            throw RatingsError("line " + std::to_string(line_no) + ": expected 5 fields, got " +
                               std::to_string(fields->size()));
        }
        HumanRating r{(*fields)[0], (*fields)[1], (*fields)[2], (*fields)[3], 0.0};
        for (int i = 0; i < 4; ++i) {
            if ((*fields)[i].empty()) {
                throw RatingsError("line " + std::to_string(line_no) + ": empty field " + std::to_string(i + 1));
            }
        }
        const std::string& value = (*fields)[4];
        std::size_t used = 0;
        try {
            r.rating = std::stod(value, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != value.size() || !std::isfinite(r.rating)) {
            throw RatingsError("line " + std::to_string(line_no) + ": rating '" + value + "' is not a number");
        }
        if (r.rating < 1.0 || r.rating > 100.0) {
            throw RatingsError("line " + std::to_string(line_no) + ": rating " + value +
                               " outside the 1..100 scale");
        }
        if (!seen.emplace(r.scenario_id, r.participant_id, r.object, r.box).second) {
            throw RatingsError("line " + std::to_string(line_no) + ": duplicate rating for " +
                               r.scenario_id + "/" + r.participant_id + "/" + r.object + "/" + r.box);
        }
        out.ratings.push_back(std::move(r));
    }

    if (out.ratings.empty()) {
        out.warnings.push_back("ratings table contains no ratings");
        return out;
    }

    std::map<std::tuple<std::string, std::string, std::string>, double> sums;
    for (const auto& r : out.ratings) sums[{r.scenario_id, r.participant_id, r.object}] += r.rating;
    for (const auto& [key, sum] : sums) {
        if (std::abs(sum - 100.0) <= kRatingSumTolerance) continue;
        ++out.flagged_groups;
        const auto& [scenario, participant, object] = key;
        std::string msg = "scenario " + scenario + ", participant " + participant + ", object " +
                          object + ": ratings sum to " + fmt(sum) + ", expected 100";
        if (strict) throw RatingsError(msg);
        out.warnings.push_back(std::move(msg));
    }
    return out;
}

RatingsLoad load_ratings_file(const std::filesystem::path& path, bool strict) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RatingsError(path.string() + ": cannot open ratings file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return load_ratings(buffer.str(), strict);
    } catch (const RatingsError& e) {
        throw RatingsError(path.string() + ": " + e.what());
    }
}

namespace {

using Cell = std::pair<std::string, std::string>;  // (object, box)

// participant -> cell -> rating, for one scenario.
std::map<std::string, std::map<Cell, double>> by_participant(const std::vector<HumanRating>& ratings,
                                                              std::string_view scenario_id) {
    std::map<std::string, std::map<Cell, double>> out;
    for (const auto& r : ratings) {
        if (r.scenario_id == scenario_id) out[r.participant_id][{r.object, r.box}] = r.rating;
    }
    return out;
}

}  // namespace

double split_half_agreement(const std::vector<HumanRating>& ratings, std::string_view scenario_id,
                            std::uint64_t seed, std::size_t n_splits) {
    const auto table = by_participant(ratings, scenario_id);
    if (table.size() < 4) {
        throw RatingsError("scenario " + std::string(scenario_id) + " has " +
                           std::to_string(table.size()) + " participants; split-half needs at least 4");
    }
    std::vector<std::string> participants;
    std::set<Cell> cells;
    for (const auto& [p, ratings_of] : table) {
        participants.push_back(p);
        for (const auto& [cell, value] : ratings_of) cells.insert(cell);
    }

    const std::size_t half = participants.size() / 2;
    double total = 0.0;
    std::size_t defined = 0;
    for (std::size_t split = 0; split < n_splits; ++split) {
        Rng rng(stream_key(seed, scenario_id, split));
        std::vector<std::string> order = participants;
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

        std::vector<double> first;
        std::vector<double> second;
        for (const Cell& cell : cells) {
            double sum_a = 0.0;
            double sum_b = 0.0;
            std::size_t n_a = 0;
            std::size_t n_b = 0;
            for (std::size_t i = 0; i < order.size(); ++i) {
                const auto& ratings_of = table.at(order[i]);
                auto it = ratings_of.find(cell);
                if (it == ratings_of.end()) continue;
                if (i < half) {
                    sum_a += it->second;
                    ++n_a;
                } else {
                    sum_b += it->second;
                    ++n_b;
                }
            }
            if (n_a == 0 || n_b == 0) continue;
            first.push_back(sum_a / static_cast<double>(n_a));
            second.push_back(sum_b / static_cast<double>(n_b));
        }
        try {
            total += pearson_r(first, second);
            ++defined;
        } catch (const UndefinedCorrelation&) {
        }
    }
    if (defined == 0) {
        throw UndefinedCorrelation("no split of scenario " + std::string(scenario_id) +
                                   " yields a defined correlation");
    }
    return total / static_cast<double>(defined);
}

EvalReport correlate(const std::map<std::string, ScenarioTables>& tables_by_mode,
                     const std::vector<HumanRating>& ratings, const CorrelationOptions& options) {
    EvalReport report;
    report.exclusion_threshold = options.exclusion_threshold;

    std::set<std::string> rated;
    for (const auto& r : ratings) rated.insert(r.scenario_id);
    std::set<std::string> modeled;
    for (const auto& [mode, tables] : tables_by_mode) {
        for (const auto& [scenario, table] : tables) modeled.insert(scenario);
    }
    std::set<std::string> shared;
    std::set_intersection(rated.begin(), rated.end(), modeled.begin(), modeled.end(),
                          std::inserter(shared, shared.end()));
    if (shared.empty()) throw EvalError("model reports and human ratings share no scenario");

    std::set<std::string> excluded;
    for (const auto& scenario : shared) {
        std::optional<double> agreement;
        try {
            agreement = split_half_agreement(ratings, scenario, options.seed, options.n_splits);
        } catch (const RatingsError&) {
        } catch (const UndefinedCorrelation&) {
        }
        report.split_half[scenario] = agreement;
        if (agreement && *agreement < options.exclusion_threshold) excluded.insert(scenario);
    }
    report.excluded_scenarios.assign(excluded.begin(), excluded.end());

    // scenario -> cell -> participant -> rating
    std::map<std::string, std::map<Cell, std::map<std::string, double>>> cells;
    for (const auto& r : ratings) cells[r.scenario_id][{r.object, r.box}][r.participant_id] = r.rating;

    for (const auto& [mode, tables] : tables_by_mode) {
        ModeCorrelation result;
        for (const auto& [scenario, table] : tables) {
            if (!shared.contains(scenario) || excluded.contains(scenario)) continue;
            result.scenarios.push_back(scenario);
            const auto& scenario_cells = cells.at(scenario);
            std::map<Cell, double> model;
            for (std::size_t o = 0; o < table.n_objects; ++o) {
                for (std::size_t b = 0; b < table.k_boxes; ++b) {
                    model[{table.object_names.at(o), table.box_ids.at(b)}] = 100.0 * table.at(o, b);
                }
            }
            for (const auto& [cell, value] : model) {
                auto it = scenario_cells.find(cell);
                if (it == scenario_cells.end()) continue;
                if (options.per_participant) {
                    for (const auto& [participant, rating] : it->second) {
                        result.points.push_back({scenario, participant, cell.first, cell.second, rating, value});
                    }
                } else {
                    double sum = 0.0;
                    for (const auto& [participant, rating] : it->second) sum += rating;
                    const double mean = sum / static_cast<double>(it->second.size());
                    result.points.push_back({scenario, "", cell.first, cell.second, mean, value});
                }
            }
        }
        if (result.scenarios.empty()) {
            throw EvalError("mode " + mode + ": every scenario shared with the ratings was excluded");
        }
        std::vector<double> human;
        std::vector<double> model;
        for (const auto& p : result.points) {
            human.push_back(p.human);
            model.push_back(p.model);
        }
        result.r = pearson_r(human, model);
        report.modes.emplace(mode, std::move(result));
    }
    return report;
}

EvalReport correlate(const ScenarioTables& model_tables, const std::vector<HumanRating>& ratings,
                     double exclusion_threshold) {
    CorrelationOptions options;
    options.exclusion_threshold = exclusion_threshold;
    return correlate(std::map<std::string, ScenarioTables>{{"model", model_tables}}, ratings, options);
}

std::string serialize_eval_report(const EvalReport& report) {
    nlohmann::ordered_json doc;
    doc["exclusion_threshold"] = round_significant(report.exclusion_threshold);
    nlohmann::ordered_json split = nlohmann::ordered_json::object();
    for (const auto& [scenario, value] : report.split_half) {
        split[scenario] = value ? nlohmann::ordered_json(round_significant(*value)) : nlohmann::ordered_json(nullptr);
    }
    doc["split_half"] = std::move(split);
    doc["excluded_scenarios"] = report.excluded_scenarios;
    doc["excluded_count"] = report.excluded_scenarios.size();
    nlohmann::ordered_json modes = nlohmann::ordered_json::object();
    for (const auto& [mode, result] : report.modes) {
        nlohmann::ordered_json m;
        m["r"] = round_significant(result.r);
        m["n_points"] = result.points.size();
        m["scenarios"] = result.scenarios;
        nlohmann::ordered_json points = nlohmann::ordered_json::array();
        for (const auto& p : result.points) {
            nlohmann::ordered_json point;
            point["scenario_id"] = p.scenario_id;
            if (!p.participant_id.empty()) point["participant_id"] = p.participant_id;
            point["object"] = p.object;
            point["box"] = p.box;
            point["human"] = round_significant(p.human);
            point["model"] = round_significant(p.model);
            points.push_back(std::move(point));
        }
        m["points"] = std::move(points);
        modes[mode] = std::move(m);
    }
    doc["modes"] = std::move(modes);
    return doc.dump(2) + "\n";
}

std::string points_csv(const EvalReport& report) {
    auto quote = [](const std::string& s) {
        if (s.find_first_of(",\"") == std::string::npos) return s;
        std::string out = "\"";
        for (char c : s) {
            if (c == '"') out += '"';
            out += c;
        }
        return out + "\"";
    };
    std::string out = "mode,scenario_id,participant_id,object,box,human,model\n";
    for (const auto& [mode, result] : report.modes) {
        for (const auto& p : result.points) {
            out += quote(mode) + "," + quote(p.scenario_id) + "," + quote(p.participant_id) + "," +
                   quote(p.object) + "," + quote(p.box) + "," + fmt(round_significant(p.human)) + "," +
                   fmt(round_significant(p.model)) + "\n";
        }
    }
    return out;
}

}  // namespace witb

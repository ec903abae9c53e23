#include "witb/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

#include "json.hpp"

namespace witb {

using ordered_json = nlohmann::ordered_json;

double round_significant(double value, int digits) {
    if (!std::isfinite(value) || value == 0.0) return value;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, value);
    return std::strtod(buf, nullptr);
}

std::string build_report(const ParsedScene& scene, const InferenceConfig& cfg,
                         const InferenceResult& result) {
    const MarginalTable& table = result.table;
    ordered_json doc;
    doc["scenario_id"] = scene.scenario_id;
    doc["mode"] = std::string(to_string(result.mode));

    ordered_json config;
    config["samples"] = cfg.fit.n_samples;
    config["seed"] = cfg.fit.master_seed;
    config["eta"] = round_significant(cfg.fit.packing_efficiency);
    config["dim_floor"] = round_significant(cfg.fit.dim_floor);
    config["allow_empty_boxes"] = cfg.allow_empty_boxes;
    config["audio_floor"] = round_significant(cfg.audio_floor);
    doc["config"] = std::move(config);

    ordered_json objects = ordered_json::array();
    for (const auto& o : scene.objects) objects.push_back(o.name);
    ordered_json boxes = ordered_json::array();
    for (const auto& b : scene.boxes) boxes.push_back(b.id);
    doc["objects"] = std::move(objects);
    doc["boxes"] = std::move(boxes);

    ordered_json marginals = ordered_json::object();
    for (std::size_t o = 0; o < scene.object_count(); ++o) {
        ordered_json row = ordered_json::object();
        for (std::size_t b = 0; b < scene.box_count(); ++b) {
            row[scene.boxes[b].id] = round_significant(table.at(o, b));
        }
        marginals[scene.objects[o].name] = std::move(row);
    }
    doc["marginals"] = std::move(marginals);

    ordered_json map = ordered_json::object();
    for (std::size_t o = 0; o < result.map.assignment.size(); ++o) {
        map[scene.objects[o].name] = scene.boxes[result.map.assignment[o]].id;
    }
    doc["map_placement"] = std::move(map);

    doc["posterior_entropy"] =
        result.entropy ? ordered_json(round_significant(*result.entropy)) : ordered_json(nullptr);

    ordered_json diag;
    diag["hypothesis_count"] = result.hypothesis_count ? ordered_json(*result.hypothesis_count)
                                                       : ordered_json(nullptr);
    diag["degenerate_fallback"] = result.diagnostics.degenerate_fallback;
    diag["total_unnormalized_weight"] =
        round_significant(result.diagnostics.total_unnormalized_weight);
    ordered_json fallback = ordered_json::array();
    for (std::size_t o : table.fallback_rows) fallback.push_back(scene.objects[o].name);
    diag["uniform_fallback_objects"] = std::move(fallback);
    doc["diagnostics"] = std::move(diag);

    return doc.dump(2) + "\n";
}

ReportSummary parse_report(std::string_view text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text.begin(), text.end());
    } catch (const ordered_json::parse_error& e) {
        throw std::runtime_error(std::string("malformed report: ") + e.what());
    }
    auto require = [&](const char* key) -> const ordered_json& {
        if (!doc.is_object() || !doc.contains(key)) {
            throw std::runtime_error(std::string("report is missing '") + key + "'");
        }
        return doc[key];
    };
    try {
        ReportSummary out;
        out.scenario_id = require("scenario_id").get<std::string>();
        out.mode = require("mode").get<std::string>();
        out.table.object_names = require("objects").get<std::vector<std::string>>();
        out.table.box_ids = require("boxes").get<std::vector<std::string>>();
        out.table.n_objects = out.table.object_names.size();
        out.table.k_boxes = out.table.box_ids.size();
        const ordered_json& m = require("marginals");
        for (const auto& object : out.table.object_names) {
            for (const auto& box : out.table.box_ids) {
                if (!m.contains(object) || !m[object].contains(box)) {
                    throw std::runtime_error("report marginals lack " + object + "/" + box);
                }
                out.table.values.push_back(m[object][box].get<double>());
            }
        }
        return out;
    } catch (const ordered_json::exception& e) {
        throw std::runtime_error(std::string("malformed report: ") + e.what());
    }
}

}  // namespace witb

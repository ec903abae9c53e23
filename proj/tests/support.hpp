#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "witb/eval.hpp"
#include "witb/fusion.hpp"
#include "witb/random.hpp"
#include "witb/scene.hpp"

namespace witb::test {

inline std::filesystem::path fixture(const std::string& name) {
    return std::filesystem::path(WITB_FIXTURE_DIR) / name;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline ObjectSpec object(std::string name, Vec3 mean, Vec3 std = {0, 0, 0}, double rigidity = 1.0) {
    return ObjectSpec{std::move(name), {mean, std}, {100.0, 0.0}, "plastic", rigidity};
}

inline BoxSpec box(std::string id, Vec3 mean, Vec3 std = {0, 0, 0}) {
    return BoxSpec{id, id, {mean, std}};
}

// Audio rows keyed by box id, one entry per object in scene order.
inline ParsedScene scene_of(std::vector<ObjectSpec> objects, std::vector<BoxSpec> boxes,
                            std::vector<std::vector<double>> rows) {
    ParsedScene s;
    s.scenario_id = "test";
    s.objects = std::move(objects);
    s.boxes = std::move(boxes);
    for (const auto& o : s.objects) s.audio.labels.push_back(o.name);
    for (std::size_t b = 0; b < s.boxes.size(); ++b) s.audio.rows[s.boxes[b].id] = rows.at(b);
    return s;
}

inline void make_audio_uniform(ParsedScene& s) {
    const double u = 1.0 / static_cast<double>(s.object_count());
    for (auto& [id, row] : s.audio.rows) std::fill(row.begin(), row.end(), u);
}

// New document order: objects[i] = old objects[object_order[i]], same for boxes.
// Audio labels are also reordered so the document really differs.
inline ParsedScene permuted(const ParsedScene& s, const std::vector<std::size_t>& object_order,
                            const std::vector<std::size_t>& box_order) {
    ParsedScene out;
    out.scenario_id = s.scenario_id;
    for (std::size_t i : object_order) out.objects.push_back(s.objects[i]);
    for (std::size_t i : box_order) out.boxes.push_back(s.boxes[i]);
    std::vector<std::size_t> label_order(s.audio.labels.size());
    std::iota(label_order.begin(), label_order.end(), 0);
    std::reverse(label_order.begin(), label_order.end());
    for (std::size_t j : label_order) out.audio.labels.push_back(s.audio.labels[j]);
    for (const auto& [id, row] : s.audio.rows) {
        std::vector<double> r;
        for (std::size_t j : label_order) r.push_back(row[j]);
        out.audio.rows[id] = std::move(r);
    }
    return out;
}

// Participants who rate 100·P(object in box) plus Normal(0, noise) points,
// clamped to the 1..100 slider and rescaled so each object's ratings sum to 100.
inline std::vector<HumanRating> synthetic_ratings(const std::string& scenario, const MarginalTable& table,
                                                  std::size_t participants, double noise, std::uint64_t seed) {
    std::vector<HumanRating> out;
    Rng rng(seed);
    for (std::size_t p = 0; p < participants; ++p) {
        const std::string pid = "p" + std::to_string(p);
        for (std::size_t o = 0; o < table.n_objects; ++o) {
            std::vector<double> r(table.k_boxes);
            double sum = 0.0;
            for (std::size_t b = 0; b < table.k_boxes; ++b) {
                r[b] = std::clamp(100.0 * table.at(o, b) + noise * rng.normal(), 1.0, 100.0);
                sum += r[b];
            }
            for (std::size_t b = 0; b < table.k_boxes; ++b) {
                out.push_back({scenario, pid, table.object_names[o], table.box_ids[b], 100.0 * r[b] / sum});
            }
        }
    }
    return out;
}

}  // namespace witb::test

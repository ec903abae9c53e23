#include "witb/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>

#include "witb/random.hpp"

namespace witb {

namespace {

void require_oracle_scene(const ParsedScene& scene) {
    if (scene.object_count() > kOracleMaxObjects || scene.box_count() > kOracleMaxBoxes) {
        throw OracleError("oracle handles at most " + std::to_string(kOracleMaxObjects) +
                          " objects and " + std::to_string(kOracleMaxBoxes) + " boxes");
    }
    auto zero = [](const UncertainDims& d) { return d.std[0] == 0.0 && d.std[1] == 0.0 && d.std[2] == 0.0; };
    for (const auto& o : scene.objects) {
        if (!zero(o.dims)) {
            throw OracleError("oracle needs zero dimension std; object '" + o.name + "' has nonzero std");
        }
    }
    for (const auto& b : scene.boxes) {
        if (!zero(b.dims)) {
            throw OracleError("oracle needs zero dimension std; box '" + b.id + "' has nonzero std");
        }
    }
}

std::array<double, 3> sorted_extents(std::array<double, 3> v) {
    std::sort(v.begin(), v.end());
    return v;
}

// Fit of a set of objects in one box on (floored) mean dimensions.
bool fits(const ParsedScene& scene, const std::vector<std::size_t>& objects, std::size_t box,
          const FitParams& fit) {
    std::array<double, 3> box_dims{};
    for (int i = 0; i < 3; ++i) box_dims[i] = std::max(scene.boxes[box].dims.mean[i], fit.dim_floor);
    const auto box_sorted = sorted_extents(box_dims);
    double used = 0.0;
    for (std::size_t o : objects) {
        const ObjectSpec& obj = scene.objects[o];
        std::array<double, 3> d{};
        for (int i = 0; i < 3; ++i) d[i] = std::max(obj.dims.mean[i], fit.dim_floor) * obj.rigidity;
        const auto s = sorted_extents(d);
        for (int i = 0; i < 3; ++i) {
            if (s[i] > box_sorted[i]) return false;
        }
        used += d[0] * d[1] * d[2];
    }
    return used <= fit.packing_efficiency * (box_dims[0] * box_dims[1] * box_dims[2]);
}

double classifier_prob(const ParsedScene& scene, std::size_t box, std::size_t object) {
    const auto& labels = scene.audio.labels;
    const auto& row = scene.audio.rows.at(scene.boxes[box].id);
    for (std::size_t j = 0; j < labels.size(); ++j) {
        if (labels[j] == scene.objects[object].name) return row[j];
    }
    throw OracleError("no audio label for object '" + scene.objects[object].name + "'");
}

// Odometer step, last object fastest. False after the final assignment.
bool next_assignment(std::vector<std::size_t>& digits, std::size_t k) {
    for (std::size_t pos = digits.size(); pos-- > 0;) {
        if (++digits[pos] < k) return true;
        digits[pos] = 0;
    }
    return false;
}

MarginalTable named_table(const ParsedScene& scene) {
    MarginalTable t;
    t.n_objects = scene.object_count();
    t.k_boxes = scene.box_count();
    t.values.assign(t.n_objects * t.k_boxes, 0.0);
    for (const auto& o : scene.objects) t.object_names.push_back(o.name);
    for (const auto& b : scene.boxes) t.box_ids.push_back(b.id);
    return t;
}

OracleResult audio_only(const ParsedScene& scene) {
    OracleResult out;
    out.table = named_table(scene);
    const std::size_t n = scene.object_count();
    const std::size_t k = scene.box_count();
    for (std::size_t o = 0; o < n; ++o) {
        double denom = 0.0;
        for (std::size_t b = 0; b < k; ++b) denom += classifier_prob(scene, b, o);
        for (std::size_t b = 0; b < k; ++b) {
            out.table.values[o * k + b] =
                denom > 0.0 ? classifier_prob(scene, b, o) / denom : 1.0 / static_cast<double>(k);
        }
        if (!(denom > 0.0)) out.table.fallback_rows.push_back(o);
    }
    return out;
}

}  // namespace

OracleResult brute_force_posterior(const ParsedScene& scene, const InferenceConfig& cfg) {
    require_oracle_scene(scene);
    if (cfg.mode == Mode::audio_only) return audio_only(scene);

    const std::size_t n = scene.object_count();
    const std::size_t k = scene.box_count();
    const bool use_audio = cfg.mode == Mode::full;

    OracleResult out;
    std::vector<double> weights;
    std::vector<std::size_t> digits(n, 0);
    do {
        std::vector<std::size_t> per_box(k, 0);
        for (std::size_t d : digits) ++per_box[d];
        const bool surjective = std::all_of(per_box.begin(), per_box.end(), [](std::size_t c) { return c > 0; });
        if (!cfg.allow_empty_boxes && !surjective) continue;
        double w = 1.0;
        for (std::size_t b = 0; b < k; ++b) {
            std::vector<std::size_t> inside;
            for (std::size_t o = 0; o < n; ++o) {
                if (digits[o] == b) inside.push_back(o);
            }
            w *= fits(scene, inside, b, cfg.fit) ? 1.0 : 0.0;
            if (use_audio) {
                for (std::size_t o : inside) w *= std::max(classifier_prob(scene, b, o), cfg.audio_floor);
            }
        }
        out.assignments.push_back(digits);
        weights.push_back(w);
    } while (next_assignment(digits, k));
    if (out.assignments.empty()) throw OracleError("no admissible assignment");

    double total = 0.0;
    for (double w : weights) total += w;
    out.total_weight = total;
    out.probs.resize(weights.size());
    if (total > 0.0) {
        for (std::size_t i = 0; i < weights.size(); ++i) out.probs[i] = weights[i] / total;
    } else {
        out.degenerate = true;
        for (double& p : out.probs) p = 1.0 / static_cast<double>(weights.size());
    }

    out.table = named_table(scene);
    for (std::size_t i = 0; i < out.assignments.size(); ++i) {
        for (std::size_t o = 0; o < n; ++o) out.table.values[o * k + out.assignments[i][o]] += out.probs[i];
    }
    return out;
}

MarginalTable brute_force_marginals(const ParsedScene& scene, const InferenceConfig& cfg) {
    return brute_force_posterior(scene, cfg).table;
}

InferenceResult oracle_inference(const ParsedScene& scene, const InferenceConfig& cfg) {
    OracleResult r = brute_force_posterior(scene, cfg);
    InferenceResult out;
    out.mode = cfg.mode;
    out.table = r.table;
    if (cfg.mode == Mode::audio_only) {
        for (std::size_t o = 0; o < r.table.n_objects; ++o) {
            std::size_t best = 0;
            for (std::size_t b = 1; b < r.table.k_boxes; ++b) {
                if (r.table.at(o, b) > r.table.at(o, best)) best = b;
            }
            out.map.assignment.push_back(static_cast<BoxIndex>(best));
        }
        return out;
    }
    std::size_t best = 0;
    double entropy = 0.0;
    for (std::size_t i = 0; i < r.probs.size(); ++i) {
        if (r.probs[i] > r.probs[best]) best = i;
        if (r.probs[i] > 0.0) entropy -= r.probs[i] * std::log(r.probs[i]);
    }
    for (std::size_t b : r.assignments[best]) out.map.assignment.push_back(static_cast<BoxIndex>(b));
    out.entropy = entropy;
    out.hypothesis_count = r.assignments.size();
    out.diagnostics.degenerate_fallback = r.degenerate;
    out.diagnostics.total_unnormalized_weight = r.total_weight;
    return out;
}

namespace {

constexpr std::array<const char*, 12> kNames = {
    "mug", "plate", "book", "water bottle", "laptop", "pillow",
    "yoga mat", "coins", "candle", "toy car", "keys", "scarf"};
constexpr std::array<const char*, 6> kMaterials = {"ceramic", "metal", "plastic", "wood", "fabric", "glass"};

double round_to(double x, double step) { return std::round(x / step) * step; }
double round_up_to(double x, double step) { return std::ceil(x / step) * step; }

}  // namespace

SyntheticScene generate_scene(std::uint64_t seed, std::size_t n_objects, std::size_t k_boxes,
                              double confusion, double dims_std_fraction) {
    if (n_objects < 1 || k_boxes < 1) throw std::invalid_argument("need at least one object and one box");
    if (!(confusion >= 0.0 && confusion <= 1.0)) throw std::invalid_argument("confusion must lie in [0, 1]");
    if (!(dims_std_fraction >= 0.0)) throw std::invalid_argument("dims_std_fraction must be >= 0");

    Rng rng(mix64(seed ^ 0x7769746273636e65ULL));
    SyntheticScene out;
    out.confusion = confusion;
    ParsedScene& scene = out.scene;
    scene.scenario_id = "synthetic-" + std::to_string(seed);

    for (std::size_t i = 0; i < n_objects; ++i) {
        ObjectSpec o;
        o.name = kNames[i % kNames.size()];
        if (i >= kNames.size()) o.name += " " + std::to_string(i / kNames.size() + 1);
        for (int a = 0; a < 3; ++a) {
            o.dims.mean[a] = round_to(rng.uniform(2.0, 40.0), 0.1);
            o.dims.std[a] = round_to(dims_std_fraction * o.dims.mean[a], 0.01);
        }
        o.weight_g = {round_to(rng.uniform(50.0, 2000.0), 1.0), round_to(rng.uniform(0.0, 100.0), 1.0)};
        o.material = kMaterials[rng.below(kMaterials.size())];
        o.rigidity = round_to(rng.uniform(0.5, 1.0), 0.01);
        scene.objects.push_back(std::move(o));
    }

    // True placement: when every box can be filled, a shuffled prefix of the
    // objects seeds one box each; the remainder land anywhere.
    std::vector<std::size_t> order(n_objects);
    for (std::size_t i = 0; i < n_objects; ++i) order[i] = i;
    for (std::size_t i = n_objects; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    out.true_placement.assignment.assign(n_objects, 0);
    for (std::size_t i = 0; i < n_objects; ++i) {
        const std::size_t box = (k_boxes <= n_objects && i < k_boxes) ? i : rng.below(k_boxes);
        out.true_placement.assignment[order[i]] = static_cast<BoxIndex>(box);
    }

    for (std::size_t b = 0; b < k_boxes; ++b) {
        BoxSpec box;
        box.id = "box" + std::to_string(b + 1);
        box.label = k_boxes == 2 ? (b == 0 ? "left" : "right") : box.id;
        std::array<double, 3> need{0.0, 0.0, 0.0};
        double content_volume = 0.0;
        bool any = false;
        for (std::size_t o = 0; o < n_objects; ++o) {
            if (out.true_placement.assignment[o] != b) continue;
            any = true;
            const ObjectSpec& obj = scene.objects[o];
            std::array<double, 3> eff{};
            for (int a = 0; a < 3; ++a) eff[a] = obj.dims.mean[a] * obj.rigidity;
            content_volume += eff[0] * eff[1] * eff[2];
            std::sort(eff.begin(), eff.end());
            for (int a = 0; a < 3; ++a) need[a] = std::max(need[a], eff[a]);
        }
        std::array<double, 3> dims{};
        if (any) {
            for (int a = 0; a < 3; ++a) dims[a] = need[a] * rng.uniform(1.05, 1.4);
            const double vol = dims[0] * dims[1] * dims[2];
            if (vol < content_volume * 1.05) {
                const double grow = std::cbrt(content_volume * 1.05 / vol);
                for (double& d : dims) d *= grow;
            }
        } else {
            for (double& d : dims) d = rng.uniform(10.0, 50.0);
        }
        for (std::size_t i = 3; i > 1; --i) std::swap(dims[i - 1], dims[rng.below(i)]);
        for (int a = 0; a < 3; ++a) {
            box.dims.mean[a] = round_up_to(dims[a], 0.1);
            box.dims.std[a] = round_to(dims_std_fraction * box.dims.mean[a], 0.01);
        }
        scene.boxes.push_back(std::move(box));
    }

    for (const auto& o : scene.objects) scene.audio.labels.push_back(o.name);
    const double uniform = 1.0 / static_cast<double>(n_objects);
    for (std::size_t b = 0; b < k_boxes; ++b) {
        std::vector<double> truth(n_objects, 0.0);
        std::size_t count = 0;
        for (std::size_t o = 0; o < n_objects; ++o) {
            if (out.true_placement.assignment[o] == b) {
                truth[o] = 1.0;
                ++count;
            }
        }
        std::vector<double> row(n_objects);
        double sum = 0.0;
        for (std::size_t o = 0; o < n_objects; ++o) {
            const double t = count > 0 ? truth[o] / static_cast<double>(count) : uniform;
            row[o] = (1.0 - confusion) * t + confusion * uniform;
            sum += row[o];
        }
        for (double& p : row) p /= sum;
        scene.audio.rows[scene.boxes[b].id] = std::move(row);
    }
    return out;
}

}  // namespace witb

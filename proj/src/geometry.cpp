#include "witb/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <thread>

namespace witb {

void check_fit_params(const FitParams& params) {
    if (params.n_samples < 1) throw std::invalid_argument("n_samples must be at least 1");
    if (!(params.packing_efficiency > 0.0 && params.packing_efficiency <= 1.0)) {
        throw std::invalid_argument("packing efficiency must lie in (0, 1]");
    }
    if (!(params.dim_floor > 0.0) || !std::isfinite(params.dim_floor)) {
        throw std::invalid_argument("dim_floor must be a finite length > 0");
    }
}

Vec3 sample_dims(const UncertainDims& dims, Rng& rng, double dim_floor) {
    Vec3 out{};
    for (std::size_t i = 0; i < 3; ++i) {
        const double z = rng.normal();
        out[i] = std::max(dims.mean[i] + dims.std[i] * z, dim_floor);
    }
    return out;
}

Vec3 effective_dims(const Vec3& sampled, double rigidity) noexcept {
    return {sampled[0] * rigidity, sampled[1] * rigidity, sampled[2] * rigidity};
}

double volume(const Vec3& v) noexcept { return v[0] * v[1] * v[2]; }

bool item_fits(const Vec3& item, const Vec3& box) noexcept {
    Vec3 a = item;
    Vec3 b = box;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return a[0] <= b[0] && a[1] <= b[1] && a[2] <= b[2];
}

bool set_fits(std::span<const Vec3> items, const Vec3& box, double packing_efficiency) {
    if (items.empty()) return true;
    // Volumes are summed in ascending order so the result does not depend on
    // the order objects are listed in.
    std::vector<double> volumes;
    volumes.reserve(items.size());
    for (const Vec3& item : items) {
        if (!item_fits(item, box)) return false;
        volumes.push_back(volume(item));
    }
    std::sort(volumes.begin(), volumes.end());
    double total = 0.0;
    for (double v : volumes) total += v;
    return total <= packing_efficiency * volume(box);
}

std::vector<FitKey> fit_keys(const HypothesisSet& hypotheses) {
    std::set<FitKey> keys;
    FitKey scratch;
    for (std::size_t h = 0; h < hypotheses.size(); ++h) {
        auto row = hypotheses[h];
        for (std::size_t b = 0; b < hypotheses.k_boxes(); ++b) {
            scratch.box = b;
            scratch.objects.clear();
            for (std::size_t o = 0; o < row.size(); ++o) {
                if (row[o] == b) scratch.objects.push_back(o);
            }
            if (!keys.contains(scratch)) keys.insert(scratch);
        }
    }
    return {keys.begin(), keys.end()};
}

double VisualLikelihoodTable::rate(std::size_t box, const std::vector<std::size_t>& objects) const {
    auto it = rates_.find(FitKey{box, objects});
    if (it == rates_.end()) {
        throw std::logic_error("visual likelihood table has no entry for box " +
                               std::to_string(box) + " with " +
                               std::to_string(objects.size()) + " objects");
    }
    return it->second;
}

std::string object_stream_name(const ObjectSpec& object) { return "object/" + object.name; }

std::string box_stream_name(const BoxSpec& box) { return "box/" + box.id; }

VisualLikelihoodTable visual_likelihood_table(const ParsedScene& scene,
                                              const HypothesisSet& hypotheses,
                                              const FitParams& params, unsigned threads) {
    check_fit_params(params);
    if (hypotheses.n_objects() != scene.object_count() ||
        hypotheses.k_boxes() != scene.box_count()) {
        throw std::invalid_argument("hypothesis set does not match the scene's object/box counts");
    }

    const std::vector<FitKey> keys = fit_keys(hypotheses);
    const std::size_t n_obj = scene.object_count();
    const std::size_t n_box = scene.box_count();

    std::vector<std::uint64_t> object_seeds(n_obj);
    for (std::size_t o = 0; o < n_obj; ++o) {
        object_seeds[o] = entity_seed(params.master_seed, object_stream_name(scene.objects[o]));
    }
    std::vector<std::uint64_t> box_seeds(n_box);
    for (std::size_t b = 0; b < n_box; ++b) {
        box_seeds[b] = entity_seed(params.master_seed, box_stream_name(scene.boxes[b]));
    }

    auto run_trials = [&](std::size_t first, std::size_t last, std::vector<std::uint64_t>& accepted) {
        std::vector<Vec3> items(n_obj);
        std::vector<Vec3> boxes(n_box);
        std::vector<Vec3> gathered;
        gathered.reserve(n_obj);
        for (std::size_t t = first; t < last; ++t) {
            for (std::size_t o = 0; o < n_obj; ++o) {
                Rng rng(mix64(object_seeds[o] + t));
                items[o] = effective_dims(
                    sample_dims(scene.objects[o].dims, rng, params.dim_floor),
                    scene.objects[o].rigidity);
            }
            for (std::size_t b = 0; b < n_box; ++b) {
                Rng rng(mix64(box_seeds[b] + t));
                boxes[b] = sample_dims(scene.boxes[b].dims, rng, params.dim_floor);
            }
            for (std::size_t k = 0; k < keys.size(); ++k) {
                gathered.clear();
                for (std::size_t o : keys[k].objects) gathered.push_back(items[o]);
                if (set_fits(gathered, boxes[keys[k].box], params.packing_efficiency)) {
                    ++accepted[k];
                }
            }
        }
    };

    const std::size_t n = params.n_samples;
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, n);
    std::vector<std::vector<std::uint64_t>> partial(workers,
                                                    std::vector<std::uint64_t>(keys.size(), 0));
    if (workers == 1) {
        run_trials(0, n, partial[0]);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t first = n * w / workers;
            const std::size_t last = n * (w + 1) / workers;
            pool.emplace_back([&, first, last, w] { run_trials(first, last, partial[w]); });
        }
    }

    std::map<FitKey, double> rates;
    for (std::size_t k = 0; k < keys.size(); ++k) {
        std::uint64_t total = 0;
        for (const auto& p : partial) total += p[k];
        rates.emplace(keys[k], static_cast<double>(total) / static_cast<double>(n));
    }
    return VisualLikelihoodTable(std::move(rates));
}

}  // namespace witb

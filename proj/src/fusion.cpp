#include "witb/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace witb {

namespace {

// Ascending-order sum: equal multisets give bit-identical totals.
double sorted_sum(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    double total = 0.0;
    for (double v : values) total += v;
    return total;
}

template <typename Less>
std::vector<std::size_t> order_by(std::size_t n, Less less) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), less);
    return idx;
}

// Runs body(first, last) over [0, n) split across `threads` workers and
// rethrows the first worker exception.
template <typename Body>
void parallel_chunks(std::size_t n, unsigned threads, Body body) {
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
    if (workers == 1) {
        body(0, n);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t first = n * w / workers;
            const std::size_t last = n * (w + 1) / workers;
            pool.emplace_back([&, first, last, w] {
                try {
                    body(first, last);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace

std::string_view to_string(Mode mode) noexcept {
    switch (mode) {
        case Mode::full: return "full";
        case Mode::audio_only: return "audio-only";
        case Mode::vision_only: return "vision-only";
    }
    return "full";
}

std::optional<Mode> parse_mode(std::string_view text) noexcept {
    if (text == "full") return Mode::full;
    if (text == "audio" || text == "audio-only") return Mode::audio_only;
    if (text == "vision" || text == "vision-only") return Mode::vision_only;
    return std::nullopt;
}

void check_config(const InferenceConfig& cfg) {
    check_fit_params(cfg.fit);
    if (!(cfg.audio_floor >= 0.0 && cfg.audio_floor < 1.0)) {
        throw std::invalid_argument("audio_floor must lie in [0, 1)");
    }
}

double audio_score(std::span<const std::size_t> contents, std::span<const double> audio_row,
                   double audio_floor) {
    double score = 1.0;
    for (std::size_t o : contents) score *= std::max(audio_row[o], audio_floor);
    return score;
}

double hypothesis_weight(std::span<const BoxIndex> placement, const VisualLikelihoodTable& visual,
                         const std::vector<std::vector<double>>& audio, const InferenceConfig& cfg) {
    double weight = 1.0;
    for (std::size_t b = 0; b < audio.size(); ++b) {
        const auto contents = box_contents(placement, static_cast<BoxIndex>(b));
        weight *= visual.rate(b, contents);
        if (cfg.mode == Mode::full) weight *= audio_score(contents, audio[b], cfg.audio_floor);
    }
    return weight;
}

PosteriorResult posterior(const ParsedScene& scene, const InferenceConfig& cfg) {
    check_config(cfg);
    HypothesisSet hypotheses = enumerate_hypotheses(scene.object_count(), scene.box_count(),
                                                    cfg.allow_empty_boxes, cfg.hypothesis_cap);
    const VisualLikelihoodTable visual =
        visual_likelihood_table(scene, hypotheses, cfg.fit, cfg.threads);
    return posterior(scene, hypotheses, visual, cfg);
}

PosteriorResult posterior(const ParsedScene& scene, const HypothesisSet& hypotheses,
                          const VisualLikelihoodTable& visual, const InferenceConfig& cfg) {
    check_config(cfg);
    if (cfg.mode == Mode::audio_only) {
        throw std::invalid_argument("audio-only mode has no hypothesis posterior; use audio_only_baseline");
    }
    const std::size_t n_obj = scene.object_count();
    const std::size_t n_box = scene.box_count();
    const std::size_t m = hypotheses.size();
    if (hypotheses.n_objects() != n_obj || hypotheses.k_boxes() != n_box) {
        throw std::invalid_argument("hypothesis set does not match the scene's object/box counts");
    }
    if (m == 0) {
        throw std::invalid_argument("no placement leaves every box non-empty with " +
                                    std::to_string(n_obj) + " objects and " +
                                    std::to_string(n_box) + " boxes; allow empty boxes");
    }

    // Products run in name order so a reordered document multiplies the same
    // factors in the same sequence.
    const auto box_order = order_by(n_box, [&](std::size_t a, std::size_t b) {
        return scene.boxes[a].id < scene.boxes[b].id;
    });
    const auto object_order = order_by(n_obj, [&](std::size_t a, std::size_t b) {
        return scene.objects[a].name < scene.objects[b].name;
    });

    // Every hypothesis places each object exactly once, so dividing an
    // object's audio scores by its best score rescales all weights alike.
    // Uniform rows then contribute exactly 1.
    const bool use_audio = cfg.mode == Mode::full;
    std::vector<std::vector<double>> factor(n_obj, std::vector<double>(n_box, 1.0));
    double log_audio_scale = 0.0;
    if (use_audio) {
        const auto audio = audio_matrix(scene);
        for (std::size_t o : object_order) {
            double best = 0.0;
            for (std::size_t b = 0; b < n_box; ++b) {
                factor[o][b] = std::max(audio[b][o], cfg.audio_floor);
                best = std::max(best, factor[o][b]);
            }
            if (best > 0.0) {
                for (double& f : factor[o]) f /= best;
                log_audio_scale += std::log(best);
            } else {
                log_audio_scale = -std::numeric_limits<double>::infinity();
            }
        }
    }

    const bool log_space = n_obj * n_box > cfg.log_space_above;
    std::vector<double> weights(m, 0.0);
    parallel_chunks(m, cfg.threads, [&](std::size_t first, std::size_t last) {
        std::vector<std::vector<std::size_t>> contents(n_box);
        for (std::size_t h = first; h < last; ++h) {
            const auto row = hypotheses[h];
            for (auto& c : contents) c.clear();
            for (std::size_t o = 0; o < n_obj; ++o) contents[row[o]].push_back(o);
            if (log_space) {
                double lw = 0.0;
                for (std::size_t b : box_order) lw += std::log(visual.rate(b, contents[b]));
                if (use_audio) {
                    for (std::size_t o : object_order) lw += std::log(factor[o][row[o]]);
                }
                weights[h] = lw;
            } else {
                double w = 1.0;
                for (std::size_t b : box_order) w *= visual.rate(b, contents[b]);
                if (use_audio) {
                    for (std::size_t o : object_order) w *= factor[o][row[o]];
                }
                weights[h] = w;
            }
        }
    });

    PosteriorResult out;
    out.hypotheses = hypotheses;
    out.probs.assign(m, 0.0);
    auto fallback = [&] {
        std::fill(out.probs.begin(), out.probs.end(), 1.0 / static_cast<double>(m));
        out.diagnostics.degenerate_fallback = true;
        out.diagnostics.total_unnormalized_weight = 0.0;
    };
    if (log_space) {
        const double top = *std::max_element(weights.begin(), weights.end());
        if (top == -std::numeric_limits<double>::infinity()) {
            fallback();
            return out;
        }
        for (double& lw : weights) lw = std::exp(lw - top);
        const double total = sorted_sum(weights);
        for (std::size_t h = 0; h < m; ++h) out.probs[h] = weights[h] / total;
        out.diagnostics.total_unnormalized_weight =
            std::exp(top + std::log(total) + log_audio_scale);
    } else {
        const double total = sorted_sum(weights);
        if (!(total > 0.0)) {
            fallback();
            return out;
        }
        for (std::size_t h = 0; h < m; ++h) out.probs[h] = weights[h] / total;
        out.diagnostics.total_unnormalized_weight = total * std::exp(log_audio_scale);
    }
    return out;
}

MarginalTable marginals(const PosteriorResult& post, std::size_t n_objects, std::size_t k_boxes) {
    std::vector<std::vector<double>> buckets(n_objects * k_boxes);
    for (std::size_t h = 0; h < post.hypotheses.size(); ++h) {
        const auto row = post.hypotheses[h];
        for (std::size_t o = 0; o < n_objects; ++o) {
            buckets[o * k_boxes + row[o]].push_back(post.probs[h]);
        }
    }
    MarginalTable table;
    table.n_objects = n_objects;
    table.k_boxes = k_boxes;
    table.values.resize(n_objects * k_boxes);
    // Clamped because rounding can carry a near-certain cell a step past 1.
    for (std::size_t i = 0; i < buckets.size(); ++i) {
        table.values[i] = std::min(sorted_sum(std::move(buckets[i])), 1.0);
    }
    return table;
}

namespace {

void attach_names(MarginalTable& table, const ParsedScene& scene) {
    table.object_names.clear();
    table.box_ids.clear();
    for (const auto& o : scene.objects) table.object_names.push_back(o.name);
    for (const auto& b : scene.boxes) table.box_ids.push_back(b.id);
}

}  // namespace

MarginalTable marginals(const PosteriorResult& post, const ParsedScene& scene) {
    MarginalTable table = marginals(post, scene.object_count(), scene.box_count());
    attach_names(table, scene);
    return table;
}

MarginalTable audio_only_baseline(const ParsedScene& scene) {
    const auto audio = audio_matrix(scene);
    const std::size_t n_obj = scene.object_count();
    const std::size_t n_box = scene.box_count();
    MarginalTable table;
    table.n_objects = n_obj;
    table.k_boxes = n_box;
    table.values.resize(n_obj * n_box);
    for (std::size_t o = 0; o < n_obj; ++o) {
        std::vector<double> column(n_box);
        for (std::size_t b = 0; b < n_box; ++b) column[b] = audio[b][o];
        const double denom = sorted_sum(column);
        for (std::size_t b = 0; b < n_box; ++b) {
            table.values[o * n_box + b] =
                denom > 0.0 ? audio[b][o] / denom : 1.0 / static_cast<double>(n_box);
        }
        if (!(denom > 0.0)) table.fallback_rows.push_back(o);
    }
    attach_names(table, scene);
    return table;
}

MarginalTable vision_only_baseline(const ParsedScene& scene, const InferenceConfig& cfg) {
    InferenceConfig vision = cfg;
    vision.mode = Mode::vision_only;
    return marginals(posterior(scene, vision), scene);
}

Placement map_hypothesis(const PosteriorResult& post) {
    if (post.hypotheses.empty()) throw std::invalid_argument("empty posterior has no MAP placement");
    std::size_t best = 0;
    for (std::size_t h = 1; h < post.probs.size(); ++h) {
        if (post.probs[h] > post.probs[best]) best = h;
    }
    return post.hypotheses.placement(best);
}

double posterior_entropy(const PosteriorResult& post) {
    std::vector<double> terms;
    terms.reserve(post.probs.size());
    for (double p : post.probs) {
        if (p > 0.0) terms.push_back(-p * std::log(p));
    }
    return sorted_sum(std::move(terms));
}

InferenceResult infer(const ParsedScene& scene, const InferenceConfig& cfg) {
    check_config(cfg);
    InferenceResult result;
    result.mode = cfg.mode;
    if (cfg.mode == Mode::audio_only) {
        result.table = audio_only_baseline(scene);
        result.map.assignment.resize(scene.object_count());
        for (std::size_t o = 0; o < scene.object_count(); ++o) {
            const auto row = result.table.row(o);
            result.map.assignment[o] =
                static_cast<BoxIndex>(std::max_element(row.begin(), row.end()) - row.begin());
        }
        return result;
    }
    const PosteriorResult post = posterior(scene, cfg);
    result.table = marginals(post, scene);
    result.map = map_hypothesis(post);
    result.entropy = posterior_entropy(post);
    result.hypothesis_count = post.hypotheses.size();
    result.diagnostics = post.diagnostics;
    return result;
}

}  // namespace witb
